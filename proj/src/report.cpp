#include "ptkk/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace ptkk::report {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

const char* half_plane_name(HalfPlane h) {
  switch (h) {
    case HalfPlane::upper: return "upper";
    case HalfPlane::lower: return "lower";
    case HalfPlane::boundary: return "boundary";
  }
  return "?";
}

// JSON cannot hold inf/nan; those become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(cplx z) { return json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

json to_json(const DimerParams& p) {
  return json{{"gamma", p.gamma}, {"kappa", p.kappa}, {"gamma_ex", p.gamma_ex},
              {"convention", to_string(p.convention)}};
}

json to_json(const PoleData& p) {
  return json{{"location", to_json(p.location)},
              {"residue", to_json(p.residue)},
              {"half_plane", half_plane_name(p.half_plane())},
              {"degenerate", p.degenerate}};
}

json to_json(const ScalingFit& f) {
  json pts = json::array();
  for (const auto& [x, y] : f.points) pts.push_back(json::array({x, y}));
  return json{{"gamma_c", f.gamma_c},
              {"window", json::array({f.window_min, f.window_max})},
              {"nu", number(f.exponent)},
              {"nu_stderr", number(f.exponent_stderr)},
              {"r_squared", number(f.r_squared)},
              {"points", pts}};
}

json to_json(const PoleFitResult& f) {
  return json{{"location", to_json(f.location)},
              {"residue", to_json(f.residue)},
              {"rms_misfit", number(f.rms_misfit)},
              {"converged", f.converged}};
}

json to_json(const BodeSum& b) { return json{{"weighted", b.weighted}, {"strip", b.strip}}; }

void write_kk_csv(std::ostream& out, const SampledResponse& s, const KKResult& k) {
  out << "omega,re,im,hilbert,standard_residual,correction,corrected_residual\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out << format_double(s.grid.at(i)) << ',' << format_double(s.values[i].real()) << ','
        << format_double(s.values[i].imag()) << ',' << format_double(k.hilbert[i]) << ','
        << format_double(k.standard_residual[i]) << ',' << format_double(k.correction[i]) << ','
        << format_double(k.corrected_residual[i]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  const std::size_t np = t.steps.empty() ? 0 : t.steps.front().poles.size();
  out << "gamma";
  for (std::size_t k = 1; k <= np; ++k) out << ",re_z" << k << ",im_z" << k;
  out << '\n';
  for (const TrajectoryStep& s : t.steps) {
    out << format_double(s.gamma);
    for (cplx z : s.poles) out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    out << '\n';
  }
}

void write_phase_csv(std::ostream& out, const PhaseMap& m) {
  std::map<std::pair<std::size_t, std::size_t>, int> checked;
  for (const PhaseCheck& c : m.checks) checked[{c.gamma_index, c.gamma_ex_index}] = c.contour_winding;
  out << "gamma,gamma_ex,winding,boundary,contour_winding\n";
  for (std::size_t j = 0; j < m.gamma_exs.size(); ++j) {
    for (std::size_t i = 0; i < m.gammas.size(); ++i) {
      const std::size_t c = j * m.gammas.size() + i;
      out << format_double(m.gammas[i]) << ',' << format_double(m.gamma_exs[j]) << ',' << m.winding[c]
          << ',' << (m.boundary[c] ? 1 : 0) << ',';
      if (auto it = checked.find({i, j}); it != checked.end()) out << it->second;
      out << '\n';
    }
  }
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingPoint>& table) {
  out << "gamma,distance,l2_standard,l2_corrected,reduction_factor,n_uhp\n";
  for (const ScalingPoint& p : table) {
    out << format_double(p.gamma) << ',' << format_double(p.distance) << ',' << format_double(p.l2_standard)
        << ',' << format_double(p.l2_corrected) << ',' << format_double(p.reduction_factor) << ','
        << p.uhp_poles.size() << '\n';
  }
}

void write_uhp_poles_csv(std::ostream& out, const std::vector<ScalingPoint>& table) {
  out << "gamma,index,re,im\n";
  for (const ScalingPoint& p : table)
    for (std::size_t k = 0; k < p.uhp_poles.size(); ++k)
      out << format_double(p.gamma) << ',' << k << ',' << format_double(p.uhp_poles[k].real()) << ','
          << format_double(p.uhp_poles[k].imag()) << '\n';
}

void write_poles_csv(std::ostream& out, const std::vector<PoleData>& poles) {
  out << "index,re,im,residue_re,residue_im,half_plane,degenerate\n";
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const PoleData& p = poles[k];
    out << k << ',' << format_double(p.location.real()) << ',' << format_double(p.location.imag()) << ','
        << format_double(p.residue.real()) << ',' << format_double(p.residue.imag()) << ','
        << half_plane_name(p.half_plane()) << ',' << (p.degenerate ? 1 : 0) << '\n';
  }
}

}  // namespace ptkk::report
