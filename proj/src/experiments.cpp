#include "ptkk/experiments.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "ptkk/errors.hpp"
#include "ptkk/parallel.hpp"

namespace ptkk {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("linspace needs at least 2 points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<cplx> match_labels(const std::vector<cplx>& previous, const std::vector<cplx>& current) {
  const std::size_t n = current.size();
  if (previous.size() != n) throw ValidationError("pole count changed along the trajectory");
  if (n <= 8) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t k = 0; k < n; ++k) cost += std::abs(previous[k] - current[perm[k]]);
      if (cost < best_cost - 1e-15) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = current[best[k]];
    return out;
  }
  std::vector<bool> used(n, false);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pick = 0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < n; ++m) {
      if (!used[m] && std::abs(previous[k] - current[m]) < d) {
        d = std::abs(previous[k] - current[m]);
        pick = m;
      }
    }
    used[pick] = true;
    out[k] = current[pick];
  }
  return out;
}

Trajectory pole_trajectory(Convention convention, double gamma_ex, double gamma_min, double gamma_max,
                           std::size_t n_steps) {
  if (n_steps < 2) throw ValidationError("trajectory needs at least 2 steps");
  if (!(gamma_min < gamma_max) || gamma_min < 0.0) throw ValidationError("need 0 <= gamma_min < gamma_max");
  Trajectory t;
  for (double g : linspace(gamma_min, gamma_max, n_steps)) {
    std::vector<cplx> z = pole_locations(DimerParams{g, 1.0, gamma_ex, convention});
    if (!t.steps.empty()) z = match_labels(t.steps.back().poles, z);
    t.steps.push_back({g, std::move(z)});
  }
  auto top = [](const TrajectoryStep& s) {
    double m = -std::numeric_limits<double>::infinity();
    for (cplx z : s.poles) m = std::max(m, z.imag());
    return m;
  };
  for (std::size_t k = 1; k < t.steps.size(); ++k) {
    const double a = top(t.steps[k - 1]);
    const double b = top(t.steps[k]);
    if (a <= kBoundaryTol && b > kBoundaryTol) {
      // the bracket is refined on the model itself; a linear interpolation
      // would miss by up to a step where Im z+ has a kink at the EP
      double lo = t.steps[k - 1].gamma;
      double hi = t.steps[k].gamma;
      for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto z = pole_locations(DimerParams{mid, 1.0, gamma_ex, convention});
        (z.front().imag() > kBoundaryTol ? hi : lo) = mid;
      }
      t.crossing_gamma = 0.5 * (lo + hi);
      break;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

std::size_t PhaseMap::disagreements() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const PhaseCheck& c) {
    return c.threshold_winding != c.contour_winding;
  }));
}

PhaseMap phase_diagram(Convention convention, const std::vector<double>& gammas,
                       const std::vector<double>& gamma_exs, const PhaseOptions& options) {
  for (double g : gammas)
    if (!(g > 0.0)) throw ValidationError("phase-diagram gamma grid must be positive");
  for (double g : gamma_exs)
    if (!(g > 0.0)) throw ValidationError("phase-diagram gamma_ex grid must be positive");
  PhaseMap map;
  map.convention = convention;
  map.gammas = gammas;
  map.gamma_exs = gamma_exs;
  const std::size_t ng = gammas.size();
  const std::size_t cells = ng * gamma_exs.size();
  map.winding.assign(cells, 0);
  map.boundary.assign(cells, false);

  std::vector<double> min_imag(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const DimerParams p{gammas[c % ng], 1.0, gamma_exs[c / ng], convention};
    map.winding[c] = uhp_threshold(p) ? 1 : 0;
    double m = std::numeric_limits<double>::infinity();
    for (cplx z : pole_locations(p)) m = std::min(m, std::abs(z.imag()));
    min_imag[c] = m;
    map.boundary[c] = m < options.boundary_band;
  }

  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::size_t n_check = cells;
  if (options.subsample_fraction < 1.0) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    n_check = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options.subsample_fraction * static_cast<double>(cells))));
    n_check = std::min(n_check, cells);
    order.resize(n_check);
    std::sort(order.begin(), order.end());
  }
  // cells exactly on the threshold have no defined winding
  std::erase_if(order, [&](std::size_t c) { return min_imag[c] < kBoundaryTol; });

  map.checks.resize(order.size());
  parallel_for(order.size(), options.threads, [&](std::size_t k) {
    const std::size_t c = order[k];
    const DimerParams p{gammas[c % ng], 1.0, gamma_exs[c / ng], convention};
    PhaseCheck check;
    check.gamma_index = c % ng;
    check.gamma_ex_index = c / ng;
    check.threshold_winding = map.winding[c];
    check.contour_winding = winding_number_contour(reflection_response(p), options.contour).winding;
    map.checks[k] = check;
  });
  return map;
}

// ---------------------------------------------------------------------------

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_power_law: x and y differ in length");
  if (x.size() < 5) {
    std::ostringstream os;
    os << "power-law fit refused: " << x.size() << " valid points, need at least 5";
    throw FitRefusedError(os.str());
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw FitRefusedError("power-law fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw FitRefusedError("power-law fit needs distinct x values");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.exponent * lx[i]);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  f.exponent_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return f;
}

std::vector<double> scan_gammas(double gamma_c, double window_min, double window_max, std::size_t n) {
  if (n < 2) throw ValidationError("scan needs at least 2 points");
  if (!(window_min < window_max)) throw ValidationError("scan window needs min < max");
  if (window_min <= gamma_c) return linspace(window_min, window_max, n);
  const double a = std::log(window_min - gamma_c);
  const double b = std::log(window_max - gamma_c);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = gamma_c + std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = window_min;
  out.back() = window_max;
  return out;
}

ScalingPoint kk_point(const Model& model, double gamma, double gamma_c, const FrequencyGrid& grid,
                      const HilbertOptions& hilbert) {
  const RationalResponse r = reflection_response(model);
  const SampledResponse s = SampledResponse::sample(r, grid);
  const std::vector<PoleData> all = poles(model);
  const std::vector<PoleData> uhp = select_uhp(all);
  const KKResult k = corrected_kk(s, uhp, hilbert);
  ScalingPoint p;
  p.gamma = gamma;
  p.distance = gamma - gamma_c;
  p.l2_standard = k.l2_standard;
  p.l2_corrected = k.l2_corrected;
  p.reduction_factor = k.reduction_factor;
  for (const PoleData& u : uhp) p.uhp_poles.push_back(u.location);
  return p;
}

namespace {

std::vector<ScalingPoint> scan_table(const std::function<Model(double)>& family, double gamma_c,
                                     const ScalingOptions& options) {
  const std::vector<double> gammas =
      scan_gammas(gamma_c, options.window_min, options.window_max, options.n_points);
  std::vector<ScalingPoint> table(gammas.size());
  // the Hilbert kernel runs single-threaded inside each point; parallelism is across points
  HilbertOptions h = options.hilbert;
  h.threads = 1;
  parallel_for(gammas.size(), options.threads, [&](std::size_t i) {
    table[i] = kk_point(family(gammas[i]), gammas[i], gamma_c, options.grid, h);
  });
  return table;
}

ScalingFit fit_table(const std::vector<ScalingPoint>& table, double gamma_c, const ScalingOptions& options) {
  ScalingFit fit;
  fit.gamma_c = gamma_c;
  fit.window_min = options.window_min;
  fit.window_max = options.window_max;
  std::vector<double> x, y;
  for (const ScalingPoint& p : table) {
    if (p.distance < options.exclusion_band || !(p.l2_standard > 0.0)) continue;
    x.push_back(p.distance);
    y.push_back(p.l2_standard);
    fit.points.emplace_back(p.distance, p.l2_standard);
  }
  const PowerLawFit f = fit_power_law(x, y);
  fit.exponent = f.exponent;
  fit.exponent_stderr = f.exponent_stderr;
  fit.r_squared = f.r_squared;
  return fit;
}

}  // namespace

ScalingRun scaling_scan(const std::function<Model(double)>& family, double gamma_c,
                        const ScalingOptions& options) {
  options.grid.validate();
  ScalingRun run;
  run.table = scan_table(family, gamma_c, options);
  run.fit = fit_table(run.table, gamma_c, options);
  return run;
}

ScalingRun scaling_experiment(const DimerParams& base, const ScalingOptions& options) {
  base.validate();
  const double gamma_c = critical_gamma(base);
  if (options.window_min <= gamma_c) {
    std::ostringstream os;
    os << "scaling window must lie above gamma_c = " << gamma_c << " (got min " << options.window_min << ")";
    throw ValidationError(os.str());
  }
  const DimerParams unit = base.normalized();
  return scaling_scan(
      [unit](double g) {
        DimerParams p = unit;
        p.gamma = g;
        return Model{p};
      },
      gamma_c, options);
}

// ---------------------------------------------------------------------------

std::vector<double> lorentzian_residual(cplx rho, cplx z0, const FrequencyGrid& grid) {
  std::vector<double> out(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) out[i] = 2.0 * (rho / (cplx{grid.at(i), 0.0} - z0)).real();
  return out;
}

namespace {

// Parameters: (Re z0, log Im z0, Re rho, Im rho).
struct LorentzianFunctor : Eigen::DenseFunctor<double> {
  LorentzianFunctor(const std::vector<double>& w, std::span<const double> y)
      : Eigen::DenseFunctor<double>(4, static_cast<int>(w.size())), w_(w), y_(y) {}

  int operator()(const InputType& p, ValueType& f) const {
    const double x0 = p(0), y0 = std::exp(p(1)), a = p(2), b = p(3);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double u = w_[i] - x0;
      f(static_cast<Eigen::Index>(i)) = 2.0 * (a * u - b * y0) / (u * u + y0 * y0) - y_[i];
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    const double x0 = p(0), y0 = std::exp(p(1)), a = p(2), b = p(3);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double u = w_[i] - x0;
      const double d = u * u + y0 * y0;
      const double num = a * u - b * y0;
      j(r, 0) = 2.0 * (-a * d + 2.0 * u * num) / (d * d);
      j(r, 1) = y0 * 2.0 * (-b * d - 2.0 * y0 * num) / (d * d);
      j(r, 2) = 2.0 * u / d;
      j(r, 3) = -2.0 * y0 / d;
    }
    return 0;
  }

  const std::vector<double>& w_;
  std::span<const double> y_;
};

double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

PoleFitResult fit_uhp_pole(std::span<const double> residual, const FrequencyGrid& grid,
                           const PoleFitOptions& options) {
  grid.validate();
  if (residual.size() != grid.n_points) throw ValidationError("residual length does not match the grid");
  const std::size_t n = residual.size();

  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(residual[i]);
  const std::size_t peak = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
  const double median = sorted[n / 2];
  if (!(mag[peak] > options.peak_ratio * median) || mag[peak] == 0.0) {
    std::ostringstream os;
    os << "no detectable peak: max |residual| " << mag[peak] << " vs median " << median;
    throw NotDetectableError(os.str());
  }

  const double h = grid.spacing();
  std::size_t left = peak, right = peak;
  while (left > 0 && mag[left] > 0.5 * mag[peak]) --left;
  while (right + 1 < n && mag[right] > 0.5 * mag[peak]) ++right;
  const double hwhm = std::max(0.5 * static_cast<double>(right - left) * h, h);
  const double amplitude = mag[peak] * hwhm / 2.0;

  const std::vector<double> w = grid.omegas();
  LorentzianFunctor functor(w, residual);

  PoleFitResult best;
  double best_rms = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const cplx rho0 = std::polar(amplitude, k * std::numbers::pi / 2.0);
    Eigen::VectorXd p(4);
    p << grid.at(peak), std::log(hwhm), rho0.real(), rho0.imag();
    Eigen::LevenbergMarquardt<LorentzianFunctor> lm(functor);
    lm.setMaxfev(options.max_iterations);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    const Eigen::LevenbergMarquardtSpace::Status status = lm.minimize(p);
    Eigen::VectorXd f(static_cast<Eigen::Index>(n));
    functor(p, f);
    const double e = rms(f);
    if (!std::isfinite(e) || e >= best_rms) continue;
    best_rms = e;
    best.location = cplx{p(0), std::exp(p(1))};
    best.residue = cplx{p(2), p(3)};
    best.rms_misfit = e;
    best.converged = status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                     status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
  }
  if (!std::isfinite(best_rms)) throw NumericalError("pole fit produced no finite solution");
  return best;
}

// ---------------------------------------------------------------------------

SshRun ssh_experiment(const SshOptions& options) {
  const ChainModel unit =
      ChainModel::ssh(options.n_sites, options.t1, options.ratio, 1.0, options.gamma_ex, options.profile);
  unit.validate();
  SshRun run;
  run.gamma_c = chain_critical_gamma(unit, options.search_min, options.search_max);
  run.table = scan_table([&](double g) { return Model{scale_gain_loss(unit, g)}; }, run.gamma_c, options.scan);
  try {
    run.fit = fit_table(run.table, run.gamma_c, options.scan);
  } catch (const FitRefusedError& e) {
    run.refusal = e.what();
  }
  bool decreasing = true, increasing = true;
  for (std::size_t i = 1; i < run.table.size(); ++i) {
    if (!(run.table[i].l2_standard < run.table[i - 1].l2_standard)) decreasing = false;
    if (!(run.table[i].l2_standard > run.table[i - 1].l2_standard)) increasing = false;
  }
  run.monotonic = decreasing || increasing;
  return run;
}

}  // namespace ptkk
