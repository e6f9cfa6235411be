#include "ptkk/response.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ptkk/errors.hpp"

namespace ptkk {

namespace {

constexpr cplx I{0.0, 1.0};

void sort_by_descending_imag(std::vector<cplx>& z) {
  std::stable_sort(z.begin(), z.end(), [](cplx a, cplx b) {
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() > b.real();
  });
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

const char* to_string(Convention c) {
  return c == Convention::single_port ? "sp" : "sym";
}

Convention convention_from_string(const std::string& s) {
  if (s == "sp" || s == "SP" || s == "single_port") return Convention::single_port;
  if (s == "sym" || s == "SYM" || s == "symmetric") return Convention::symmetric;
  throw ValidationError("unknown convention '" + s + "' (expected sp or sym)");
}

void DimerParams::validate() const {
  if (!finite(gamma) || !finite(kappa) || !finite(gamma_ex))
    throw ValidationError("dimer parameters must be finite");
  if (kappa <= 0.0) throw ValidationError("kappa must be > 0");
  if (gamma < 0.0) throw ValidationError("gamma must be >= 0");
  if (gamma_ex < 0.0) throw ValidationError("gamma_ex must be >= 0");
}

DimerParams DimerParams::normalized() const {
  validate();
  return {gamma / kappa, 1.0, gamma_ex / kappa, convention};
}

bool ChainModel::is_pt_symmetric(double tol) const {
  const std::size_t n = onsite_gain_loss.size();
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(onsite_gain_loss[i] + onsite_gain_loss[n - 1 - i]) > tol) return false;
  for (std::size_t i = 0; i + 1 < hoppings.size(); ++i)
    if (std::abs(hoppings[i] - hoppings[hoppings.size() - 1 - i]) > tol) return false;
  return true;
}

void ChainModel::validate() const {
  const std::size_t n = n_sites();
  if (n < 2) throw ValidationError("chain needs at least 2 sites");
  if (hoppings.size() != n - 1) {
    std::ostringstream os;
    os << "chain with " << n << " sites needs " << n - 1 << " hoppings, got " << hoppings.size();
    throw ValidationError(os.str());
  }
  if (port_site >= n) throw ValidationError("port_site out of range");
  if (!finite(gamma_ex) || gamma_ex < 0.0) throw ValidationError("gamma_ex must be >= 0");
  for (double t : hoppings)
    if (!finite(t)) throw ValidationError("hoppings must be finite");
  for (double g : onsite_gain_loss)
    if (!finite(g)) throw ValidationError("onsite terms must be finite");
  if (enforce_pt && !is_pt_symmetric()) {
    std::ostringstream os;
    os << "onsite gain/loss profile is not PT-symmetric (reversed profile must equal its "
          "negation; hoppings must be mirror-symmetric): [";
    for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << onsite_gain_loss[i];
    os << "]; set enforce_pt = false to override";
    throw ValidationError(os.str());
  }
}

ChainModel ChainModel::from_dimer(const DimerParams& p) {
  if (p.convention != Convention::single_port)
    throw ValidationError("only the single-port dimer has a one-port chain equivalent");
  const DimerParams q = p.normalized();
  ChainModel m;
  m.hoppings = {1.0};
  m.onsite_gain_loss = {-q.gamma, q.gamma};
  m.port_site = 0;
  m.gamma_ex = q.gamma_ex;
  return m;
}

ChainModel ChainModel::ssh(std::size_t n_sites, double t1, double ratio, double gamma,
                           double gamma_ex, const std::vector<double>& profile) {
  if (profile.size() != n_sites) throw ValidationError("profile length must equal n_sites");
  ChainModel m;
  for (std::size_t i = 0; i + 1 < n_sites; ++i) m.hoppings.push_back(i % 2 == 0 ? t1 : ratio * t1);
  for (double s : profile) m.onsite_gain_loss.push_back(gamma * s);
  m.port_site = 0;
  m.gamma_ex = gamma_ex;
  return m;
}

void RationalResponse::validate() const {
  if (denominator.is_zero() || denominator.leading() == cplx{})
    throw ValidationError("denominator leading coefficient must be nonzero");
  if (!numerator.is_zero() && numerator.degree() >= denominator.degree())
    throw ValidationError("resolvent part must be strictly proper");
}

HalfPlane classify(cplx z) {
  if (std::abs(z.imag()) < kBoundaryTol) return HalfPlane::boundary;
  return z.imag() > 0.0 ? HalfPlane::upper : HalfPlane::lower;
}

ComplexMatrix build_effective_hamiltonian(const DimerParams& p) {
  const DimerParams q = p.normalized();
  ComplexMatrix h(2, 2);
  if (q.convention == Convention::single_port) {
    h << -I * (q.gamma + q.gamma_ex / 2.0), 1.0, 1.0, I * q.gamma;
  } else {
    h << -I * (q.gamma + q.gamma_ex / 2.0), 1.0, 1.0, I * (q.gamma - q.gamma_ex / 2.0);
  }
  return h;
}

ComplexMatrix build_effective_hamiltonian(const ChainModel& m) {
  m.validate();
  const auto n = static_cast<Eigen::Index>(m.n_sites());
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = I * m.onsite_gain_loss[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = m.hoppings[static_cast<std::size_t>(i)];
    h(i + 1, i) = m.hoppings[static_cast<std::size_t>(i)];
  }
  const auto p = static_cast<Eigen::Index>(m.port_site);
  h(p, p) -= I * (m.gamma_ex / 2.0);
  return h;
}

ComplexMatrix build_effective_hamiltonian(const Model& m) {
  return std::visit([](const auto& x) { return build_effective_hamiltonian(x); }, m);
}

Polynomial characteristic_polynomial(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw ValidationError("characteristic polynomial needs a square matrix");
  std::vector<cplx> c(static_cast<std::size_t>(n + 1));
  c[static_cast<std::size_t>(n)] = 1.0;
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[static_cast<std::size_t>(n - k + 1)] * id;
    c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return Polynomial(std::move(c));
}

RationalResponse reflection_response(const DimerParams& p) {
  const DimerParams q = p.normalized();
  const double g = q.gamma;
  const double gx = q.gamma_ex;
  RationalResponse r;
  if (q.convention == Convention::single_port) {
    // i gx (w - i g) / (w^2 + i gx/2 w + g^2 + g gx/2 - 1)
    r.numerator = Polynomial{cplx{gx * g, 0.0}, I * gx};
    r.denominator = Polynomial{cplx{g * g + g * gx / 2.0 - 1.0, 0.0}, I * (gx / 2.0), 1.0};
  } else {
    // i gx (w - i g + i gx/2) / ((w + i gx/2)^2 + g^2 - 1)
    r.numerator = Polynomial{cplx{gx * g - gx * gx / 2.0, 0.0}, I * gx};
    r.denominator = Polynomial{cplx{g * g - 1.0 - gx * gx / 4.0, 0.0}, I * gx, 1.0};
  }
  r.offset = 1.0;
  return r;
}

RationalResponse reflection_response(const ChainModel& m) {
  const ComplexMatrix h = build_effective_hamiltonian(m);
  const auto n = h.rows();
  const auto p = static_cast<Eigen::Index>(m.port_site);
  // (p,p) cofactor of (zI - H) is the characteristic polynomial of the minor
  ComplexMatrix minor(n - 1, n - 1);
  for (Eigen::Index i = 0, mi = 0; i < n; ++i) {
    if (i == p) continue;
    for (Eigen::Index j = 0, mj = 0; j < n; ++j) {
      if (j == p) continue;
      minor(mi, mj++) = h(i, j);
    }
    ++mi;
  }
  RationalResponse r;
  r.numerator = (I * m.gamma_ex) * characteristic_polynomial(minor);
  r.denominator = characteristic_polynomial(h);
  r.offset = 1.0;
  return r;
}

RationalResponse reflection_response(const Model& m) {
  return std::visit([](const auto& x) { return reflection_response(x); }, m);
}

std::vector<cplx> pole_locations(const DimerParams& p) {
  const DimerParams q = p.normalized();
  const double g = q.gamma;
  const double gx = q.gamma_ex;
  std::vector<cplx> z(2);
  if (q.convention == Convention::single_port) {
    // roots of w^2 + i(gx/2) w + c with real c: (-i gx/2 +- sqrt(disc)) / 2, disc real
    const double c = g * g + g * gx / 2.0 - 1.0;
    const double disc = -gx * gx / 4.0 - 4.0 * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc) / 2.0;
      z = {cplx{s, -gx / 4.0}, cplx{-s, -gx / 4.0}};
    } else {
      const double s = std::sqrt(-disc);
      z = {cplx{0.0, (-gx / 2.0 + s) / 2.0}, cplx{0.0, (-gx / 2.0 - s) / 2.0}};
    }
  } else {
    const double d = 1.0 - g * g;
    if (d >= 0.0) {
      const double s = std::sqrt(d);
      z = {cplx{s, -gx / 2.0}, cplx{-s, -gx / 2.0}};
    } else {
      const double s = std::sqrt(-d);
      z = {cplx{0.0, -gx / 2.0 + s}, cplx{0.0, -gx / 2.0 - s}};
    }
  }
  sort_by_descending_imag(z);
  return z;
}

std::vector<cplx> pole_locations(const ChainModel& m) {
  const ComplexMatrix h = build_effective_hamiltonian(m);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(h, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition of H_eff failed");
  std::vector<cplx> z(solver.eigenvalues().data(), solver.eigenvalues().data() + h.rows());
  sort_by_descending_imag(z);
  return z;
}

std::vector<cplx> pole_locations(const Model& m) {
  return std::visit([](const auto& x) { return pole_locations(x); }, m);
}

std::vector<PoleData> poles(const Model& m) {
  const std::vector<cplx> z = pole_locations(m);
  const RationalResponse r = reflection_response(m);
  const Polynomial dden = r.denominator.derivative();
  std::vector<PoleData> out;
  out.reserve(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    bool degenerate = false;
    for (std::size_t k = 0; k < z.size(); ++k)
      if (k != j && std::abs(z[j] - z[k]) < kDegenerateTol) degenerate = true;
    PoleData pd;
    pd.location = z[j];
    pd.degenerate = degenerate;
    pd.residue = degenerate ? cplx{std::numeric_limits<double>::quiet_NaN(), 0.0}
                            : r.numerator(z[j]) / dden(z[j]);
    out.push_back(pd);
  }
  return out;
}

std::vector<cplx> residues(const RationalResponse& r, const std::vector<cplx>& locations) {
  r.validate();
  const Polynomial dden = r.denominator.derivative();
  const double scale = std::abs(r.denominator.leading());
  std::vector<cplx> out;
  out.reserve(locations.size());
  for (cplx z : locations) {
    const cplx d = dden(z);
    if (std::abs(d) < kDegenerateTol * scale) {
      std::ostringstream os;
      os << "EP-degenerate pole at " << z << ": denominator derivative " << std::abs(d)
         << " below tolerance; residue undefined";
      throw DegenerateError(os.str());
    }
    out.push_back(r.numerator(z) / d);
  }
  return out;
}

std::vector<std::pair<cplx, cplx>> residues_by_projection(const ChainModel& m) {
  const ComplexMatrix h = build_effective_hamiltonian(m);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(h, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition of H_eff failed");
  const ComplexMatrix& v = solver.eigenvectors();
  Eigen::FullPivLU<ComplexMatrix> lu(v);
  if (!lu.isInvertible()) throw DegenerateError("H_eff is defective (exceptional point)");
  const ComplexMatrix left = lu.inverse();
  const auto p = static_cast<Eigen::Index>(m.port_site);
  std::vector<std::pair<cplx, cplx>> out;
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    out.emplace_back(solver.eigenvalues()(k), I * m.gamma_ex * v(p, k) * left(k, p));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first.imag() > b.first.imag(); });
  return out;
}

bool uhp_threshold(const DimerParams& p) {
  const DimerParams q = p.normalized();
  if (q.convention == Convention::single_port) return q.gamma * (q.gamma + q.gamma_ex / 2.0) > 1.0;
  return q.gamma > 1.0 && q.gamma_ex < 2.0 * std::sqrt(q.gamma * q.gamma - 1.0);
}

double critical_gamma(const DimerParams& p) {
  const DimerParams q = p.normalized();
  const double gx = q.gamma_ex;
  if (q.convention == Convention::single_port)
    return (-gx / 2.0 + std::sqrt(gx * gx / 4.0 + 4.0)) / 2.0;
  return std::sqrt(1.0 + gx * gx / 4.0);
}

double im_omega_plus_leading(const DimerParams& p) {
  const DimerParams q = p.normalized();
  if (q.gamma <= 1.0) throw DomainError("leading-order Im(omega+) needs gamma > kappa");
  const double s = std::sqrt(q.gamma * q.gamma - 1.0);
  return q.convention == Convention::single_port ? s - q.gamma_ex / 4.0 : s - q.gamma_ex / 2.0;
}

ChainModel scale_gain_loss(const ChainModel& unit, double gamma) {
  ChainModel m = unit;
  for (double& g : m.onsite_gain_loss) g *= gamma;
  return m;
}

double chain_critical_gamma(const ChainModel& unit, double lo, double hi) {
  auto top = [&](double g) { return pole_locations(scale_gain_loss(unit, g)).front().imag(); };
  if (!(lo < hi)) throw ValidationError("chain_critical_gamma needs lo < hi");
  if (top(lo) > kBoundaryTol) throw ValidationError("chain already has a UHP pole at the lower bracket");
  if (top(hi) <= kBoundaryTol) throw ValidationError("no UHP pole within the bracket");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (top(mid) > kBoundaryTol ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

int count_uhp(const std::vector<cplx>& locations) {
  return static_cast<int>(std::count_if(locations.begin(), locations.end(),
                                        [](cplx z) { return classify(z) == HalfPlane::upper; }));
}

}  // namespace ptkk
