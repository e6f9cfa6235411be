#include "ptkk/blaschke.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ptkk/errors.hpp"

namespace ptkk {

namespace {

void require_uhp(cplx z, const char* what) {
  if (classify(z) != HalfPlane::upper) {
    std::ostringstream os;
    os << what << " at " << z << " is not strictly in the upper half-plane";
    throw BoundaryError(os.str());
  }
}

// Trapezoid rule for the closed contour integral of g over the segment and
// the semicircle, divided by 2 pi i.
cplx contour_integral(const std::function<cplx(cplx)>& g, double radius, std::size_t n) {
  const cplx I{0.0, 1.0};
  cplx segment{};
  const double h = 2.0 * radius / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    segment += w * g(cplx{-radius + h * static_cast<double>(k), 0.0});
  }
  segment *= h;

  cplx arc{};
  const double dt = std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    const cplx e = std::polar(1.0, dt * static_cast<double>(k));
    arc += w * g(radius * e) * (I * radius * e);
  }
  arc *= dt;
  return (segment + arc) / (2.0 * std::numbers::pi * I);
}

}  // namespace

cplx blaschke_factor(const std::vector<cplx>& uhp_poles, cplx z) {
  cplx b{1.0, 0.0};
  for (cplx zj : uhp_poles) {
    require_uhp(zj, "Blaschke pole");
    b *= (z - std::conj(zj)) / (z - zj);
  }
  return b;
}

BlaschkeFactorization factorize(const RationalResponse& response) {
  response.validate();
  BlaschkeFactorization f;

  const std::vector<cplx> pole_z = response.denominator.roots();
  for (cplx z : pole_z) {
    if (classify(z) == HalfPlane::boundary) {
      std::ostringstream os;
      os << "pole at " << z << " lies on the real axis (|Im| < " << kBoundaryTol
         << "); the parameters sit on the exceptional-point threshold";
      throw BoundaryError(os.str());
    }
  }
  std::vector<cplx> uhp_z;
  for (cplx z : pole_z)
    if (classify(z) == HalfPlane::upper) uhp_z.push_back(z);
  std::sort(uhp_z.begin(), uhp_z.end(), [](cplx a, cplx b) { return a.imag() > b.imag(); });
  const std::vector<cplx> res = residues(response, uhp_z);
  for (std::size_t j = 0; j < uhp_z.size(); ++j) f.uhp_poles.push_back({uhp_z[j], res[j], false});

  const Polynomial full = response.full_numerator().trimmed(1e-15);
  for (cplx z : full.roots()) {
    if (classify(z) == HalfPlane::boundary) {
      std::ostringstream os;
      os << "zero at " << z << " lies on the real axis; the response vanishes on the contour";
      throw BoundaryError(os.str());
    }
    if (classify(z) == HalfPlane::upper) f.uhp_zeros.push_back(z);
  }
  f.winding_number = static_cast<int>(f.uhp_poles.size());
  f.response_winding = f.winding_number - static_cast<int>(f.uhp_zeros.size());

  // response / B = full * prod(z - z_j) / (den * prod(z - conj z_j)); the
  // factors z - z_j cancel against the denominator.
  Polynomial den = response.denominator;
  std::vector<cplx> mirrored;
  for (cplx zj : uhp_z) {
    den = den.deflate(zj);
    mirrored.push_back(std::conj(zj));
  }
  den = den * Polynomial::from_roots(mirrored);
  RationalResponse reg;
  reg.denominator = den;
  if (full.degree() == den.degree()) {
    reg.offset = full.leading() / den.leading();
    std::vector<cplx> c = (full - reg.offset * den).coefficients();
    if (!c.empty() && c.size() > static_cast<std::size_t>(den.degree())) c.resize(den.degree());
    reg.numerator = Polynomial(std::move(c));
  } else {
    reg.offset = 0.0;
    reg.numerator = full;
  }
  for (cplx z : reg.denominator.roots())
    if (classify(z) == HalfPlane::upper)
      throw NumericalError("regular part still has a UHP pole after Blaschke division");
  f.regular_part = std::move(reg);
  return f;
}

WindingResult winding_number_contour(const std::function<cplx(cplx)>& log_derivative,
                                     const ContourSpec& contour) {
  if (contour.half_width <= 0.0) throw ValidationError("contour half-width must be > 0");
  if (contour.n_points < 3) throw ValidationError("contour needs at least 3 points per piece");
  for (std::size_t n = contour.n_points; n <= contour.max_points; n = 2 * n - 1) {
    const cplx v = contour_integral(log_derivative, contour.half_width, n);
    const double z_minus_p = v.real();
    const double nearest = std::round(z_minus_p);
    if (std::abs(z_minus_p - nearest) <= contour.integer_tol && std::abs(v.imag()) <= contour.integer_tol) {
      WindingResult w;
      w.argument_principle = z_minus_p;
      w.winding = -static_cast<int>(nearest);
      w.points_used = n;
      return w;
    }
  }
  throw NumericalError(
      "contour winding did not settle on an integer; a pole or zero is too close to the contour");
}

namespace {

void require_enclosed(const Polynomial& p, const ContourSpec& contour, const char* what) {
  if (p.degree() >= 1 && p.root_bound() >= contour.half_width) {
    std::ostringstream os;
    os << "contour radius " << contour.half_width << " does not provably enclose all " << what
       << " (root bound " << p.root_bound() << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

WindingResult response_winding_contour(const RationalResponse& response, const ContourSpec& contour) {
  response.validate();
  const Polynomial num = response.full_numerator().trimmed(1e-15);
  const Polynomial& den = response.denominator;
  require_enclosed(num, contour, "zeros");
  require_enclosed(den, contour, "poles");
  const Polynomial dnum = num.derivative();
  const Polynomial dden = den.derivative();
  return winding_number_contour(
      [&](cplx z) { return dnum(z) / num(z) - dden(z) / den(z); }, contour);
}

WindingResult winding_number_contour(const RationalResponse& response, const ContourSpec& contour) {
  response.validate();
  const Polynomial& den = response.denominator;
  require_enclosed(den, contour, "poles");
  const Polynomial dden = den.derivative();
  return winding_number_contour([&](cplx z) { return -dden(z) / den(z); }, contour);
}

BodeSum bode_sum(const std::vector<cplx>& uhp_poles) {
  BodeSum s;
  for (cplx z : uhp_poles) {
    require_uhp(z, "Bode-sum pole");
    s.weighted += z.imag() / (1.0 + z.real() * z.real() + z.imag() * z.imag());
    s.strip += z.imag();
  }
  return s;
}

}  // namespace ptkk
