#include "ptkk/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ptkk/errors.hpp"

namespace ptkk {

Polynomial::Polynomial(std::initializer_list<cplx> coeffs) : coeffs_(coeffs) { trim_exact(); }

Polynomial::Polynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) { trim_exact(); }

Polynomial Polynomial::from_roots(const std::vector<cplx>& roots) {
  Polynomial p{cplx{1.0}};
  for (const cplx& r : roots) p = p * Polynomial{-r, cplx{1.0}};
  return p;
}

void Polynomial::trim_exact() {
  while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
}

cplx Polynomial::coefficient(int k) const {
  if (k < 0 || k > degree()) return {};
  return coeffs_[static_cast<std::size_t>(k)];
}

cplx Polynomial::leading() const { return coeffs_.empty() ? cplx{} : coeffs_.back(); }

cplx Polynomial::operator()(cplx z) const {
  cplx acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<cplx> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::deflate(cplx root, cplx* remainder) const {
  if (coeffs_.empty()) {
    if (remainder) *remainder = {};
    return {};
  }
  const std::size_t n = coeffs_.size();
  std::vector<cplx> q(n - 1);
  cplx carry = coeffs_[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    q[k] = carry;
    carry = coeffs_[k] + carry * root;
  }
  if (remainder) *remainder = carry;
  return Polynomial(std::move(q));
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  double scale = 0.0;
  for (const cplx& c : coeffs_) scale = std::max(scale, std::abs(c));
  std::vector<cplx> c = coeffs_;
  while (!c.empty() && std::abs(c.back()) <= rel_tol * scale) c.pop_back();
  return Polynomial(std::move(c));
}

std::vector<cplx> quadratic_roots(cplx a, cplx b, cplx c) {
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  // pick the sign that avoids cancellation in b + sqrt(disc)
  const cplx s = (std::real(std::conj(b) * disc) >= 0.0) ? disc : -disc;
  const cplx q = -0.5 * (b + s);
  if (q == cplx{}) return {cplx{}, cplx{}};
  return {q / a, c / q};
}

std::vector<cplx> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) return {};
  if (n == 1) return {-coeffs_[0] / coeffs_[1]};
  if (n == 2) return quadratic_roots(coeffs_[2], coeffs_[1], coeffs_[0]);

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  const cplx lead = coeffs_.back();
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs_[static_cast<std::size_t>(i)] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion eigen-decomposition failed");

  const Polynomial dp = derivative();
  std::vector<cplx> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cplx z = solver.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      const cplx d = dp(z);
      if (std::abs(d) < 1e-14) break;
      const cplx step = (*this)(z) / d;
      z -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    out[static_cast<std::size_t>(i)] = z;
  }
  return out;
}

double Polynomial::root_bound() const {
  const int n = degree();
  if (n < 1) return 0.0;
  const double lead = std::abs(coeffs_.back());
  double bound = 0.0;
  for (int k = 1; k <= n; ++k) {
    double term = std::abs(coeffs_[static_cast<std::size_t>(n - k)]) / lead;
    if (k == n) term /= 2.0;
    bound = std::max(bound, std::pow(term, 1.0 / k));
  }
  return 2.0 * bound;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k < a.coeffs_.size()) c[k] += a.coeffs_[k];
    if (k < b.coeffs_.size()) c[k] += b.coeffs_[k];
  }
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + cplx{-1.0} * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(cplx s, const Polynomial& p) {
  std::vector<cplx> c = p.coeffs_;
  for (cplx& x : c) x *= s;
  return Polynomial(std::move(c));
}

}  // namespace ptkk
