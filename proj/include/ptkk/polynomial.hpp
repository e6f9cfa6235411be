#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace ptkk {

using cplx = std::complex<double>;

/// Dense complex polynomial, coefficients in ascending degree.
///
/// The zero polynomial is stored as an empty coefficient vector and reports
/// degree -1. Arithmetic trims exact trailing zeros only; callers that need
/// tolerance-based trimming use trimmed(tol).
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<cplx> coeffs);
  explicit Polynomial(std::vector<cplx> coeffs);

  /// Monic polynomial with the given roots.
  static Polynomial from_roots(const std::vector<cplx>& roots);

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] const std::vector<cplx>& coefficients() const { return coeffs_; }
  [[nodiscard]] cplx coefficient(int k) const;
  [[nodiscard]] cplx leading() const;

  [[nodiscard]] cplx operator()(cplx z) const;
  [[nodiscard]] Polynomial derivative() const;

  /// Synthetic division by (z - root). The remainder is returned through
  /// `remainder` when requested.
  [[nodiscard]] Polynomial deflate(cplx root, cplx* remainder = nullptr) const;

  /// Drops trailing coefficients with modulus <= tol * max|coefficient|.
  [[nodiscard]] Polynomial trimmed(double rel_tol) const;

  /// All roots. Degrees 1 and 2 use closed forms; higher degrees use the
  /// eigenvalues of the companion matrix followed by Newton polishing.
  [[nodiscard]] std::vector<cplx> roots() const;

  /// Fujiwara upper bound on the modulus of every root.
  [[nodiscard]] double root_bound() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(cplx s, const Polynomial& p);

 private:
  void trim_exact();
  std::vector<cplx> coeffs_;
};

/// Roots of a z^2 + b z + c with the cancellation-free pairing.
std::vector<cplx> quadratic_roots(cplx a, cplx b, cplx c);

}  // namespace ptkk
