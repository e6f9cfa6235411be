#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ptkk/polynomial.hpp"

namespace ptkk {

/// |Im z| below this is neither upper nor lower half-plane.
inline constexpr double kBoundaryTol = 1e-12;
/// Two poles closer than this (in units of kappa) are treated as an EP.
inline constexpr double kDegenerateTol = 1e-9;

enum class Convention {
  single_port,  // port decay on site 1 only
  symmetric,    // equal decay on both sites
};

const char* to_string(Convention c);
Convention convention_from_string(const std::string& s);

struct DimerParams {
  double gamma = 0.0;
  double kappa = 1.0;
  double gamma_ex = 0.0;
  Convention convention = Convention::single_port;

  void validate() const;
  /// Same physics with kappa = 1; all other rates divided by kappa.
  [[nodiscard]] DimerParams normalized() const;
};

/// Open tight-binding chain with purely imaginary onsite terms and one port.
/// Site indices are zero-based.
struct ChainModel {
  std::vector<double> hoppings;          // n_sites - 1 entries
  std::vector<double> onsite_gain_loss;  // H_ii = i * onsite_gain_loss[i]
  std::size_t port_site = 0;
  double gamma_ex = 0.0;
  bool enforce_pt = true;

  [[nodiscard]] std::size_t n_sites() const { return onsite_gain_loss.size(); }
  [[nodiscard]] bool is_pt_symmetric(double tol = 1e-12) const;
  void validate() const;

  /// Two-site chain equivalent to an SP dimer (port on site 0).
  static ChainModel from_dimer(const DimerParams& p);
  /// SSH chain with hoppings t1, ratio*t1, t1, ... and onsite gamma*profile[i].
  static ChainModel ssh(std::size_t n_sites, double t1, double ratio, double gamma, double gamma_ex,
                        const std::vector<double>& profile);
};

using Model = std::variant<DimerParams, ChainModel>;
using ComplexMatrix = Eigen::MatrixXcd;

/// offset + numerator(z) / denominator(z).
struct RationalResponse {
  Polynomial numerator;
  Polynomial denominator;
  cplx offset{1.0, 0.0};

  [[nodiscard]] cplx operator()(cplx z) const { return offset + resolvent(z); }
  /// The response with the constant offset removed.
  [[nodiscard]] cplx resolvent(cplx z) const { return numerator(z) / denominator(z); }
  /// Numerator of the response written as a single fraction.
  [[nodiscard]] Polynomial full_numerator() const { return offset * denominator + numerator; }
  void validate() const;
};

enum class HalfPlane { upper, lower, boundary };

HalfPlane classify(cplx z);

struct PoleData {
  cplx location;
  cplx residue;  // of the full response; NaN when degenerate
  bool degenerate = false;

  [[nodiscard]] HalfPlane half_plane() const { return classify(location); }
  [[nodiscard]] bool in_uhp() const { return half_plane() == HalfPlane::upper; }
};

ComplexMatrix build_effective_hamiltonian(const DimerParams& p);
ComplexMatrix build_effective_hamiltonian(const ChainModel& m);
ComplexMatrix build_effective_hamiltonian(const Model& m);

RationalResponse reflection_response(const DimerParams& p);
RationalResponse reflection_response(const ChainModel& m);
RationalResponse reflection_response(const Model& m);

/// Characteristic polynomial det(z I - A) by Faddeev-LeVerrier.
Polynomial characteristic_polynomial(const ComplexMatrix& a);

/// Pole locations only, sorted by descending imaginary part. Never throws on
/// degeneracy; use poles() when residues are needed.
std::vector<cplx> pole_locations(const DimerParams& p);
std::vector<cplx> pole_locations(const ChainModel& m);
std::vector<cplx> pole_locations(const Model& m);

/// Poles with residues attached. Coalesced poles are returned with
/// degenerate = true and a NaN residue.
std::vector<PoleData> poles(const Model& m);

/// numerator(z_j) / denominator'(z_j) for each location.
/// Throws DegenerateError when |denominator'(z_j)| is below tolerance.
std::vector<cplx> residues(const RationalResponse& r, const std::vector<cplx>& locations);

/// Residues from the left/right eigenvectors of H_eff:
/// i gamma_ex * R(p,k) * L(k,p). Returns (eigenvalue, residue) pairs.
std::vector<std::pair<cplx, cplx>> residues_by_projection(const ChainModel& m);

bool uhp_threshold(const DimerParams& p);
/// Gain-loss rate at which the upper pole reaches the real axis.
/// gamma in `p` is ignored. Result in the same units as kappa.
double critical_gamma(const DimerParams& p);
/// Leading-order Im of the upper pole for gamma > kappa.
double im_omega_plus_leading(const DimerParams& p);

/// `unit` with its onsite terms multiplied by gamma.
ChainModel scale_gain_loss(const ChainModel& unit, double gamma);

/// Smallest gamma in [lo, hi] at which scale_gain_loss(unit, gamma) acquires a
/// UHP pole, by bisection on the largest Im eigenvalue. Throws
/// ValidationError when the bracket does not contain a crossing.
double chain_critical_gamma(const ChainModel& unit, double lo, double hi);

/// Number of poles strictly in the upper half-plane.
int count_uhp(const std::vector<cplx>& locations);

}  // namespace ptkk
