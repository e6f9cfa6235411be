#pragma once

#include <functional>
#include <vector>

#include "ptkk/response.hpp"

namespace ptkk {

/// prod_j (z - conj(z_j)) / (z - z_j): poles at the UHP points z_j, zeros at
/// their mirror images, unit modulus on the real axis.
/// Throws BoundaryError if any z_j is not strictly in the upper half-plane.
cplx blaschke_factor(const std::vector<cplx>& uhp_poles, cplx z);

struct BlaschkeFactorization {
  std::vector<PoleData> uhp_poles;
  /// UHP zeros of the full response offset + num/den.
  std::vector<cplx> uhp_zeros;
  /// Blaschke winding number N_B: the number of UHP poles.
  int winding_number = 0;
  /// Argument-principle winding of the full response: poles minus zeros.
  int response_winding = 0;
  /// response / B, free of UHP poles.
  RationalResponse regular_part;
};

/// Throws BoundaryError when a pole or zero lies on the real axis.
BlaschkeFactorization factorize(const RationalResponse& response);

/// Real segment [-R, R] closed by the upper semicircle of radius R.
struct ContourSpec {
  double half_width = 10.0;
  std::size_t n_points = 8192;       // per piece
  std::size_t max_points = 1u << 22;  // refinement cap per piece
  double integer_tol = 0.01;
};

struct WindingResult {
  int winding = 0;                // P - Z inside the contour
  double argument_principle = 0;  // (2 pi i)^-1 closed integral of f'/f, i.e. Z - P
  std::size_t points_used = 0;
};

/// Winding of f over the UHP contour from the trapezoid rule on f'/f.
/// The point count doubles until the result is within integer_tol of an
/// integer; NumericalError once max_points is exceeded.
WindingResult winding_number_contour(const std::function<cplx(cplx)>& log_derivative,
                                     const ContourSpec& contour = {});

/// P - Z of the full response over the contour.
WindingResult response_winding_contour(const RationalResponse& response,
                                       const ContourSpec& contour = {});

/// N_B by the argument principle on the pole-characteristic function
/// 1/denominator, which has the poles of the response and no zeros.
WindingResult winding_number_contour(const RationalResponse& response,
                                     const ContourSpec& contour = {});

struct BodeSum {
  double weighted = 0.0;  // sum Im z / (1 + Re z^2 + Im z^2)
  double strip = 0.0;     // sum Im z
};

BodeSum bode_sum(const std::vector<cplx>& uhp_poles);

}  // namespace ptkk
