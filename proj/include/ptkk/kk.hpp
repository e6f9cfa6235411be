#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ptkk/response.hpp"

namespace ptkk {

/// Uniform grid on [-W, W] with an odd number of points, so 0 is a node.
struct FrequencyGrid {
  double half_width = 5.0;
  std::size_t n_points = 4001;

  static FrequencyGrid symmetric(double half_width, std::size_t n_points);
  /// Validates that `omegas` is uniform, symmetric about zero, and odd-sized.
  static FrequencyGrid from_samples(std::span<const double> omegas, double rel_tol = 1e-6);

  void validate() const;
  [[nodiscard]] double spacing() const { return 2.0 * half_width / static_cast<double>(n_points - 1); }
  [[nodiscard]] double at(std::size_t i) const {
    return -half_width + spacing() * static_cast<double>(i);
  }
  [[nodiscard]] std::vector<double> omegas() const;
};

struct SampledResponse {
  FrequencyGrid grid;
  std::vector<cplx> values;
  bool offset_removed = true;

  /// r(w_i) - offset (or r(w_i) when remove_offset is false).
  static SampledResponse sample(const RationalResponse& r, const FrequencyGrid& grid,
                                bool remove_offset = true);
  void validate() const;
  [[nodiscard]] std::vector<double> real_part() const;
  [[nodiscard]] std::vector<double> imag_part() const;
};

/// How the transform accounts for the spectrum outside [-W, W].
enum class TailModel {
  none,        // truncate at the window edge
  asymptotic,  // extend with a/w + b/w^2 matched to the two edge samples
};

struct HilbertOptions {
  TailModel tail = TailModel::asymptotic;
  /// Fraction of the window at each edge rolled off by a raised cosine
  /// before transforming. 0 disables tapering.
  double taper_fraction = 0.0;
  /// Row-parallel evaluation; output is identical for any value.
  unsigned threads = 1;
};

/// (1/pi) P.V. integral f(w') / (w' - w) dw' at every grid node.
///
/// Singularity subtraction: the integrand (f(w') - f(w)) / (w' - w) is smooth
/// and integrated by the trapezoid rule, with its value at w' = w taken from
/// the centered difference of f. The subtracted constant contributes
/// f(w) ln((W - w)/(W + w)) in closed form.
std::vector<double> hilbert_transform(std::span<const double> samples, const FrequencyGrid& grid,
                                      const HilbertOptions& options = {});

enum class KKRelation {
  real_from_imag,  // Re R = H[Im R] + 2 sum Re(rho/(w - z))
  imag_from_real,  // Im R = -H[Re R] + 2 sum Im(rho/(w - z))
};

struct KKResult {
  KKRelation relation = KKRelation::real_from_imag;
  std::vector<double> hilbert;  // H[Im R] or H[Re R]
  std::vector<double> standard_residual;
  std::vector<double> correction;
  std::vector<double> corrected_residual;
  double l2_standard = 0.0;
  double l2_corrected = 0.0;
  double reduction_factor = 1.0;
};

/// sqrt(sum x_i^2 dw).
double l2_norm(std::span<const double> x, const FrequencyGrid& grid);

/// Standard KK residual; correction is zero and reduction_factor 1.
KKResult standard_kk(const SampledResponse& samples, const HilbertOptions& options = {},
                     KKRelation relation = KKRelation::real_from_imag);

/// 2 sum_j Re(rho_j / (w_i - z_j)), or the Im variant. Every pole must be
/// strictly in the UHP (BoundaryError otherwise).
std::vector<double> residue_correction(std::span<const PoleData> uhp_poles, const FrequencyGrid& grid,
                                       KKRelation relation = KKRelation::real_from_imag);

KKResult corrected_kk(const SampledResponse& samples, std::span<const PoleData> uhp_poles,
                      const HilbertOptions& options = {},
                      KKRelation relation = KKRelation::real_from_imag);

/// The UHP subset of `all`; throws BoundaryError if any pole is on the axis
/// or degenerate in the UHP.
std::vector<PoleData> select_uhp(std::span<const PoleData> all);

/// Spectrum CSV: header `omega,re,im`, comma-separated, decimal point.
/// The grid must be uniform, symmetric, and odd-sized.
SampledResponse read_spectrum_csv(std::istream& in, bool offset_removed = true);
SampledResponse read_spectrum_csv(const std::string& path, bool offset_removed = true);
void write_spectrum_csv(std::ostream& out, const SampledResponse& s);

}  // namespace ptkk
