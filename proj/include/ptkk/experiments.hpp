#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptkk/blaschke.hpp"
#include "ptkk/errors.hpp"
#include "ptkk/kk.hpp"
#include "ptkk/response.hpp"

namespace ptkk {

// ---------------------------------------------------------------------------
// Pole trajectories

struct TrajectoryStep {
  double gamma = 0.0;
  std::vector<cplx> poles;  // label k is the same physical branch at every step
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  /// gamma where the largest Im pole first enters the UHP, bracketed by the
  /// steps and refined by bisection on the model.
  std::optional<double> crossing_gamma;
};

/// Reorders `current` so that it minimises the summed distance to `previous`
/// (exhaustive over permutations up to 8 poles, greedy beyond).
std::vector<cplx> match_labels(const std::vector<cplx>& previous, const std::vector<cplx>& current);

Trajectory pole_trajectory(Convention convention, double gamma_ex, double gamma_min, double gamma_max,
                           std::size_t n_steps);

// ---------------------------------------------------------------------------
// Phase diagram

struct PhaseOptions {
  double subsample_fraction = 0.01;  // cells cross-checked by contour winding
  std::uint64_t seed = 20240611;
  double boundary_band = 1e-3;  // |Im z| below this flags the cell
  ContourSpec contour{};
  unsigned threads = 1;
};

struct PhaseCheck {
  std::size_t gamma_index = 0;
  std::size_t gamma_ex_index = 0;
  int threshold_winding = 0;
  int contour_winding = 0;
};

/// Winding numbers on a (gamma, gamma_ex) grid, stored row-major with gamma
/// as the fast index: winding[j * gammas.size() + i] is (gammas[i], gamma_exs[j]).
struct PhaseMap {
  Convention convention = Convention::single_port;
  std::vector<double> gammas;
  std::vector<double> gamma_exs;
  std::vector<int> winding;
  std::vector<bool> boundary;
  std::vector<PhaseCheck> checks;

  [[nodiscard]] int at(std::size_t i_gamma, std::size_t j_gamma_ex) const {
    return winding[j_gamma_ex * gammas.size() + i_gamma];
  }
  [[nodiscard]] std::size_t disagreements() const;
};

PhaseMap phase_diagram(Convention convention, const std::vector<double>& gammas,
                       const std::vector<double>& gamma_exs, const PhaseOptions& options = {});

std::vector<double> linspace(double lo, double hi, std::size_t n);

// ---------------------------------------------------------------------------
// Scaling of the KK residual

struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double exponent_stderr = 0.0;
  double r_squared = 0.0;
};

class FitRefusedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Ordinary least squares of log y on log x. Throws FitRefusedError below
/// five points or for non-positive data.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct ScalingPoint {
  double gamma = 0.0;
  double distance = 0.0;  // gamma - gamma_c
  double l2_standard = 0.0;
  double l2_corrected = 0.0;
  double reduction_factor = 1.0;
  std::vector<cplx> uhp_poles;
};

struct ScalingFit {
  double gamma_c = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (gamma - gamma_c, Delta_KK)
};

struct ScalingOptions {
  double window_min = 1.02;
  double window_max = 1.50;
  std::size_t n_points = 25;
  FrequencyGrid grid{};
  HilbertOptions hilbert{};
  double exclusion_band = 1e-3;  // points closer than this to gamma_c are dropped
  unsigned threads = 1;
};

struct ScalingRun {
  ScalingFit fit;
  std::vector<ScalingPoint> table;
};

/// gamma_c + logspace(window_min - gamma_c, window_max - gamma_c, n).
std::vector<double> scan_gammas(double gamma_c, double window_min, double window_max, std::size_t n);

/// Delta_KK and the residue-corrected norm for one model.
ScalingPoint kk_point(const Model& model, double gamma, double gamma_c, const FrequencyGrid& grid,
                      const HilbertOptions& hilbert);

/// Scans the dimer across the window and fits Delta_KK ~ (gamma - gamma_c)^nu.
/// gamma in `base` is ignored; gamma_c comes from critical_gamma(base).
ScalingRun scaling_experiment(const DimerParams& base, const ScalingOptions& options = {});

/// Same scan for an arbitrary family gamma -> model with a known threshold.
ScalingRun scaling_scan(const std::function<Model(double)>& family, double gamma_c,
                        const ScalingOptions& options);

// ---------------------------------------------------------------------------
// Inverse problem: fit a Lorentzian residual to one UHP pole

struct PoleFitResult {
  cplx location;
  cplx residue;
  double rms_misfit = 0.0;
  bool converged = false;
};

struct PoleFitOptions {
  double peak_ratio = 5.0;  // max |residual| must exceed this times the median
  int max_iterations = 400;
};

/// 2 Re[rho / (w - z0)] evaluated on the grid.
std::vector<double> lorentzian_residual(cplx rho, cplx z0, const FrequencyGrid& grid);

/// Nonlinear least squares for (Re z0, Im z0, Re rho, Im rho), started from
/// the peak position, half-width and height with four phases of rho.
/// Throws NotDetectableError when no peak stands out of the background.
PoleFitResult fit_uhp_pole(std::span<const double> residual, const FrequencyGrid& grid,
                           const PoleFitOptions& options = {});

// ---------------------------------------------------------------------------
// SSH chain cross-check

struct SshOptions {
  std::size_t n_sites = 4;
  double t1 = 1.0;
  double ratio = 0.5;
  double gamma_ex = 0.05;
  std::vector<double> profile{-1.0, 1.0, -1.0, 1.0};
  ScalingOptions scan{1.02, 2.0, 25, FrequencyGrid{}, HilbertOptions{}, 1e-3, 1};
  /// Bracket used to locate the first UHP crossing.
  double search_min = 0.0;
  double search_max = 4.0;
};

struct SshRun {
  double gamma_c = 0.0;
  std::vector<ScalingPoint> table;
  std::optional<ScalingFit> fit;
  std::string refusal;  // why the fit was refused, when it was
  bool monotonic = false;
};

SshRun ssh_experiment(const SshOptions& options = {});

}  // namespace ptkk
