#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "ptkk/errors.hpp"
#include "ptkk/experiments.hpp"

using namespace ptkk;
using doctest::Approx;

namespace {

DimerParams sp(double g, double gx) { return {g, 1.0, gx, Convention::single_port}; }

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("trajectory crossings") {
  const Trajectory a = pole_trajectory(Convention::single_port, 0.1, 0.0, 2.0, 2001);
  REQUIRE(a.crossing_gamma.has_value());
  CHECK(*a.crossing_gamma == Approx(0.9753125).epsilon(1e-7));

  const Trajectory b = pole_trajectory(Convention::single_port, 0.0, 0.0, 2.0, 2001);
  REQUIRE(b.crossing_gamma.has_value());
  CHECK(*b.crossing_gamma == Approx(1.0).epsilon(1e-9));

  const Trajectory c = pole_trajectory(Convention::symmetric, 0.1, 0.0, 2.0, 2001);
  REQUIRE(c.crossing_gamma.has_value());
  CHECK(*c.crossing_gamma == Approx(std::sqrt(1.0025)).epsilon(1e-10));

  CHECK_FALSE(pole_trajectory(Convention::single_port, 0.1, 0.0, 0.5, 11).crossing_gamma.has_value());
  CHECK_THROWS_AS(pole_trajectory(Convention::single_port, 0.1, 1.0, 0.5, 11), ValidationError);
}

TEST_CASE("property: trajectory crossing matches the closed-form threshold") {
  auto g = testing::rng(53);
  for (int t = 0; t < 20; ++t) {
    const double gx = testing::uniform(g, 0.01, 1.0);
    for (Convention conv : {Convention::single_port, Convention::symmetric}) {
      const Trajectory tr = pole_trajectory(conv, gx, 0.0, 2.5, 2501);
      REQUIRE(tr.crossing_gamma.has_value());
      CHECK(*tr.crossing_gamma == Approx(critical_gamma({0.0, 1.0, gx, conv})).epsilon(1e-10));
    }
  }
}

TEST_CASE("trajectory labels follow continuous branches") {
  const Trajectory tr = pole_trajectory(Convention::single_port, 0.1, 0.0, 2.0, 401);
  for (std::size_t k = 1; k < tr.steps.size(); ++k)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(tr.steps[k].poles[j] - tr.steps[k - 1].poles[j]) < 0.15);
  const auto m = match_labels({cplx{0, 1}, cplx{0, -1}}, {cplx{0, -1.01}, cplx{0, 1.01}});
  CHECK(m[0].imag() > 0.0);
}

TEST_CASE("phase diagram examples") {
  const PhaseMap sp_map = phase_diagram(Convention::single_port, {0.5, 1.5}, {0.1}, PhaseOptions{1.0});
  CHECK(sp_map.at(0, 0) == 0);
  CHECK(sp_map.at(1, 0) == 1);
  const PhaseMap sym_map = phase_diagram(Convention::symmetric, {1.2}, {0.1, 2.0}, PhaseOptions{1.0});
  CHECK(sym_map.at(0, 0) == 1);
  CHECK(sym_map.at(0, 1) == 0);  // re-entrant: gamma > kappa but strong port loss
  CHECK(sym_map.disagreements() == 0);
  CHECK_THROWS_AS(phase_diagram(Convention::symmetric, {0.0}, {0.1}), ValidationError);
}

TEST_CASE("phase diagram contour cross-check") {
  const auto gs = linspace(0.02, 2.0, 20);
  for (Convention conv : {Convention::single_port, Convention::symmetric}) {
    PhaseOptions o;
    o.subsample_fraction = 1.0;
    const PhaseMap m = phase_diagram(conv, gs, gs, o);
    CHECK(m.checks.size() == 400);
    CHECK(m.disagreements() == 0);
  }
}

TEST_CASE("phase diagram subsample is seeded") {
  const auto gs = linspace(0.02, 2.0, 30);
  PhaseOptions o;
  o.subsample_fraction = 0.05;
  const PhaseMap a = phase_diagram(Convention::single_port, gs, gs, o);
  const PhaseMap b = phase_diagram(Convention::single_port, gs, gs, o);
  REQUIRE(a.checks.size() == b.checks.size());
  CHECK(a.checks.size() == 45);
  for (std::size_t k = 0; k < a.checks.size(); ++k) CHECK(a.checks[k].gamma_index == b.checks[k].gamma_index);
}

TEST_CASE("power-law fit") {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(0.1 * i);
    y.push_back(3.0 * std::pow(0.1 * i, -0.7));
  }
  const PowerLawFit f = fit_power_law(x, y);
  CHECK(f.exponent == Approx(-0.7).epsilon(1e-12));
  CHECK(f.r_squared == Approx(1.0));
  CHECK_THROWS_AS(fit_power_law(std::span(x).first(4), std::span(y).first(4)), FitRefusedError);
  y[3] = -1.0;
  CHECK_THROWS_AS(fit_power_law(x, y), FitRefusedError);
}

TEST_CASE("scan gammas are log spaced above threshold") {
  const auto g = scan_gammas(1.0, 1.02, 1.5, 25);
  CHECK(g.front() == 1.02);
  CHECK(g.back() == 1.5);
  const double r0 = (g[1] - 1.0) / (g[0] - 1.0);
  const double r1 = (g[24] - 1.0) / (g[23] - 1.0);
  CHECK(r0 == Approx(r1).epsilon(1e-10));
}

TEST_CASE("toy Lorentzian exponent is -1/2") {
  // closed form: |rho| sqrt(2 pi / y)
  CHECK(std::log(testing::lorentzian_l2(1.0, cplx{0, 0.1}) / testing::lorentzian_l2(1.0, cplx{0, 0.4})) /
            std::log(0.1 / 0.4) ==
        Approx(-0.5));
  const FrequencyGrid grid = FrequencyGrid::symmetric(50.0, 20001);
  std::vector<double> ys, l2;
  for (std::size_t k = 0; k < 10; ++k) {
    const double y = 0.05 * std::pow(10.0, static_cast<double>(k) / 9.0);
    const PoleData p{cplx{0, y}, cplx{0.3, -0.2}, false};
    const auto c = residue_correction(std::span(&p, 1), grid);
    ys.push_back(y);
    l2.push_back(l2_norm(c, grid));
    CHECK(l2.back() == Approx(testing::lorentzian_l2(p.residue, p.location)).epsilon(0.02));
  }
  // a complex residue adds a slowly decaying dispersive tail that the finite
  // window clips, which biases the slope slightly
  CHECK(fit_power_law(ys, l2).exponent == Approx(-0.5).epsilon(0.01));

  ys.clear();
  l2.clear();
  for (std::size_t k = 0; k < 25; ++k) {
    const double y = 0.05 * std::pow(10.0, static_cast<double>(k) / 24.0);
    const PoleData p{cplx{0, y}, cplx{0, -0.2}, false};
    ys.push_back(y);
    l2.push_back(l2_norm(residue_correction(std::span(&p, 1), grid), grid));
  }
  CHECK(std::abs(fit_power_law(ys, l2).exponent + 0.5) <= 1e-3);
}

TEST_CASE("scaling experiment") {
  const ScalingRun run = scaling_experiment(sp(0.0, 0.05));
  CHECK(run.fit.gamma_c == Approx(0.987578).epsilon(1e-6));
  CHECK(run.table.size() == 25);
  CHECK(run.fit.points.size() == 25);
  for (std::size_t i = 1; i < run.table.size(); ++i)
    CHECK(run.table[i].l2_standard < run.table[i - 1].l2_standard);
  for (const ScalingPoint& p : run.table) CHECK(p.uhp_poles.size() == 1);
  CHECK(run.fit.exponent < 0.0);

  ScalingOptions bad;
  bad.window_min = 0.9;
  CHECK_THROWS_AS(scaling_experiment(sp(0.0, 0.05), bad), ValidationError);
}

TEST_CASE("scaling exclusion band drops points too close to threshold") {
  ScalingOptions o;
  o.window_min = critical_gamma(sp(0, 0.05)) + 5e-4;
  o.n_points = 6;
  o.grid = FrequencyGrid::symmetric(5.0, 1001);
  const ScalingRun run = scaling_experiment(sp(0.0, 0.05), o);
  CHECK(run.table.size() == 6);
  CHECK(run.fit.points.size() == 5);
  o.n_points = 5;
  CHECK_THROWS_AS(scaling_experiment(sp(0.0, 0.05), o), FitRefusedError);
}

TEST_CASE("chain pathway reproduces the dimer exponent") {
  ScalingOptions o;
  o.grid = FrequencyGrid::symmetric(5.0, 2001);
  o.n_points = 9;
  const ScalingRun a = scaling_experiment(sp(0.0, 0.05), o);
  const ChainModel unit = ChainModel::from_dimer(sp(1.0, 0.05));
  const double gc = chain_critical_gamma(unit, 0.0, 4.0);
  const ScalingRun b = scaling_scan([&](double g) { return Model{scale_gain_loss(unit, g)}; }, gc, o);
  CHECK(b.fit.exponent == Approx(a.fit.exponent).epsilon(1e-3));
}

TEST_CASE("pole fit round trips") {
  auto g = testing::rng(61);
  const FrequencyGrid grid = FrequencyGrid::symmetric(40.0, 16001);
  for (int t = 0; t < 20; ++t) {
    const cplx z0{testing::uniform(g, -2, 2), testing::uniform(g, 0.05, 2.0)};
    const cplx rho = std::polar(testing::uniform(g, 1e-3, 1.0), testing::uniform(g, -3.14159, 3.14159));
    const PoleFitResult f = fit_uhp_pole(lorentzian_residual(rho, z0, grid), grid);
    CHECK(f.converged);
    CHECK(std::abs(f.location - z0) < 0.02 * std::abs(z0));
    CHECK(std::abs(f.residue - rho) < 0.02 * std::abs(rho));
  }
}

TEST_CASE("pole fit on a broken dimer") {
  const DimerParams p = sp(1.5, 0.1);
  const auto ps = select_uhp(poles(Model{p}));
  const FrequencyGrid grid = FrequencyGrid::symmetric(40.0, 16001);
  const PoleFitResult f = fit_uhp_pole(residue_correction(ps, grid), grid);
  CHECK(std::abs(f.location - ps[0].location) < 0.02 * std::abs(ps[0].location));
  CHECK(std::abs(f.residue - ps[0].residue) < 0.02 * std::abs(ps[0].residue));
}

TEST_CASE("pole fit refuses a flat residual") {
  const FrequencyGrid grid = FrequencyGrid::symmetric(5.0, 401);
  const std::vector<double> zeros(401, 0.0);
  CHECK_THROWS_AS(fit_uhp_pole(zeros, grid), NotDetectableError);
  CHECK_THROWS_AS(fit_uhp_pole(std::vector<double>(3, 1.0), grid), ValidationError);
}

TEST_CASE("pole fit picks the dominant of two poles") {
  const FrequencyGrid grid = FrequencyGrid::symmetric(40.0, 16001);
  const cplx za{-3.0, 0.1}, zb{3.0, 0.3};
  const cplx ra{0.0, -0.2}, rb{0.0, -0.05};
  auto y = lorentzian_residual(ra, za, grid);
  const auto yb = lorentzian_residual(rb, zb, grid);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += yb[i];
  const PoleFitResult f = fit_uhp_pole(y, grid);
  CHECK(std::abs(f.location - za) < 0.05 * std::abs(za));
  CHECK(std::abs(f.residue - ra) < 0.05 * std::abs(ra));
  CHECK(f.rms_misfit > 0.0);
}

TEST_CASE("SSH chain") {
  SshOptions o;
  o.scan.grid = FrequencyGrid::symmetric(5.0, 2001);
  const SshRun run = ssh_experiment(o);
  CHECK(run.gamma_c == Approx(0.772995).epsilon(1e-4));
  REQUIRE(run.fit.has_value());
  CHECK(run.fit->r_squared < 0.5);
  CHECK_FALSE(run.monotonic);
}

TEST_CASE("SSH scan entirely below threshold refuses the fit") {
  SshOptions o;
  o.scan.grid = FrequencyGrid::symmetric(5.0, 1001);
  o.scan.window_min = 0.2;
  o.scan.window_max = 0.7;
  o.scan.n_points = 7;
  const SshRun run = ssh_experiment(o);
  CHECK_FALSE(run.fit.has_value());
  CHECK(run.refusal.find("refused") != std::string::npos);
  for (const ScalingPoint& p : run.table) CHECK(p.uhp_poles.empty());
}

TEST_CASE("SSH chain rejects a broken PT profile") {
  SshOptions o;
  o.profile = {-1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(ssh_experiment(o), ValidationError);
}

}
