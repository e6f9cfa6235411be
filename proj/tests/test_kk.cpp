#include "doctest.h"

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "ptkk/errors.hpp"
#include "ptkk/kk.hpp"

using namespace ptkk;
using doctest::Approx;

namespace {

DimerParams sp(double g, double gx) { return {g, 1.0, gx, Convention::single_port}; }

// 2 / (w - i): one UHP pole with residue 2
RationalResponse anticausal_toy() {
  RationalResponse r;
  r.numerator = Polynomial{2.0};
  r.denominator = Polynomial{cplx{0, -1}, 1.0};
  r.offset = 0.0;
  return r;
}

}  // namespace

TEST_SUITE("kk_numerics") {

TEST_CASE("grid construction") {
  const FrequencyGrid g = FrequencyGrid::symmetric(5.0, 11);
  CHECK(g.spacing() == Approx(1.0));
  CHECK(g.at(5) == 0.0);
  CHECK_THROWS_AS(FrequencyGrid::symmetric(5.0, 10), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid::symmetric(-1.0, 11), ValidationError);
}

TEST_CASE("transform of zero is zero") {
  const FrequencyGrid g = FrequencyGrid::symmetric(5.0, 101);
  const std::vector<double> zeros(101, 0.0);
  for (double v : hilbert_transform(zeros, g)) CHECK(v == 0.0);
  HilbertOptions none;
  none.tail = TailModel::none;
  for (double v : hilbert_transform(zeros, g, none)) CHECK(v == 0.0);
}

TEST_CASE("UHP pole violates KK with the residue-predicted sign") {
  const FrequencyGrid g = FrequencyGrid::symmetric(40.0, 16001);
  const SampledResponse s = SampledResponse::sample(anticausal_toy(), g);
  const std::size_t i2 = 8000 + 400;
  REQUIRE(g.at(i2) == Approx(2.0));
  CHECK(s.values[i2].real() == Approx(0.8).epsilon(1e-12));
  const PoleData pole{cplx{0, 1}, 2.0, false};
  const KKResult k = corrected_kk(s, std::span(&pole, 1));
  CHECK(k.hilbert[i2] == Approx(-0.8).epsilon(1e-3));
  CHECK(k.standard_residual[i2] == Approx(1.6).epsilon(1e-3));
  CHECK(k.correction[i2] == Approx(1.6).epsilon(1e-12));
  CHECK(std::abs(k.corrected_residual[i2]) < 1e-3);
}

TEST_CASE("correction at the reference point") {
  const auto ps = select_uhp(poles(Model{sp(1.5, 0.1)}));
  REQUIRE(ps.size() == 1);
  const FrequencyGrid g = FrequencyGrid::symmetric(5.0, 4001);
  const auto c = residue_correction(ps, g);
  CHECK(c[2000] == Approx(0.0288).epsilon(1e-2));
  const cplx exact = 2.0 * ps[0].residue / (0.0 - ps[0].location);
  CHECK(c[2000] == Approx(exact.real()).epsilon(1e-14));
}

TEST_CASE("correction refuses poles off the UHP") {
  const FrequencyGrid g = FrequencyGrid::symmetric(5.0, 101);
  const PoleData lower{cplx{0, -1}, 1.0, false};
  const PoleData axis{cplx{1, 0}, 1.0, false};
  CHECK_THROWS_AS(residue_correction(std::span(&lower, 1), g), BoundaryError);
  CHECK_THROWS_AS(residue_correction(std::span(&axis, 1), g), BoundaryError);
  CHECK_THROWS_AS(select_uhp(std::span(&axis, 1)), BoundaryError);
  const PoleData ep{cplx{0, 0.5}, cplx{NAN, NAN}, true};
  CHECK_THROWS_AS(select_uhp(std::span(&ep, 1)), DegenerateError);
}

TEST_CASE("offset must be removed") {
  const SampledResponse s = SampledResponse::sample(reflection_response(sp(0.5, 0.1)),
                                                    FrequencyGrid::symmetric(5.0, 101), false);
  CHECK_THROWS_AS(standard_kk(s), ValidationError);
}

TEST_CASE("reference reduction factor") {
  const DimerParams p = sp(1.5, 0.1);
  const auto ps = select_uhp(poles(Model{p}));
  const SampledResponse s = SampledResponse::sample(reflection_response(p), FrequencyGrid{});
  const KKResult k = corrected_kk(s, ps);
  CHECK(k.reduction_factor >= 20.0);
  CHECK(k.l2_corrected < k.l2_standard);
}

TEST_CASE("Hilbert transform applied twice negates a Gaussian") {
  const FrequencyGrid g = FrequencyGrid::symmetric(20.0, 4001);
  std::vector<double> f(g.n_points);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g.at(i) * g.at(i));
  const auto hh = hilbert_transform(hilbert_transform(f, g), g);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += (hh[i] + f[i]) * (hh[i] + f[i]);
    den += f[i] * f[i];
  }
  CHECK(std::sqrt(num / den) < 0.01);
}

TEST_CASE("Hilbert transform of a Lorentzian matches the closed form") {
  // H[1/(1+w^2)] = -w/(1+w^2) with this kernel orientation
  const FrequencyGrid g = FrequencyGrid::symmetric(40.0, 16001);
  std::vector<double> f(g.n_points);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 / (1.0 + g.at(i) * g.at(i));
  const auto h = hilbert_transform(f, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); i += 50) worst = std::max(worst, std::abs(h[i] + g.at(i) * f[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("threads do not change the output") {
  const SampledResponse s = SampledResponse::sample(reflection_response(sp(1.5, 0.1)), FrequencyGrid{});
  HilbertOptions one;
  HilbertOptions four;
  four.threads = 4;
  CHECK(hilbert_transform(s.imag_part(), s.grid, one) == hilbert_transform(s.imag_part(), s.grid, four));
}

TEST_CASE("taper option") {
  const SampledResponse s = SampledResponse::sample(reflection_response(sp(0.5, 0.1)), FrequencyGrid{});
  HilbertOptions t;
  t.taper_fraction = 0.1;
  const auto a = hilbert_transform(s.imag_part(), s.grid);
  const auto b = hilbert_transform(s.imag_part(), s.grid, t);
  CHECK(a != b);
  CHECK(b[2000] == Approx(a[2000]).epsilon(0.05));
  t.taper_fraction = 1.0;
  CHECK_THROWS_AS(hilbert_transform(s.imag_part(), s.grid, t), ValidationError);
}

TEST_CASE("tail model dominates the truncation error") {
  const DimerParams p = sp(1.5, 0.1);
  const auto ps = select_uhp(poles(Model{p}));
  const SampledResponse s = SampledResponse::sample(reflection_response(p), FrequencyGrid{});
  HilbertOptions none;
  none.tail = TailModel::none;
  CHECK(corrected_kk(s, ps, none).reduction_factor < corrected_kk(s, ps).reduction_factor);
}

TEST_CASE("property: causal responses sit at the causal floor") {
  auto g = testing::rng(41);
  const FrequencyGrid grid{};
  for (int t = 0; t < 100; ++t) {
    const DimerParams c{0.0, 1.0, testing::uniform(g, 0.05, 0.5),
                        t % 2 ? Convention::symmetric : Convention::single_port};
    DimerParams p = c;
    p.gamma = testing::uniform(g, 0.0, 0.8 * critical_gamma(c));
    const double floor = standard_kk(SampledResponse::sample(reflection_response(c), grid)).l2_standard;
    const double l2 = standard_kk(SampledResponse::sample(reflection_response(p), grid)).l2_standard;
    CHECK(l2 <= 5.0 * floor);
  }
}

TEST_CASE("property: residue correction removes the violation") {
  auto g = testing::rng(43);
  const FrequencyGrid grid{};
  for (int t = 0; t < 100; ++t) {
    DimerParams p{0.0, 1.0, testing::uniform(g, 0.05, 0.5),
                  t % 2 ? Convention::symmetric : Convention::single_port};
    p.gamma = critical_gamma(p) + testing::uniform(g, 0.02, 0.5);
    const auto ps = select_uhp(poles(Model{p}));
    const SampledResponse s = SampledResponse::sample(reflection_response(p), grid);
    CHECK(corrected_kk(s, ps).reduction_factor >= 15.0);
    CHECK(corrected_kk(s, ps, {}, KKRelation::imag_from_real).reduction_factor >= 15.0);
  }
}

TEST_CASE("grid doubling changes the residual by under 1%") {
  const RationalResponse r = reflection_response(sp(1.5, 0.1));
  const double a = standard_kk(SampledResponse::sample(r, FrequencyGrid::symmetric(5.0, 4001))).l2_standard;
  const double b = standard_kk(SampledResponse::sample(r, FrequencyGrid::symmetric(5.0, 8001))).l2_standard;
  CHECK(std::abs(a - b) < 0.01 * b);
}

TEST_CASE("spectrum CSV round trip") {
  const SampledResponse s = SampledResponse::sample(reflection_response(sp(1.5, 0.1)),
                                                    FrequencyGrid::symmetric(5.0, 101));
  std::stringstream io;
  write_spectrum_csv(io, s);
  const SampledResponse back = read_spectrum_csv(io);
  CHECK(back.grid.n_points == 101);
  CHECK(back.grid.half_width == Approx(5.0));
  for (std::size_t i = 0; i < 101; ++i) CHECK(back.values[i] == s.values[i]);
}

TEST_CASE("spectrum CSV errors") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_spectrum_csv(in);
  };
  CHECK_THROWS_WITH_AS(read(""), doctest::Contains("empty"), ValidationError);
  CHECK_THROWS_WITH_AS(read("w,re,im\n"), doctest::Contains("header"), ValidationError);
  CHECK_THROWS_WITH_AS(read("omega,re,im\n-1,0,0\n0,0\n1,0,0\n"), doctest::Contains("fields"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(read("omega,re,im\n-1,0,0\n0,abc,0\n1,0,0\n"), doctest::Contains("malformed CSV"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(read("omega,re,im\n-1,0,0\n0.2,0,0\n1,0,0\n"), doctest::Contains("non-uniform"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(read("omega,re,im\n-1,0,0\n0,0,0\n1,0,0\n2,0,0\n"), doctest::Contains("odd"),
                       ValidationError);
  CHECK_NOTHROW(read("\xEF\xBB\xBFomega,re,im\n-1,0,0\n0,0,0\n1,0,0\n"));
}

}
