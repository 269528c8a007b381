#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dirscat/spectral.hpp"

using namespace dirscat;

namespace {

const double kPi = std::numbers::pi;

ScalarField gaussian(const GridPtr& g, double width = 1.0) {
  ScalarField f(g, Representation::physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec3 x = g->position(i);
    f[i] = std::exp(-dot(x, x) / (2.0 * width * width));
  }
  return f;
}

SpinorField random_spinor(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpinorField f(g, Representation::physical);
  for (auto& v : f.raw()) v = cplx(nd(rng), nd(rng));
  return f;
}

}  // namespace

TEST(Grid, RejectsOddOrTinyAxes) {
  EXPECT_THROW(make_grid(15, 16.0), std::invalid_argument);
  EXPECT_THROW(make_grid(6, 16.0), std::invalid_argument);
  EXPECT_THROW(make_grid(16, 0.0), std::invalid_argument);
}

TEST(Grid, LayoutIsXFastest) {
  auto g = make_grid(8, 8.0);
  EXPECT_EQ(g->index(1, 0, 0), 1u);
  EXPECT_EQ(g->index(0, 1, 0), 8u);
  EXPECT_EQ(g->index(0, 0, 1), 64u);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto [a, b, c] = g->unravel(i);
    EXPECT_EQ(g->index(a, b, c), i);
  }
}

TEST(Grid, WavenumbersFoldAndNegate) {
  auto g = make_grid(16, 2.0 * kPi);  // dk = 1
  EXPECT_DOUBLE_EQ(g->k_axis(1), 1.0);
  EXPECT_DOUBLE_EQ(g->k_axis(15), -1.0);
  EXPECT_DOUBLE_EQ(g->k_axis(8), -8.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    EXPECT_EQ(g->negated(g->negated(i)), i);
    if (!g->on_nyquist_plane(i)) {
      const Vec3 k = g->wavenumber(i), kn = g->wavenumber(g->negated(i));
      EXPECT_DOUBLE_EQ(k[0], -kn[0]);
      EXPECT_DOUBLE_EQ(k[2], -kn[2]);
    }
  }
}

TEST(Transform, PlaneWaveLandsOnOneModeWithWeightL3) {
  auto g = make_grid(16, 10.0);
  const std::array<int, 3> m{1, 2, -3};
  ScalarField f(g, Representation::physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec3 x = g->raw_position(i);
    const double ph = g->dk() * (m[0] * x[0] + m[1] * x[1] + m[2] * x[2]);
    f[i] = cplx(std::cos(ph), std::sin(ph));
  }
  f.to_spectral();
  const std::size_t target = g->index(g->index_of_mode(m[0]), g->index_of_mode(m[1]), g->index_of_mode(m[2]));
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double expect = i == target ? g->box_volume() : 0.0;
    EXPECT_NEAR(std::abs(f[i]), expect, 1e-10 * g->box_volume());
  }
}

TEST(Transform, RoundTripAndParseval) {
  auto g = make_grid(16, 7.0);
  const SpinorField f = random_spinor(g, 3);
  const SpinorField s = transformed(f, Representation::spectral);
  EXPECT_NEAR(s.l2_norm(), f.l2_norm(), 1e-12 * f.l2_norm());
  const SpinorField back = transformed(s, Representation::physical);
  EXPECT_LT(max_abs_difference(back, f), 1e-13 * max_abs(f));
}

TEST(LittlewoodPaley, DyadicPiecesSumToOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lr(std::log(1e-4), std::log(1e4));
  for (int i = 0; i < 2000; ++i) {
    const Vec3 xi{std::exp(lr(rng)), 0.0, 0.0};
    double sum = 0.0;
    for (int j = -20; j <= 20; ++j) sum += bump::rho_dyadic(xi, std::ldexp(1.0, j));
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(LittlewoodPaley, AnnulusSupportAndLowPassIdentity) {
  for (double r = 0.01; r < 10.0; r *= 1.07) {
    const Vec3 xi{0.0, r, 0.0};
    const double n = 1.0;
    if (r < 0.5 * n || r > 2.0 * n) {
      EXPECT_EQ(bump::rho_dyadic(xi, n), 0.0);
    }
    double high = 0.0;
    for (int j = 1; j <= 30; ++j) high += bump::rho_dyadic(xi, std::ldexp(n, j));
    EXPECT_NEAR(bump::rho_low(xi, n) + high, 1.0, 1e-14);
  }
}

TEST(LittlewoodPaley, ProjectionsPartitionAField) {
  auto g = make_grid(16, 8.0);
  const SpinorField f = transformed(random_spinor(g, 9), Representation::spectral);
  SpinorField sum = low_pass(f, Dyadic{-3});
  for (int j = -2; j <= g->max_dyadic_exponent(); ++j) sum = linear_combination(1.0, sum, 1.0, littlewood_paley(f, Dyadic{j}));
  EXPECT_LT(max_abs_difference(sum, f), 1e-12 * max_abs(f));
}

TEST(Norms, SobolevNormOfGaussianMatchesClosedForm) {
  // f = e^{-|x|^2/2}: ||<D> f||^2 = int (1+|xi|^2) e^{-|xi|^2} dxi = 5 pi^{3/2} / 2.
  auto g = make_grid(48, 20.0);
  const ScalarField f = gaussian(g);
  EXPECT_NEAR(sobolev_norm(f, 1.0), std::sqrt(2.5 * std::pow(kPi, 1.5)), 1e-10);
  EXPECT_NEAR(sobolev_norm(f, 0.0), std::pow(kPi, 0.75), 1e-10);
}

TEST(Norms, WeightedGaussianMatchesRadialQuadrature) {
  // ||<x> f||_{L^2}^2 = 4 pi int (r^2 + r^4) e^{-r^2} dr = 5 pi^{3/2} / 2.
  auto g = make_grid(48, 20.0);
  const ScalarField f = gaussian(g);
  EXPECT_NEAR(weighted_norm(f, 1, 0.0), std::sqrt(2.5 * std::pow(kPi, 1.5)), 1e-9);
}

TEST(Norms, WkInfOfPlaneWave) {
  auto g = make_grid(16, 2.0 * kPi);
  ScalarField f(g, Representation::physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double ph = g->raw_position(i)[0];
    f[i] = cplx(std::cos(ph), std::sin(ph));
  }
  // d_x e^{ix} has sup 1, the other first derivatives vanish.
  EXPECT_NEAR(w_k_inf_norm(f, 1), 2.0, 1e-12);
  EXPECT_NEAR(w_k_inf_norm(f, 2), 3.0, 1e-12);
}

TEST(Derivatives, GaussianGradient) {
  auto g = make_grid(64, 24.0);
  const ScalarField f = gaussian(g);
  const ScalarField dx = spectral_derivative(transformed(f, Representation::spectral), {1, 0, 0});
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(dx[i] + g->position(i)[0] * f[i]));
  EXPECT_LT(err, 1e-10);
}

TEST(Multiplier, NonFiniteSymbolIsReported) {
  auto g = make_grid(8, 8.0);
  const ScalarField f = gaussian(g);
  EXPECT_THROW(apply_multiplier(f, [](const Vec3& xi) { return cplx{1.0 / norm(xi), 0.0}; }), std::domain_error);
}

TEST(Multiplier, KeepsInputRepresentation) {
  auto g = make_grid(8, 8.0);
  const ScalarField f = gaussian(g);
  const ScalarField h = apply_multiplier(f, [](const Vec3&) { return cplx{2.0, 0.0}; });
  EXPECT_EQ(h.representation(), Representation::physical);
  EXPECT_LT(max_abs_difference(h, linear_combination(2.0, f, 0.0, f)), 1e-14);
}
