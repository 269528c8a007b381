#include <gtest/gtest.h>

#include <random>

#include "dirscat/dirac.hpp"

using namespace dirscat;

TEST(DiracMatrices, AnticommuteAndSquareToIdentity) {
  const auto& d = DiracMatrices::standard();
  const Mat4 id = Mat4::Identity();
  for (int j = 0; j < 3; ++j) {
    EXPECT_LT(spectral_norm(d.alpha[j] * d.alpha[j] - id), 1e-15);
    EXPECT_LT(spectral_norm(d.alpha[j] * d.beta + d.beta * d.alpha[j]), 1e-15);
    for (int k = j + 1; k < 3; ++k)
      EXPECT_LT(spectral_norm(d.alpha[j] * d.alpha[k] + d.alpha[k] * d.alpha[j]), 1e-15);
  }
  EXPECT_LT(spectral_norm(d.beta * d.beta - id), 1e-15);
}

TEST(DiracMatrices, MatrixFreeHamiltonianAgrees) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 50; ++i) {
    const Vec3 xi{nd(rng), nd(rng), nd(rng)};
    std::array<cplx, 4> v{};
    Spinor4 ve;
    for (int c = 0; c < 4; ++c) ve(c) = v[c] = cplx(nd(rng), nd(rng));
    const auto hv = apply_hamiltonian(xi, v);
    const Spinor4 he = hamiltonian_symbol(xi) * ve;
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(std::abs(hv[c] - he(c)), 0.0, 1e-14);
  }
}

TEST(Identities, HoldOverRandomFrequencies) {
  const IdentityReport r = check_identities(1000, 100.0);
  EXPECT_LT(r.max_deviation(), 1e-12);
  EXPECT_EQ(r.samples, 1000);
}

TEST(Projection, RankTwoWithEigenvaluePlusMinusJapanese) {
  const Vec3 xi{0.3, -1.2, 2.0};
  for (Sign s : both_signs) {
    const Mat4 p = projection_symbol(xi, s);
    EXPECT_NEAR(p.trace().real(), 2.0, 1e-14);
    EXPECT_LT(spectral_norm(hamiltonian_symbol(xi) * p - value(s) * japanese(xi) * p), 1e-13);
  }
}

TEST(Projection, FieldProjectionsAreComplementaryIdempotents) {
  auto g = make_grid(8, 6.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  SpinorField f(g, Representation::physical);
  for (auto& v : f.raw()) v = cplx(nd(rng), nd(rng));
  const SpinorField p = project(f, Sign::plus);
  const SpinorField m = project(f, Sign::minus);
  EXPECT_EQ(p.representation(), Representation::physical);
  EXPECT_LT(max_abs_difference(linear_combination(1.0, p, 1.0, m), f), 1e-12);
  EXPECT_LT(max_abs_difference(project(p, Sign::plus), p), 1e-12);
  EXPECT_LT(max_abs(project(p, Sign::minus)), 1e-12);
}

TEST(NullStructure, ExactAtCoincidentFrequencies) {
  const Vec3 xi{1.0, 2.0, -0.5};
  EXPECT_LT(null_product_norm(xi, {0.0, 0.0, 0.0}, Sign::plus), 1e-15);
  EXPECT_LT(null_product_norm(xi, {0.0, 0.0, 0.0}, Sign::minus), 1e-15);
}

TEST(NullStructure, WorkedExamplesWithinFrozenConstant) {
  // Parallel offset: the product is second order in the angle and tiny.
  const Vec3 xi{10.0, 0.0, 0.0};
  const double par = null_product_norm(xi, {0.1, 0.0, 0.0}, Sign::plus);
  EXPECT_NEAR(par, 5e-4, 5e-5);
  EXPECT_NEAR(null_product_bound(xi, {0.1, 0.0, 0.0}), 0.1 / japanese({9.9, 0.0, 0.0}), 1e-15);
  // Transverse offset approaches half the bound.
  const Vec3 eta{0.0, 0.05, 0.0};
  const double tr = null_product_norm(xi, eta, Sign::plus);
  EXPECT_NEAR(tr, 2.49e-3, 1e-5);
  EXPECT_LE(tr, 0.51 * null_product_bound(xi, eta));
}

TEST(NullStructure, ScanIsDeterministicAndBounded) {
  const NullScanReport a = scan_null_structure(10000, 0.51, 7);
  const NullScanReport b = scan_null_structure(10000, 0.51, 7);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_EQ(a.violations, 0);
  EXPECT_GT(a.max_ratio, 0.45);
  EXPECT_EQ(a.samples, 10000);
}

TEST(ProjectionDerivatives, FirstOrderAtOriginIsHalfAlpha) {
  // d_j Pi_+(0) = alpha_j / 2, each of unit 2-norm / 2.
  EXPECT_NEAR(projection_derivative_norm({0.0, 0.0, 0.0}, Sign::plus, 1), std::sqrt(0.75), 1e-7);
  EXPECT_THROW(projection_derivative_norm({0.0, 0.0, 0.0}, Sign::plus, 3), std::invalid_argument);
}

TEST(ProjectionDerivatives, DecayLikeInverseJapanese) {
  const double a = projection_derivative_norm({10.0, 0.0, 0.0}, Sign::plus, 1);
  const double b = projection_derivative_norm({100.0, 0.0, 0.0}, Sign::plus, 1);
  EXPECT_NEAR(a / b, japanese({100.0, 0.0, 0.0}) / japanese({10.0, 0.0, 0.0}), 0.05 * a / b);
}
