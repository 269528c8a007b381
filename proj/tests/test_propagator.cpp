#include <gtest/gtest.h>

#include <random>

#include "dirscat/integrator.hpp"

using namespace dirscat;

namespace {

SpinorField packet(const GridPtr& g, BranchContent b = BranchContent::both) {
  InitialData d;
  d.width = 1.2;
  d.k0 = {0.4, -0.2, 0.1};
  d.spinor = {cplx(1, 0), cplx(0, 0.5), cplx(0.3, 0), cplx(0, 0)};
  d.branch = b;
  return make_initial_data(g, d);
}

}  // namespace

TEST(FreeDirac, PlaneWaveEigenstateRotatesByJapanese) {
  auto g = make_grid(8, 2.0 * std::numbers::pi);
  const Vec3 k{1.0, 2.0, 0.0};
  // Positive-energy eigenvector: Pi_+(k) e_0, normalized.
  const Spinor4 v = projection_symbol(k, Sign::plus).col(0).normalized();
  SpinorField f(g, Representation::physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double ph = dot(k, g->raw_position(i));
    for (int c = 0; c < 4; ++c) f.at(c, i) = cplx(std::cos(ph), std::sin(ph)) * v(c);
  }
  const double t = 3.7;
  const SpinorField u = free_dirac(f, t);
  const cplx rot = std::exp(cplx(0.0, -t * japanese(k)));
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i)
    for (int c = 0; c < 4; ++c) err = std::max(err, std::abs(u.at(c, i) - rot * f.at(c, i)));
  EXPECT_LT(err, 1e-12);
}

TEST(FreeDirac, UnitaryAndGroupProperty) {
  auto g = make_grid(16, 16.0);
  const SpinorField f = packet(g);
  const SpinorField a = free_dirac(free_dirac(f, 1.3), 2.1);
  const SpinorField b = free_dirac(f, 3.4);
  EXPECT_NEAR(b.l2_norm(), f.l2_norm(), 1e-13 * f.l2_norm());
  EXPECT_LT(max_abs_difference(a, b), 1e-13);
  EXPECT_LT(max_abs_difference(free_dirac(b, -3.4), f), 1e-13);
}

TEST(FreeDirac, SatisfiesTheEquation) {
  auto g = make_grid(16, 16.0);
  const SpinorField f = packet(g);
  // Centered differences leave an O(dt^2 <xi>^3) residual.
  EXPECT_LT(dirac_residual(f, 0.7, 1e-3) / f.l2_norm(), 1e-5);
}

TEST(FreeDirac, ProjectedDataFollowsHalfKleinGordon) {
  auto g = make_grid(16, 16.0);
  for (Sign s : both_signs) {
    const SpinorField f = project(packet(g), s);
    EXPECT_LT(max_abs_difference(free_dirac(f, 2.5), half_kg_propagate(f, 2.5, s)), 1e-13);
  }
}

TEST(FreeDirac, NonFiniteTimeRejected) {
  auto g = make_grid(8, 8.0);
  EXPECT_THROW(free_dirac(packet(g), std::nan("")), std::invalid_argument);
}

TEST(DecayScan, RefusesTimesPastTheWrapAroundHorizon) {
  auto g = make_grid(16, 16.0);
  EXPECT_THROW(decay_scan(packet(g), {1.0, 9.0}), std::invalid_argument);
  EXPECT_NO_THROW(decay_scan(packet(g), {1.0, 8.0}));
}

TEST(DecayScan, SupDecaysAndL2IsConserved) {
  auto g = make_grid(32, 32.0);
  const SpinorField f = packet(g);
  const auto s = decay_scan(f, {2.0, 4.0, 8.0, 12.0});
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i].sup, s[i - 1].sup);
  for (const auto& r : s) EXPECT_NEAR(r.l2, f.l2_norm(), 1e-12 * f.l2_norm());
}
