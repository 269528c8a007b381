#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dirscat/scattering.hpp"

using namespace dirscat;

namespace {

const double kPi = std::numbers::pi;

SpinorField gaussian_data(const GridPtr& g, double width, BranchContent b, Vec3 k0 = {0.0, 0.0, 0.0}) {
  InitialData d;
  d.width = width;
  d.branch = b;
  d.k0 = k0;
  return make_initial_data(g, d);
}

// K_+(0) + K_-(0) for unprojected data eps e^{-|x|^2/2w^2} e_0:
// c1 eps^2 w^6 4 pi int sigma <sigma> e^{-w^2 sigma^2} d sigma.
double origin_kernel_oracle(double c1, double eps, double w) {
  const int n = 100000;
  const double top = 12.0 / w;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * top / n;
    acc += s * std::sqrt(1.0 + s * s) * std::exp(-w * w * s * s);
  }
  return c1 * eps * eps * std::pow(w, 6) * 4.0 * kPi * acc * top / n;
}

struct Branches {
  SpinorField plus, minus;
};

Branches split(const SpinorField& psi) {
  const SpinorField s = transformed(psi, Representation::spectral);
  return {project(s, Sign::plus), project(s, Sign::minus)};
}

}  // namespace

TEST(Kernel, VelocityGridMatchesRadialOracleAtOrigin) {
  auto g = make_grid(64, 64.0);
  const Branches b = split(gaussian_data(g, 3.0, BranchContent::both));
  const KernelIntegral k = VelocityGridKernel(64).evaluate(b.plus, b.minus, 1.0, KernelSign::theorem_minus, {0});
  EXPECT_NEAR(k.k_plus[0] + k.k_minus[0], origin_kernel_oracle(1.0, 0.05, 3.0), 5e-3 * origin_kernel_oracle(1.0, 0.05, 3.0));
}

TEST(Kernel, LatticeSumApproachesOracleWhenWellResolved) {
  auto g = make_grid(64, 64.0);
  const Branches b = split(gaussian_data(g, 1.0, BranchContent::both));
  const KernelIntegral k = kernel_integral(b.plus, b.minus, 1.0, KernelSign::theorem_minus, {0});
  const double oracle = origin_kernel_oracle(1.0, 0.05, 1.0);
  EXPECT_NEAR(k.k_plus[0] + k.k_minus[0], oracle, 1e-2 * oracle);
}

TEST(Kernel, LinearInCoupling) {
  auto g = make_grid(16, 16.0);
  const Branches b = split(gaussian_data(g, 1.0, BranchContent::both));
  const auto k1 = kernel_integral(b.plus, b.minus, 1.0, KernelSign::theorem_minus, {0, 5, 17});
  const auto k2 = kernel_integral(b.plus, b.minus, 2.5, KernelSign::theorem_minus, {0, 5, 17});
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(k2.k_plus[j], 2.5 * k1.k_plus[j], 1e-14 * k2.k_plus[j]);
}

TEST(Kernel, SignVariantsAreMirrorImages) {
  // Flipping the sigma-velocity orientation is the same as evaluating at -xi.
  auto g = make_grid(16, 16.0);
  const Branches b = split(gaussian_data(g, 1.0, BranchContent::plus, {0.5, 0.0, 0.0}));
  const std::size_t node = g->index(2, 1, 0);
  const auto th = kernel_integral(b.plus, b.minus, 1.0, KernelSign::theorem_minus, {node});
  const auto s6 = kernel_integral(b.plus, b.minus, 1.0, KernelSign::section6_plus, {g->negated(node)});
  EXPECT_NEAR(th.k_plus[0], s6.k_plus[0], 1e-13 * th.k_plus[0]);
  const auto th_same = kernel_integral(b.plus, b.minus, 1.0, KernelSign::theorem_minus, {g->negated(node)});
  EXPECT_GT(std::abs(th_same.k_plus[0] - th.k_plus[0]), 1e-3 * th.k_plus[0]);
}

TEST(Kernel, MethodsAgreeAwayFromOrigin) {
  auto g = make_grid(32, 32.0);
  const Branches b = split(gaussian_data(g, 1.0, BranchContent::plus, {0.3, 0.0, 0.0}));
  const std::vector<std::size_t> nodes{g->index(1, 0, 0), g->index(0, 2, 1)};
  const auto d = kernel_integral(b.plus, b.minus, 1.0, KernelSign::theorem_minus, nodes);
  const auto v = VelocityGridKernel(48).evaluate(b.plus, b.minus, 1.0, KernelSign::theorem_minus, nodes);
  for (std::size_t j = 0; j < nodes.size(); ++j) EXPECT_NEAR(v.k_plus[j], d.k_plus[j], 0.03 * d.k_plus[j]);
}

TEST(TimeWeights, MatchClosedFormsAtTheOrigin) {
  // At xi = 0 the cutoff is 1: W0 + W1 = asinh(s1) - asinh(s0) and
  // W1 = [<s> - s0 asinh(s)]_{s0}^{s1} / (s1 - s0).
  for (auto [s0, s1] : {std::pair{0.0, 1.0}, std::pair{3.0, 4.5}, std::pair{10.0, 32.0}}) {
    const auto w = interval_weights(s0, s1, 0.0, 0.01);
    EXPECT_NEAR(w[0] + w[1], std::asinh(s1) - std::asinh(s0), 1e-12);
    const double w1 = (std::sqrt(1 + s1 * s1) - std::sqrt(1 + s0 * s0) - s0 * (std::asinh(s1) - std::asinh(s0))) / (s1 - s0);
    EXPECT_NEAR(w[1], w1, 1e-12);
  }
}

TEST(TimeWeights, CutoffAndSupport) {
  EXPECT_EQ(time_cutoff(0.0, 0.0, 0.01), 1.0);
  EXPECT_EQ(time_cutoff(0.0, 0.1, 0.01), 0.0);
  EXPECT_EQ(time_cutoff(5.0, 3.0, 0.01), 0.0);
  EXPECT_EQ(time_cutoff(5.0, 0.5, 0.01), 1.0);
  auto g = make_grid(16, 16.0);
  const double radius = 2.0 * std::pow(32.0, 0.01);
  for (std::size_t i : cutoff_support(*g, 32.0, 0.01)) EXPECT_LT(norm(g->wavenumber(i)), radius);
}

TEST(PhaseAccumulator, MatchesSummedIncrements) {
  auto g = make_grid(16, 16.0);
  const SpinorField psi0 = gaussian_data(g, 1.0, BranchContent::both, {0.2, 0.0, 0.0});
  const std::vector<double> times{0.0, 1.0, 2.5};
  PhaseConventions conv;
  PhaseAccumulator acc(g, 1.0, conv, 2.5);
  std::vector<SpinorField> states;
  for (double t : times) {
    states.push_back(free_dirac(psi0, t));
    acc.observe(t, states.back());
  }
  const PhaseTable a = phase_correction_increment(states[0], states[1], 0.0, 1.0, 1.0, conv);
  const PhaseTable b = phase_correction_increment(states[1], states[2], 1.0, 1.5, 1.0, conv);
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    scale = std::max(scale, std::abs(acc.table().b(i)));
    err = std::max(err, std::abs(acc.table().b(i) - a.b(i) - b.b(i)));
  }
  EXPECT_GT(scale, 0.0);
  EXPECT_LT(err, 1e-12 * scale);
  EXPECT_DOUBLE_EQ(acc.table().time, 2.5);
}

TEST(PhaseAccumulator, RejectsBadSnapshotOrder) {
  auto g = make_grid(8, 8.0);
  const SpinorField psi = gaussian_data(g, 1.0, BranchContent::plus);
  PhaseConventions conv;
  PhaseAccumulator acc(g, 1.0, conv, 4.0);
  acc.observe(0.0, psi);
  EXPECT_THROW(acc.observe(0.0, psi), std::invalid_argument);
  EXPECT_THROW(acc.observe(5.0, psi), std::invalid_argument);
  conv.profile_time = ProfileTime::frozen;
  PhaseAccumulator frozen(g, 1.0, conv, 4.0);
  EXPECT_THROW(frozen.observe(1.0, psi), std::invalid_argument);
}

TEST(CorrectedProfile, AppliesPhaseWithConfiguredSign) {
  auto g = make_grid(8, 8.0);
  const SpinorField psi = gaussian_data(g, 1.0, BranchContent::both);
  PhaseTable table(g, PhaseConventions{});
  table.time = 2.0;
  const std::size_t node = g->index(1, 2, 0);
  table.b_plus[node] = 0.3;
  table.b_minus[node] = 0.1;
  for (Sign theta : both_signs) {
    const ProfileSnapshot snap = interaction_profile(psi, 2.0, theta);
    const std::size_t where = theta == Sign::plus ? node : g->negated(node);
    const SpinorField dyn = corrected_profile(snap, table);
    const SpinorField lit = corrected_profile(snap, table, CorrectionSign::literal);
    for (int c = 0; c < 4; ++c) {
      EXPECT_LT(std::abs(dyn.at(c, where) - std::exp(cplx(0.0, -0.4)) * snap.profile.at(c, where)), 1e-15);
      EXPECT_LT(std::abs(lit.at(c, where) - std::exp(cplx(0.0, 0.4)) * snap.profile.at(c, where)), 1e-15);
    }
  }
  ProfileSnapshot late = interaction_profile(psi, 3.0, Sign::plus);
  EXPECT_THROW(corrected_profile(late, table), std::invalid_argument);
}

TEST(DriftMetric, WeightedSupOfDifference) {
  auto g = make_grid(8, 8.0);
  SpinorField a(g, Representation::spectral), b(g, Representation::spectral);
  const std::size_t node = g->index(1, 0, 0);
  a.at(0, node) = 1.0;
  b.at(0, node) = cplx(0.0, 1.0);
  const double w = std::pow(g->jp(node), 4.0);
  EXPECT_NEAR(drift_metric(a, b, 4.0), w * std::sqrt(2.0), 1e-12 * w);
  EXPECT_NEAR(drift_metric(a, b, 4.0, true), 0.0, 1e-12);
  EXPECT_EQ(drift_metric(a, a, 10.0), 0.0);
}

TEST(PhaseSeries, RecoversAnImposedLogPhase) {
  auto g = make_grid(16, 16.0);
  const SpinorField psi0 = gaussian_data(g, 1.0, BranchContent::plus, {0.3, 0.0, 0.0});
  const double c = 0.37;
  std::optional<PhaseSeries> series;
  SpinorField last;
  for (double t = 1.0; t <= 8.0; t += 0.5) {
    SpinorField psi = free_dirac(psi0, t);
    psi.scale(std::exp(cplx(0.0, c * std::log(t))));
    if (!series) {
      const SpinorField f = interaction_profile_field(psi, t, Sign::plus);
      series.emplace(spectral_peak(f), spectral_peak(f), Sign::plus);
    }
    series->observe(t, psi);
    last = psi;
  }
  const LogPhaseSlope s = log_phase_slope(*series, last, 1.0, PhaseConventions{}, 2.0, 8.0);
  EXPECT_NEAR(s.measured, c, 1e-10);
  EXPECT_GT(s.predicted, 0.0);
}

TEST(PhaseSeries, RejectsAmbiguousSteps) {
  auto g = make_grid(8, 8.0);
  SpinorField psi = gaussian_data(g, 1.0, BranchContent::plus);
  PhaseSeries series(0, 0, Sign::plus);
  series.observe(0.0, psi);
  psi.scale(std::exp(cplx(0.0, 2.0)));
  EXPECT_THROW(series.observe(0.0, psi), std::runtime_error);
}

TEST(ScatterAnalysis, LinearFlowHasNoDrift) {
  auto g = make_grid(16, 16.0);
  const SpinorField psi0 = gaussian_data(g, 1.0, BranchContent::plus, {0.3, 0.0, 0.0});
  ScatterOptions opt;
  opt.block_times = {1.0, 2.0, 4.0};
  opt.slope_t_lo = 1.0;
  ScatterAnalysis a(g, 1.0, PhaseConventions{}, 4.0, opt);
  for (double t = 0.0; t <= 4.0; t += 1.0) a.observe(t, free_dirac(psi0, t));
  const ScatterReport r = a.finish();
  ASSERT_EQ(r.uncorrected.size(), 2u);
  for (double d : r.uncorrected) EXPECT_LT(d, 1e-9);
  ASSERT_EQ(r.variants.size(), 2u);
  EXPECT_TRUE(r.has_slope);
  EXPECT_NEAR(r.slope.measured, 0.0, 1e-12);
}

TEST(ScatterAnalysis, MissingBlockSnapshotIsAnError) {
  auto g = make_grid(8, 8.0);
  const SpinorField psi0 = gaussian_data(g, 1.0, BranchContent::plus);
  ScatterOptions opt;
  opt.block_times = {1.0, 2.0};
  ScatterAnalysis a(g, 1.0, PhaseConventions{}, 4.0, opt);
  a.observe(0.0, psi0);
  a.observe(1.0, free_dirac(psi0, 1.0));
  EXPECT_THROW(a.finish(), std::runtime_error);
}
