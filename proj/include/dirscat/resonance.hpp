#pragma once

// Resonance functions, the multiplier m = grad_xi p, and sampled inequality
// scans. Every scan is deterministic in its seed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "dirscat/dirac.hpp"
#include "dirscat/field.hpp"
#include "dirscat/fit.hpp"
#include "dirscat/hartree.hpp"
#include "dirscat/spectral.hpp"

namespace dirscat {

inline Vec3 unit_velocity(const Vec3& xi) { return (1.0 / japanese(xi)) * xi; }

struct ResonanceEval {
  double value = 0.0;
  Vec3 grad_xi{};
  Vec3 grad_eta{};
  Vec3 grad_sigma{};
};

/// p = t0 <xi> - t1 <xi - eta>.
inline ResonanceEval resonance_pair(const Vec3& xi, const Vec3& eta, Sign t0, Sign t1) {
  const double s0 = value(t0), s1 = value(t1);
  const Vec3 d = xi - eta;
  ResonanceEval r;
  r.value = s0 * japanese(xi) - s1 * japanese(d);
  r.grad_xi = s0 * unit_velocity(xi) - s1 * unit_velocity(d);
  r.grad_eta = s1 * unit_velocity(d);
  return r;
}

/// m(xi, eta) = grad_xi p_{(t0,t1)}.
inline Vec3 multiplier_m(const Vec3& xi, const Vec3& eta, Sign t0, Sign t1) {
  return resonance_pair(xi, eta, t0, t1).grad_xi;
}

/// p_Theta = t0<xi> - t1<xi+eta> - t2<xi+sigma> + t3<xi+eta+sigma>.
inline ResonanceEval resonance_four(const Vec3& xi, const Vec3& eta, const Vec3& sigma, const SignTuple& th) {
  const double s0 = value(th[0]), s1 = value(th[1]), s2 = value(th[2]), s3 = value(th[3]);
  const Vec3 a = xi + eta, b = xi + sigma, c = xi + eta + sigma;
  ResonanceEval r;
  r.value = s0 * japanese(xi) - s1 * japanese(a) - s2 * japanese(b) + s3 * japanese(c);
  const Vec3 va = unit_velocity(a), vb = unit_velocity(b), vc = unit_velocity(c);
  r.grad_xi = s0 * unit_velocity(xi) - s1 * va - s2 * vb + s3 * vc;
  r.grad_eta = s3 * vc - s1 * va;
  r.grad_sigma = s3 * vc - s2 * vb;
  return r;
}

/// q_{(t0,t2)} = -eta . (t0 xi/<xi> - t2 (xi+sigma)/<xi+sigma>).
inline double quadratic_part(const Vec3& xi, const Vec3& eta, const Vec3& sigma, Sign t0, Sign t2) {
  const Vec3 m = value(t0) * unit_velocity(xi) - value(t2) * unit_velocity(xi + sigma);
  return -dot(eta, m);
}

namespace detail {

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  while (true) {
    const Vec3 v{nd(rng), nd(rng), nd(rng)};
    const double r = norm(v);
    if (r > 1e-6) return (1.0 / r) * v;
  }
}

inline Vec3 log_uniform_vector(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng)) * random_direction(rng);
}

}  // namespace detail

struct GradientCheckReport {
  int samples = 0;
  double max_relative_error = 0.0;
};

/// Analytic gradients of p_pair and p_Theta against central differences.
inline GradientCheckReport gradient_check(int count, std::uint64_t seed = 11, double h = 1e-5) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bit(0, 1);
  auto sign = [&] { return bit(rng) ? Sign::plus : Sign::minus; };
  GradientCheckReport rep;
  auto compare = [&](const Vec3& analytic, auto&& f, const Vec3& x) {
    double err = 0.0, scale = 1.0;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[static_cast<std::size_t>(a)] += h;
      xm[static_cast<std::size_t>(a)] -= h;
      const double fd = (f(xp) - f(xm)) / (2.0 * h);
      err = std::max(err, std::abs(fd - analytic[static_cast<std::size_t>(a)]));
      scale = std::max(scale, std::abs(analytic[static_cast<std::size_t>(a)]));
    }
    rep.max_relative_error = std::max(rep.max_relative_error, err / scale);
  };
  for (int i = 0; i < count; ++i) {
    const Vec3 xi = detail::log_uniform_vector(rng, 1e-2, 1e2);
    const Vec3 eta = detail::log_uniform_vector(rng, 1e-2, 1e2);
    const Vec3 sigma = detail::log_uniform_vector(rng, 1e-2, 1e2);
    const Sign t0 = sign(), t1 = sign();
    const ResonanceEval pr = resonance_pair(xi, eta, t0, t1);
    compare(pr.grad_xi, [&](const Vec3& x) { return resonance_pair(x, eta, t0, t1).value; }, xi);
    compare(pr.grad_eta, [&](const Vec3& y) { return resonance_pair(xi, y, t0, t1).value; }, eta);
    const SignTuple th{{sign(), sign(), sign(), sign()}};
    const ResonanceEval fr = resonance_four(xi, eta, sigma, th);
    compare(fr.grad_xi, [&](const Vec3& x) { return resonance_four(x, eta, sigma, th).value; }, xi);
    compare(fr.grad_eta, [&](const Vec3& y) { return resonance_four(xi, y, sigma, th).value; }, eta);
    compare(fr.grad_sigma, [&](const Vec3& z) { return resonance_four(xi, eta, z, th).value; }, sigma);
    ++rep.samples;
  }
  return rep;
}

struct MBoundReport {
  int samples = 0;
  int n = 0;
  int m = 0;
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  int zero_eta_rows = 0;
  int zero_eta_nonzero = 0;  ///< eta = 0 rows where m was not exactly 0
};

/// Samples |xi| log-uniform in [xi_lo, xi_hi] and |eta| <= |xi|/8 and reports
/// the range of |grad_xi^n grad_eta^m m| <xi>^{n+1} / |eta|^{1-m} for
/// theta0 = theta1 (n, m in {0, 1}; derivatives by central differences).
/// With `parallel` the eta direction is aligned with xi. Every tenth sample
/// also checks m(xi, 0) = 0 exactly.
inline MBoundReport scan_m_bound(int count, int n, int m, std::uint64_t seed = 13, double xi_lo = 1e-2,
                                 double xi_hi = 1e2, bool parallel = false, Sign theta = Sign::plus) {
  if (n < 0 || n > 1 || m < 0 || m > 1) throw std::invalid_argument("scan_m_bound: derivative orders must be 0 or 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  MBoundReport rep;
  rep.n = n;
  rep.m = m;
  for (int i = 0; i < count; ++i) {
    const Vec3 xi = detail::log_uniform_vector(rng, xi_lo, xi_hi);
    const double er = norm(xi) / 8.0 * std::max(frac(rng), 1e-3);
    const Vec3 eta = er * (parallel ? (1.0 / norm(xi)) * xi : detail::random_direction(rng));
    if (i % 10 == 0) {
      ++rep.zero_eta_rows;
      const Vec3 z = multiplier_m(xi, {0.0, 0.0, 0.0}, theta, theta);
      if (z[0] != 0.0 || z[1] != 0.0 || z[2] != 0.0) ++rep.zero_eta_nonzero;
    }
    double magnitude = 0.0;
    if (n == 0 && m == 0) {
      magnitude = norm(multiplier_m(xi, eta, theta, theta));
    } else {
      // Frobenius norm of the 3x3 Jacobian by central differences.
      const double h = 1e-6 * std::max(1.0, norm(xi));
      double acc = 0.0;
      for (int a = 0; a < 3; ++a) {
        Vec3 xp = xi, xm = xi, ep = eta, em = eta;
        if (n == 1) {
          xp[static_cast<std::size_t>(a)] += h;
          xm[static_cast<std::size_t>(a)] -= h;
        } else {
          ep[static_cast<std::size_t>(a)] += h;
          em[static_cast<std::size_t>(a)] -= h;
        }
        const Vec3 d = (1.0 / (2.0 * h)) * (multiplier_m(xp, ep, theta, theta) - multiplier_m(xm, em, theta, theta));
        acc += dot(d, d);
      }
      magnitude = std::sqrt(acc);
    }
    const double ratio = magnitude * std::pow(japanese(xi), n + 1) / std::pow(norm(eta), 1 - m);
    rep.ratio_min = std::min(rep.ratio_min, ratio);
    rep.ratio_max = std::max(rep.ratio_max, ratio);
    ++rep.samples;
  }
  return rep;
}

struct NonDegeneracyReport {
  int samples = 0;
  double min_value = std::numeric_limits<double>::infinity();
};

/// min over samples of p_{(+,-)}(xi, eta) = <xi> + <xi - eta>.
inline NonDegeneracyReport scan_mixed_sign_pair(int count, std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  NonDegeneracyReport rep;
  for (int i = 0; i < count; ++i) {
    const Vec3 xi = detail::log_uniform_vector(rng, 1e-3, 1e3);
    const Vec3 eta = detail::log_uniform_vector(rng, 1e-3, 1e3);
    rep.min_value = std::min(rep.min_value, resonance_pair(xi, eta, Sign::plus, Sign::minus).value);
    ++rep.samples;
  }
  return rep;
}

/// LHS and RHS of |eta/<eta> +- sigma/<sigma>| >~ ||eta|-|sigma|| / (min<.> max<.>^2).
struct PhaseBoundTerms {
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs/rhs, +inf when rhs vanishes.
  double ratio() const { return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity(); }
};

inline PhaseBoundTerms phase_bound_terms(const Vec3& eta, const Vec3& sigma, Sign pm) {
  const Vec3 combo = unit_velocity(eta) + value(pm) * unit_velocity(sigma);
  const double je = japanese(eta), js = japanese(sigma);
  const double lo = std::min(je, js), hi = std::max(je, js);
  return {norm(combo), std::abs(norm(eta) - norm(sigma)) / (lo * hi * hi)};
}

struct PhaseLowerBoundReport {
  int samples = 0;
  int infinite = 0;  ///< samples with vanishing right-hand side
  double min_ratio = std::numeric_limits<double>::infinity();
  Vec3 worst_eta{};
  Vec3 worst_sigma{};
};

/// Samples (eta, sigma) with magnitudes log-uniform in [1e-2, 1e2] and both
/// signs; exact-equality configurations (eta = sigma, minus sign) are skipped.
inline PhaseLowerBoundReport phase_lower_bound_check(int count, std::uint64_t seed = 19) {
  std::mt19937_64 rng(seed);
  PhaseLowerBoundReport rep;
  for (int i = 0; i < count; ++i) {
    const Vec3 eta = detail::log_uniform_vector(rng, 1e-2, 1e2);
    const Vec3 sigma = detail::log_uniform_vector(rng, 1e-2, 1e2);
    const Sign pm = (i % 2 == 0) ? Sign::plus : Sign::minus;
    if (pm == Sign::minus && eta == sigma) continue;
    const PhaseBoundTerms t = phase_bound_terms(eta, sigma, pm);
    ++rep.samples;
    if (!(t.rhs > 0.0)) {
      ++rep.infinite;
      continue;
    }
    if (t.ratio() < rep.min_ratio) {
      rep.min_ratio = t.ratio();
      rep.worst_eta = eta;
      rep.worst_sigma = sigma;
    }
  }
  return rep;
}

struct RemainderReport {
  int samples = 0;
  double eta_scale = 0.0;
  double max_ratio = 0.0;  ///< max |p_Xi - q| / |eta|^2
};

/// |p_Xi - q_{(t0,t2)}| / |eta|^2 for xi, sigma uniform in the unit ball,
/// |eta| = eta_scale, Xi = (t0, t0, t2, t2) with random t0, t2.
inline RemainderReport quadratic_remainder_check(int count, double eta_scale, std::uint64_t seed = 23) {
  if (!(eta_scale > 0.0)) throw std::invalid_argument("quadratic_remainder_check: eta_scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bit(0, 1);
  RemainderReport rep;
  rep.eta_scale = eta_scale;
  for (int i = 0; i < count; ++i) {
    const Vec3 xi = uniform_in_ball(rng, 1.0);
    const Vec3 sigma = uniform_in_ball(rng, 1.0);
    const Vec3 eta = eta_scale * detail::random_direction(rng);
    const Sign t0 = bit(rng) ? Sign::plus : Sign::minus;
    const Sign t2 = bit(rng) ? Sign::plus : Sign::minus;
    const double p = resonance_four(xi, eta, sigma, SignTuple::degenerate(t0, t2)).value;
    const double q = quadratic_part(xi, eta, sigma, t0, t2);
    rep.max_ratio = std::max(rep.max_ratio, std::abs(p - q) / (eta_scale * eta_scale));
    ++rep.samples;
  }
  return rep;
}

/// <<D>psi1, psi2> - <psi1, <D>psi2> nodewise; with `identity` the operator
/// <D> is replaced by the identity.
inline ScalarField commutator_density(const SpinorField& psi1, const SpinorField& psi2, bool identity = false) {
  auto jp = [](const Vec3& xi) { return cplx{japanese(xi), 0.0}; };
  const SpinorField a = transformed(psi1, Representation::physical);
  const SpinorField b = transformed(psi2, Representation::physical);
  const SpinorField da = identity ? a : transformed(apply_multiplier(a, jp), Representation::physical);
  const SpinorField db = identity ? b : transformed(apply_multiplier(b, jp), Representation::physical);
  ScalarField x = inner_density(da, b);
  const ScalarField y = inner_density(a, db);
  for (std::size_t i = 0; i < x.nodes(); ++i) x[i] -= y[i];
  return x;
}

/// Dyadic N is resolved when its annulus reaches the first lattice shell and
/// stays inside the Nyquist cube.
inline bool dyadic_resolved(const FourierGrid& g, Dyadic n) {
  const double v = n.value();
  return 2.0 * v > g.dk() && 2.0 * v <= g.xi_max();
}

struct NullGainSample {
  Dyadic n;
  double mixed = 0.0;       ///< ||P_N <Pi_+ psi, Pi_- psi>||_inf
  double same = 0.0;        ///< ||P_N <Pi_+ psi, Pi_+ psi>||_inf
  double commutator = 0.0;  ///< ||P_N (<<D>psi_+, psi_-> - <psi_+, <D>psi_->)||_inf
};

struct NullGainReport {
  std::vector<NullGainSample> samples;
  LineFit mixed_fit;
  LineFit same_fit;
  bool fitted = false;  ///< false when a density vanishes at some N
  double gain() const { return mixed_fit.slope - same_fit.slope; }
};

/// ||P_N . ||_inf of the mixed- and same-sign densities and of the commutator
/// density across the given dyadic N, with log-log fits in N.
inline NullGainReport bilinear_null_gain(const SpinorField& psi, const std::vector<Dyadic>& ns) {
  if (ns.size() < 2) throw std::invalid_argument("bilinear_null_gain: need >= 2 dyadic values");
  for (const auto& n : ns)
    if (!dyadic_resolved(psi.grid(), n))
      throw std::invalid_argument("bilinear_null_gain: N = 2^" + std::to_string(n.exponent) +
                                  " outside the resolved dyadic range");
  const SpinorField pp = transformed(project(psi, Sign::plus), Representation::physical);
  const SpinorField pm = transformed(project(psi, Sign::minus), Representation::physical);
  const ScalarField mixed = inner_density(pp, pm);
  const ScalarField same = inner_density(pp, pp);
  const ScalarField comm = commutator_density(pp, pm);
  NullGainReport rep;
  std::vector<double> x, ym, ys;
  for (const auto& n : ns) {
    auto sup = [&](const ScalarField& f) { return sup_norm(transformed(littlewood_paley(f, n), Representation::physical)); };
    NullGainSample s{n, sup(mixed), sup(same), sup(comm)};
    rep.samples.push_back(s);
    x.push_back(std::log(n.value()));
    ym.push_back(s.mixed > 0.0 ? std::log(s.mixed) : 0.0);
    ys.push_back(s.same > 0.0 ? std::log(s.same) : 0.0);
  }
  const bool positive = std::all_of(rep.samples.begin(), rep.samples.end(),
                                    [](const NullGainSample& s) { return s.mixed > 0.0 && s.same > 0.0; });
  if (positive) {
    rep.mixed_fit = fit_line(x, ym);
    rep.same_fit = fit_line(x, ys);
    rep.fitted = true;
  }
  return rep;
}

}  // namespace dirscat
