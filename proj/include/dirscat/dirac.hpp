#pragma once

// Dirac matrices in the standard (Dirac) representation, the projection
// symbols Pi_+-(xi) = (I +- (alpha.xi + beta)/<xi>)/2, spinor projections,
// and numerical checks of the algebra they satisfy.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dirscat/field.hpp"
#include "dirscat/spectral.hpp"

namespace dirscat {

enum class Sign : int { plus = 1, minus = -1 };

inline double value(Sign s) { return static_cast<double>(static_cast<int>(s)); }
inline Sign operator-(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }
inline const char* to_string(Sign s) { return s == Sign::plus ? "+" : "-"; }
inline constexpr std::array<Sign, 2> both_signs{Sign::plus, Sign::minus};

/// (theta0, theta1, theta2, theta3)
struct SignTuple {
  std::array<Sign, 4> theta{Sign::plus, Sign::plus, Sign::plus, Sign::plus};
  Sign operator[](int i) const { return theta[static_cast<std::size_t>(i)]; }
  /// (theta0, theta0, theta2, theta2): the case that needs the phase correction.
  static SignTuple degenerate(Sign t0, Sign t2) { return {{t0, t0, t2, t2}}; }
};

struct DiracMatrices {
  std::array<Mat4, 3> alpha;
  Mat4 beta;
  std::array<Eigen::Matrix2cd, 3> sigma;

  static const DiracMatrices& standard() {
    static const DiracMatrices m = build();
    return m;
  }

 private:
  static DiracMatrices build() {
    using C = cplx;
    DiracMatrices d;
    d.sigma[0] << C(0, 0), C(1, 0), C(1, 0), C(0, 0);
    d.sigma[1] << C(0, 0), C(0, -1), C(0, 1), C(0, 0);
    d.sigma[2] << C(1, 0), C(0, 0), C(0, 0), C(-1, 0);
    for (int j = 0; j < 3; ++j) {
      d.alpha[j].setZero();
      d.alpha[j].block<2, 2>(0, 2) = d.sigma[j];
      d.alpha[j].block<2, 2>(2, 0) = d.sigma[j];
    }
    d.beta.setZero();
    d.beta.diagonal() << C(1, 0), C(1, 0), C(-1, 0), C(-1, 0);
    return d;
  }
};

/// alpha.xi + beta
inline Mat4 hamiltonian_symbol(const Vec3& xi) {
  const auto& d = DiracMatrices::standard();
  return xi[0] * d.alpha[0] + xi[1] * d.alpha[1] + xi[2] * d.alpha[2] + d.beta;
}

/// (alpha.xi + beta) v without forming the matrix.
inline std::array<cplx, 4> apply_hamiltonian(const Vec3& xi, const std::array<cplx, 4>& v) {
  const cplx minus_(xi[0], -xi[1]);  // xi1 - i xi2
  const cplx plus_(xi[0], xi[1]);    // xi1 + i xi2
  const double z = xi[2];
  return {v[0] + z * v[2] + minus_ * v[3], v[1] + plus_ * v[2] - z * v[3], -v[2] + z * v[0] + minus_ * v[1],
          -v[3] + plus_ * v[0] - z * v[1]};
}

inline Mat4 projection_symbol(const Vec3& xi, Sign s) {
  return 0.5 * (Mat4::Identity() + (value(s) / japanese(xi)) * hamiltonian_symbol(xi));
}

/// Spectral (operator 2-) norm of a 4x4 matrix.
inline double spectral_norm(const Mat4& m) {
  Eigen::JacobiSVD<Mat4> svd(m);
  return svd.singularValues()(0);
}

/// Pi_sign(D) psi, returned in the representation of the input.
inline SpinorField project(const SpinorField& psi, Sign s) {
  const double sv = value(s);
  return detail::with_spectral(psi, [sv](SpinorField& f) {
    const FourierGrid& g = f.grid();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const Vec3 xi = g.wavenumber(idx);
      const std::array<cplx, 4> v{f.at(0, idx), f.at(1, idx), f.at(2, idx), f.at(3, idx)};
      const auto hv = apply_hamiltonian(xi, v);
      const double w = sv / g.jp(idx);
      for (int c = 0; c < 4; ++c) f.at(c, idx) = 0.5 * (v[c] + w * hv[c]);
    }
  });
}

struct IdentityReport {
  int samples = 0;
  double hamiltonian_square = 0.0;  ///< max ||H^2 - <xi>^2 I|| / <xi>^2
  double completeness = 0.0;        ///< max ||Pi_+ + Pi_- - I||
  double idempotence = 0.0;         ///< max ||Pi_s^2 - Pi_s|| over both signs
  double orthogonality = 0.0;       ///< max ||Pi_s Pi_-s|| over both signs
  double seconds = 0.0;
  double max_deviation() const { return std::max({hamiltonian_square, completeness, idempotence, orthogonality}); }
};

inline Vec3 uniform_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    if (dot(v, v) <= 1.0) return radius * v;
  }
}

inline IdentityReport identity_deviation_at(const Vec3& xi) {
  IdentityReport r;
  const Mat4 h = hamiltonian_symbol(xi);
  const double j2 = 1.0 + dot(xi, xi);
  r.hamiltonian_square = spectral_norm(h * h - j2 * Mat4::Identity()) / j2;
  const Mat4 pp = projection_symbol(xi, Sign::plus);
  const Mat4 pm = projection_symbol(xi, Sign::minus);
  r.completeness = spectral_norm(pp + pm - Mat4::Identity());
  r.idempotence = std::max(spectral_norm(pp * pp - pp), spectral_norm(pm * pm - pm));
  r.orthogonality = std::max(spectral_norm(pp * pm), spectral_norm(pm * pp));
  r.samples = 1;
  return r;
}

/// Max deviations of the diagonalization and projection identities over
/// `sample_count` random xi with |xi| <= radius.
inline IdentityReport check_identities(int sample_count, double radius = 100.0, std::uint64_t seed = 1) {
  if (sample_count < 1) throw std::invalid_argument("check_identities: sample_count must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  IdentityReport total;
  for (int i = 0; i < sample_count; ++i) {
    const IdentityReport r = identity_deviation_at(uniform_in_ball(rng, radius));
    total.hamiltonian_square = std::max(total.hamiltonian_square, r.hamiltonian_square);
    total.completeness = std::max(total.completeness, r.completeness);
    total.idempotence = std::max(total.idempotence, r.idempotence);
    total.orthogonality = std::max(total.orthogonality, r.orthogonality);
  }
  total.samples = sample_count;
  total.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return total;
}

/// ||Pi_theta(xi) Pi_{-theta}(xi - eta)||_2
inline double null_product_norm(const Vec3& xi, const Vec3& eta, Sign theta) {
  return spectral_norm(projection_symbol(xi, theta) * projection_symbol(xi - eta, -theta));
}

/// |eta| max(<xi>^-1, <xi-eta>^-1)
inline double null_product_bound(const Vec3& xi, const Vec3& eta) {
  return norm(eta) * std::max(1.0 / japanese(xi), 1.0 / japanese(xi - eta));
}

struct NullScanReport {
  int samples = 0;
  double max_ratio = 0.0;
  Vec3 worst_xi{};
  Vec3 worst_eta{};
  int violations = 0;  ///< ratios above the supplied constant
  double seconds = 0.0;
};

/// Samples pairs with |eta| <= |xi| / 8 (|xi| log-uniform in [1e-2, 1e3])
/// and records null_product_norm / null_product_bound.
inline NullScanReport scan_null_structure(int sample_count, double constant, std::uint64_t seed = 7) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_r(std::log(1e-2), std::log(1e3));
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  NullScanReport rep;
  for (int i = 0; i < sample_count; ++i) {
    const double r = std::exp(log_r(rng));
    Vec3 dir = uniform_in_ball(rng, 1.0);
    while (norm(dir) < 1e-3) dir = uniform_in_ball(rng, 1.0);
    const Vec3 xi = (r / norm(dir)) * dir;
    Vec3 edir = uniform_in_ball(rng, 1.0);
    while (norm(edir) < 1e-3) edir = uniform_in_ball(rng, 1.0);
    const double er = r / 8.0 * std::pow(frac(rng), 1.0 / 3.0);
    if (er == 0.0) continue;
    const Vec3 eta = (er / norm(edir)) * edir;
    const Sign theta = (i % 2 == 0) ? Sign::plus : Sign::minus;
    const double ratio = null_product_norm(xi, eta, theta) / null_product_bound(xi, eta);
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_xi = xi;
      rep.worst_eta = eta;
    }
    if (ratio > constant) ++rep.violations;
    ++rep.samples;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Norm of the order-n derivative tensor of Pi_s at xi, sqrt(sum ||d^alpha Pi||_2^2),
/// by central differences with one Richardson refinement.
inline double projection_derivative_norm(const Vec3& xi, Sign s, int order, double h = 1e-4) {
  if (order != 1 && order != 2) throw std::invalid_argument("projection_derivative_norm: order must be 1 or 2");
  auto shifted = [&](int ax, double d) {
    Vec3 p = xi;
    p[static_cast<std::size_t>(ax)] += d;
    return p;
  };
  auto first = [&](int ax, double step) {
    return ((projection_symbol(shifted(ax, step), s) - projection_symbol(shifted(ax, -step), s)) / (2.0 * step)).eval();
  };
  auto second = [&](int a, int b, double step) {
    auto at = [&](double da, double db) {
      Vec3 p = xi;
      p[static_cast<std::size_t>(a)] += da;
      p[static_cast<std::size_t>(b)] += db;
      return projection_symbol(p, s);
    };
    if (a == b) return ((at(step, 0) - 2.0 * projection_symbol(xi, s) + at(-step, 0)) / (step * step)).eval();
    return ((at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) / (4.0 * step * step)).eval();
  };
  double acc = 0.0;
  if (order == 1) {
    for (int ax = 0; ax < 3; ++ax) {
      const Mat4 d = (4.0 * first(ax, h / 2) - first(ax, h)) / 3.0;
      acc += std::pow(spectral_norm(d), 2);
    }
  } else {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Mat4 d = (4.0 * second(a, b, h / 2) - second(a, b, h)) / 3.0;
        acc += std::pow(spectral_norm(d), 2);
      }
  }
  return std::sqrt(acc);
}

}  // namespace dirscat
