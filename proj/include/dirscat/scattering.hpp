#pragma once

// Interaction profiles, the logarithmic phase correction and drift metrics.
//
// Phase correction on the lattice:
//   B(t, xi) = sum_{theta'} B_{theta'}(t, xi),
//   B_{theta'}(t, xi) = int_0^t K_{theta'}(s, xi) rho(s^{-a} xi) / <s> ds,
//   K_{theta'}(s, xi) = c1 L^{-3} sum_sigma |psi^_{theta'}(s, sigma)|^2 / |xi/<xi> -+ theta' sigma/<sigma>|.
// The s-integral uses product trapezoid weights: K is interpolated linearly
// between snapshots and the weight rho(s^{-a} xi)/<s> is integrated by
// Gauss-Legendre quadrature on each interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirscat/dirac.hpp"
#include "dirscat/field.hpp"
#include "dirscat/fit.hpp"
#include "dirscat/integrator.hpp"
#include "dirscat/propagator.hpp"

namespace dirscat {

inline const char* to_string(KernelSign k) { return k == KernelSign::theorem_minus ? "theorem" : "section6"; }
inline const char* to_string(CorrectionSign c) { return c == CorrectionSign::dynamics ? "dynamics" : "literal"; }
inline const char* to_string(ProfileTime p) { return p == ProfileTime::evolving ? "evolving" : "frozen"; }

/// f^_theta(t) = e^{theta i t <xi>} (Pi_theta psi)^ as a spectral field.
struct ProfileSnapshot {
  double time = 0.0;
  Sign theta = Sign::plus;
  SpinorField profile;
};

inline ProfileSnapshot interaction_profile(const SpinorField& psi, double t, Sign theta) {
  return {t, theta, interaction_profile_field(psi, t, theta)};
}

struct PhaseTable {
  GridPtr grid;
  double time = 0.0;
  std::vector<double> b_plus;
  std::vector<double> b_minus;
  std::vector<double> snapshot_times;
  double cutoff_exponent = 0.01;
  KernelSign kernel_sign = KernelSign::theorem_minus;
  ProfileTime profile_time = ProfileTime::evolving;
  double skipped_mass = 0.0;  ///< largest singular-node mass skipped in any sigma-sum

  PhaseTable() = default;
  PhaseTable(GridPtr g, const PhaseConventions& conv)
      : grid(std::move(g)), b_plus(grid->size(), 0.0), b_minus(grid->size(), 0.0),
        cutoff_exponent(conv.cutoff_exponent), kernel_sign(conv.kernel_sign), profile_time(conv.profile_time) {}

  double b(std::size_t idx) const { return b_plus[idx] + b_minus[idx]; }
};

/// Lattice kernel integrals K_{+}, K_{-} at the listed xi nodes.
struct KernelIntegral {
  std::vector<std::size_t> nodes;
  std::vector<double> k_plus;
  std::vector<double> k_minus;
  double skipped_mass = 0.0;
  int sigma_count = 0;
};

namespace detail {

struct SigmaCloud {
  std::vector<double> vx, vy, vz, w;
};

// Signed velocities s*theta'*sigma/<sigma> and weights |psi^_{theta'}|^2 / L^3,
// keeping nodes whose weight exceeds `relative_floor` times the largest one.
inline std::array<SigmaCloud, 2> sigma_clouds(const std::array<const SpinorField*, 2>& branches, KernelSign sign,
                                              double relative_floor) {
  const FourierGrid& g = branches[0]->grid();
  double wmax = 0.0;
  for (const auto* b : branches)
    for (std::size_t i = 0; i < g.size(); ++i) wmax = std::max(wmax, b->node_norm2(i));
  std::array<SigmaCloud, 2> out;
  if (wmax == 0.0) return out;
  const double floor = relative_floor * wmax;
  for (int k = 0; k < 2; ++k) {
    const double th = k == 0 ? 1.0 : -1.0;
    const double s = sign == KernelSign::theorem_minus ? th : -th;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double w = branches[k]->node_norm2(i);
      if (w <= floor) continue;
      const Vec3 sig = g.wavenumber(i);
      const double jp = g.jp(i);
      out[k].vx.push_back(s * sig[0] / jp);
      out[k].vy.push_back(s * sig[1] / jp);
      out[k].vz.push_back(s * sig[2] / jp);
      out[k].w.push_back(w * g.spectral_weight());
    }
  }
  return out;
}

}  // namespace detail

/// Relative floor below which |psi^|^2 nodes are dropped from the sigma-sum.
inline constexpr double kSigmaFloor = 1e-14;
/// Kernel denominators below this are treated as the singular set.
inline constexpr double kSingularDenominator = 1e-8;

/// K_{theta'}(xi) = c1 L^{-3} sum_sigma |psi^_{theta'}(sigma)|^2 kernel(xi, sigma, theta')
/// at `nodes`. `plus` and `minus` are the spectral fields psi^_+ and psi^_-.
inline KernelIntegral kernel_integral(const SpinorField& plus, const SpinorField& minus, double c1, KernelSign sign,
                                      std::vector<std::size_t> nodes) {
  require_representation(plus, Representation::spectral, "kernel_integral");
  require_representation(minus, Representation::spectral, "kernel_integral");
  require_same_grid(plus, minus, "kernel_integral");
  const FourierGrid& g = plus.grid();
  const auto clouds = detail::sigma_clouds({&plus, &minus}, sign, kSigmaFloor);
  KernelIntegral out;
  out.nodes = std::move(nodes);
  out.k_plus.assign(out.nodes.size(), 0.0);
  out.k_minus.assign(out.nodes.size(), 0.0);
  out.sigma_count = static_cast<int>(clouds[0].w.size() + clouds[1].w.size());
  for (std::size_t j = 0; j < out.nodes.size(); ++j) {
    const Vec3 xi = g.wavenumber(out.nodes[j]);
    const double jp = g.jp(out.nodes[j]);
    const double ux = xi[0] / jp, uy = xi[1] / jp, uz = xi[2] / jp;
    double skipped = 0.0;
    for (int k = 0; k < 2; ++k) {
      const auto& c = clouds[k];
      double acc = 0.0;
      const std::size_t m = c.w.size();
      for (std::size_t i = 0; i < m; ++i) {
        const double dx = ux - c.vx[i], dy = uy - c.vy[i], dz = uz - c.vz[i];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d < kSingularDenominator) {
          skipped += c.w[i];
          continue;
        }
        acc += c.w[i] / d;
      }
      (k == 0 ? out.k_plus : out.k_minus)[j] = c1 * acc;
    }
    out.skipped_mass = std::max(out.skipped_mass, skipped);
  }
  return out;
}

/// Velocity-space side length; holds the unit ball of velocities with margin.
inline constexpr double kVelocityBox = 2.5;

namespace detail {

// 4-point Lagrange weights for offsets -1, 0, 1, 2 at fractional position t.
inline std::array<double, 4> cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

// Tricubic interpolation of lattice values; `at(i, j, k)` receives integer
// coordinates relative to the lattice origin and handles out-of-range nodes.
template <class At>
double tricubic(const Vec3& frac_coord, At&& at) {
  std::array<int, 3> base{};
  std::array<std::array<double, 4>, 3> w{};
  for (int a = 0; a < 3; ++a) {
    const double f = frac_coord[static_cast<std::size_t>(a)];
    const double fl = std::floor(f);
    base[a] = static_cast<int>(fl);
    w[a] = cubic_weights(f - fl);
  }
  double acc = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j) {
      const double wjk = w[1][j] * w[2][k];
      for (int i = 0; i < 4; ++i) acc += w[0][i] * wjk * at(base[0] + i - 1, base[1] + j - 1, base[2] + k - 1);
    }
  return acc;
}

}  // namespace detail

/// Continuum form of the sigma-integral, evaluated in velocity space:
///   K(xi) = c1 int mu(v) / |xi/<xi> - v| dv,
///   mu(v) = |psi^(sigma)|^2 <sigma>^5 / (2 pi)^3 at sigma/<sigma> = +-v,
/// with |psi^|^2 interpolated tricubically off the lattice, the Coulomb
/// integral done by the free-space solver on an n^3 velocity grid, and the
/// potential interpolated tricubically at xi/<xi>. Unlike the lattice sum it
/// has no punctured singular node.
class VelocityGridKernel {
 public:
  explicit VelocityGridKernel(int n) : grid_(make_grid(n, kVelocityBox)), solver_(grid_, CoulombMode::free_space) {}

  const FourierGrid& grid() const { return *grid_; }

  KernelIntegral evaluate(const SpinorField& plus, const SpinorField& minus, double c1, KernelSign sign,
                          std::vector<std::size_t> nodes) const {
    require_representation(plus, Representation::spectral, "kernel_integral");
    require_representation(minus, Representation::spectral, "kernel_integral");
    require_same_grid(plus, minus, "kernel_integral");
    const FourierGrid& g = plus.grid();
    KernelIntegral out;
    out.nodes = std::move(nodes);
    out.k_plus.assign(out.nodes.size(), 0.0);
    out.k_minus.assign(out.nodes.size(), 0.0);
    const int n = g.n();
    const int nv = grid_->n();
    const double hv = grid_->dx();
    const double inv8pi3 = 1.0 / std::pow(2.0 * std::numbers::pi, 3);
    for (int k = 0; k < 2; ++k) {
      const SpinorField& branch = k == 0 ? plus : minus;
      const double orient = (k == 0 ? 1.0 : -1.0) * (sign == KernelSign::theorem_minus ? 1.0 : -1.0);
      auto lattice = [&](int i, int j, int l) -> double {
        if (i < -n / 2 || i >= n / 2 || j < -n / 2 || j >= n / 2 || l < -n / 2 || l >= n / 2) return 0.0;
        return branch.node_norm2(g.index(g.index_of_mode(i), g.index_of_mode(j), g.index_of_mode(l)));
      };
      ScalarField mu(grid_, Representation::physical);
      bool any = false;
      for (std::size_t idx = 0; idx < grid_->size(); ++idx) {
        const Vec3 v = grid_->position(idx);
        const double v2 = dot(v, v);
        if (v2 >= 1.0) continue;
        const double jp = 1.0 / std::sqrt(1.0 - v2);
        const Vec3 sigma = (orient * jp) * v;
        const Vec3 frac = (1.0 / g.dk()) * sigma;
        if (std::abs(frac[0]) > n / 2 + 2 || std::abs(frac[1]) > n / 2 + 2 || std::abs(frac[2]) > n / 2 + 2) continue;
        const double val = std::max(0.0, detail::tricubic(frac, lattice));
        if (val > 0.0) any = true;
        mu[idx] = val * std::pow(jp, 5) * inv8pi3;
      }
      if (!any) continue;
      const ScalarField phi = solver_.potential(mu);
      auto pot = [&](int i, int j, int l) {
        return phi[grid_->index(((i % nv) + nv) % nv, ((j % nv) + nv) % nv, ((l % nv) + nv) % nv)].real();
      };
      auto& dst = k == 0 ? out.k_plus : out.k_minus;
      for (std::size_t j = 0; j < out.nodes.size(); ++j) {
        const Vec3 u = (1.0 / g.jp(out.nodes[j])) * g.wavenumber(out.nodes[j]);
        dst[j] = c1 * detail::tricubic((1.0 / hv) * u, pot);
      }
    }
    return out;
  }

 private:
  GridPtr grid_;
  CoulombSolver solver_;
};

/// K at `nodes` with the method selected in `conv`.
inline KernelIntegral evaluate_kernel(const SpinorField& plus, const SpinorField& minus, double c1,
                                      const PhaseConventions& conv, std::vector<std::size_t> nodes) {
  if (conv.kernel_method == KernelMethod::velocity_grid)
    return VelocityGridKernel(conv.velocity_grid_n).evaluate(plus, minus, c1, conv.kernel_sign, std::move(nodes));
  return kernel_integral(plus, minus, c1, conv.kernel_sign, std::move(nodes));
}

/// Lattice nodes where rho(s^{-a} xi) can be nonzero for s <= s_max.
inline std::vector<std::size_t> cutoff_support(const FourierGrid& g, double s_max, double exponent) {
  const double radius = 2.0 * std::pow(std::max(s_max, 1.0), exponent);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (norm(g.wavenumber(i)) < radius) out.push_back(i);
  return out;
}

/// rho(s^{-a} xi) with the s -> 0 limit (1 at xi = 0, else 0).
inline double time_cutoff(double s, double radius, double exponent) {
  if (s <= 0.0) return radius == 0.0 ? 1.0 : 0.0;
  return bump::radial(radius * std::pow(s, -exponent));
}

/// Product-trapezoid weights (W0, W1) over [s0, s1]:
/// W0 = int (s1-s)/ds w(s) ds, W1 = int (s-s0)/ds w(s) ds, w(s) = rho(s^{-a}|xi|)/<s>.
inline std::array<double, 2> interval_weights(double s0, double s1, double radius, double exponent) {
  static constexpr std::array<double, 8> x{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                           0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                           0.9445750230732326, 0.9894009349916499};
  static constexpr std::array<double, 8> w{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                           0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                           0.0622535239386479, 0.0271524594117541};
  const double h = s1 - s0;
  const double mid = 0.5 * (s0 + s1);
  std::array<double, 2> out{0.0, 0.0};
  for (int i = 0; i < 8; ++i)
    for (double sgn : {-1.0, 1.0}) {
      const double s = mid + sgn * 0.5 * h * x[i];
      const double f = time_cutoff(s, radius, exponent) / std::sqrt(1.0 + s * s) * w[i] * 0.5 * h;
      out[0] += f * (s1 - s) / h;
      out[1] += f * (s - s0) / h;
    }
  return out;
}

/// Streams snapshots in time order and accumulates B.
class PhaseAccumulator {
 public:
  /// `horizon` bounds the snapshot times and fixes the cutoff support.
  PhaseAccumulator(GridPtr grid, double c1, const PhaseConventions& conv, double horizon)
      : grid_(std::move(grid)), c1_(c1), conv_(conv), horizon_(horizon), table_(grid_, conv),
        support_(cutoff_support(*grid_, horizon, conv.cutoff_exponent)) {
    if (conv.kernel_method == KernelMethod::velocity_grid) velocity_.emplace(conv.velocity_grid_n);
  }

  /// Profile at time t (any representation). Times must increase.
  void observe(double t, const SpinorField& psi) {
    if (t > horizon_ * (1.0 + 1e-12)) throw std::invalid_argument("PhaseAccumulator: snapshot beyond horizon");
    if (have_prev_ && !(t > prev_time_)) throw std::invalid_argument("PhaseAccumulator: snapshot times must increase");
    if (!have_prev_ && t != 0.0 && conv_.profile_time == ProfileTime::frozen)
      throw std::invalid_argument("PhaseAccumulator: frozen profile needs the t=0 snapshot first");
    const SpinorField spec = transformed(psi, Representation::spectral);
    std::optional<KernelIntegral> current;
    if (conv_.profile_time == ProfileTime::evolving || !frozen_) {
      SpinorField plus = project(spec, Sign::plus);
      SpinorField minus = project(spec, Sign::minus);
      if (conv_.profile_time == ProfileTime::frozen) frozen_.emplace(FrozenProfile{std::move(plus), std::move(minus)});
      else current.emplace(kernel_for(plus, minus));
    }
    if (conv_.profile_time == ProfileTime::frozen) current.emplace(kernel_for(frozen_->plus, frozen_->minus));
    if (have_prev_) increment(prev_time_, t, previous_, *current);
    table_.time = t;
    table_.snapshot_times.push_back(t);
    table_.skipped_mass = std::max(table_.skipped_mass, current->skipped_mass);
    previous_ = std::move(*current);
    prev_time_ = t;
    have_prev_ = true;
  }

  const PhaseTable& table() const { return table_; }
  double c1() const { return c1_; }

 private:
  struct FrozenProfile {
    SpinorField plus;
    SpinorField minus;
  };

  KernelIntegral kernel_for(const SpinorField& plus, const SpinorField& minus) const {
    if (velocity_) return velocity_->evaluate(plus, minus, c1_, conv_.kernel_sign, support_);
    return kernel_integral(plus, minus, c1_, conv_.kernel_sign, support_);
  }

  void increment(double s0, double s1, const KernelIntegral& k0, const KernelIntegral& k1) {
    for (std::size_t j = 0; j < k1.nodes.size(); ++j) {
      const std::size_t idx = k1.nodes[j];
      const auto w = interval_weights(s0, s1, norm(grid_->wavenumber(idx)), conv_.cutoff_exponent);
      table_.b_plus[idx] += w[0] * k0.k_plus[j] + w[1] * k1.k_plus[j];
      table_.b_minus[idx] += w[0] * k0.k_minus[j] + w[1] * k1.k_minus[j];
    }
  }

  GridPtr grid_;
  double c1_;
  PhaseConventions conv_;
  double horizon_;
  PhaseTable table_;
  std::vector<std::size_t> support_;
  std::optional<FrozenProfile> frozen_;
  std::optional<VelocityGridKernel> velocity_;
  KernelIntegral previous_;
  double prev_time_ = 0.0;
  bool have_prev_ = false;
};

/// Increment of B over [s, s + ds] from the profiles at both ends.
inline PhaseTable phase_correction_increment(const SpinorField& psi_s, const SpinorField& psi_next, double s, double ds,
                                             double c1, const PhaseConventions& conv) {
  if (!(ds > 0.0)) throw std::invalid_argument("phase_correction_increment: ds must be positive");
  if (s < 0.0) throw std::invalid_argument("phase_correction_increment: s must be non-negative");
  PhaseTable t(psi_s.grid_ptr(), conv);
  const SpinorField a = transformed(psi_s, Representation::spectral);
  const SpinorField b = transformed(psi_next, Representation::spectral);
  const auto nodes = cutoff_support(psi_s.grid(), s + ds, conv.cutoff_exponent);
  const KernelIntegral k0 = evaluate_kernel(project(a, Sign::plus), project(a, Sign::minus), c1, conv, nodes);
  const KernelIntegral k1 = conv.profile_time == ProfileTime::frozen
                                ? k0
                                : evaluate_kernel(project(b, Sign::plus), project(b, Sign::minus), c1, conv, nodes);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto w = interval_weights(s, s + ds, norm(psi_s.grid().wavenumber(nodes[j])), conv.cutoff_exponent);
    t.b_plus[nodes[j]] = w[0] * k0.k_plus[j] + w[1] * k1.k_plus[j];
    t.b_minus[nodes[j]] = w[0] * k0.k_minus[j] + w[1] * k1.k_minus[j];
  }
  t.time = s + ds;
  t.snapshot_times = {s, s + ds};
  t.skipped_mass = std::max(k0.skipped_mass, k1.skipped_mass);
  return t;
}

/// g_theta(t, xi) = e^{-+ i B(t, theta xi)} f^_theta(t, xi); the sign follows
/// `sign` (dynamics: minus, literal: plus).
inline SpinorField corrected_profile(const ProfileSnapshot& snap, const PhaseTable& table,
                                     CorrectionSign sign = CorrectionSign::dynamics) {
  require_representation(snap.profile, Representation::spectral, "corrected_profile");
  if (!(snap.profile.grid() == *table.grid)) throw std::invalid_argument("corrected_profile: grid mismatch");
  if (std::abs(snap.time - table.time) > 1e-9 * std::max(1.0, std::abs(snap.time)))
    throw std::invalid_argument("corrected_profile: snapshot time " + std::to_string(snap.time) +
                                " does not match phase table time " + std::to_string(table.time));
  const double s = sign == CorrectionSign::dynamics ? -1.0 : 1.0;
  SpinorField g = snap.profile;
  const FourierGrid& grid = g.grid();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const std::size_t arg = snap.theta == Sign::plus ? idx : grid.negated(idx);
    const double ph = s * table.b(arg);
    if (ph == 0.0) continue;
    const cplx e(std::cos(ph), std::sin(ph));
    for (int c = 0; c < 4; ++c) g.at(c, idx) *= e;
  }
  return g;
}

/// max_xi <xi>^w |e^{i alpha} g2(xi) - g1(xi)|. alpha = 0 unless `align_gauge`,
/// which picks the uniform phase best matching g1 in weighted L^2 and so
/// removes a spatially uniform gauge phase between the two times.
inline double drift_metric(const SpinorField& g1, const SpinorField& g2, double weight_power, bool align_gauge = false) {
  require_same_grid(g1, g2, "drift_metric");
  require_representation(g1, Representation::spectral, "drift_metric");
  require_representation(g2, Representation::spectral, "drift_metric");
  const FourierGrid& g = g1.grid();
  cplx rot{1.0, 0.0};
  if (align_gauge) {
    cplx acc{0.0, 0.0};
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double w = std::pow(g.jp(idx), 2.0 * weight_power);
      for (int c = 0; c < 4; ++c) acc += w * std::conj(g2.at(c, idx)) * g1.at(c, idx);
    }
    if (std::abs(acc) > 0.0) rot = acc / std::abs(acc);
  }
  double m = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    double d2 = 0.0;
    for (int c = 0; c < 4; ++c) d2 += std::norm(rot * g2.at(c, idx) - g1.at(c, idx));
    m = std::max(m, std::pow(g.jp(idx), weight_power) * std::sqrt(d2));
  }
  return m;
}

/// Node of largest |f^| (lowest index on ties).
inline std::size_t spectral_peak(const SpinorField& spec) {
  require_representation(spec, Representation::spectral, "spectral_peak");
  std::size_t best = 0;
  double bv = -1.0;
  for (std::size_t i = 0; i < spec.nodes(); ++i)
    if (spec.node_norm2(i) > bv) {
      bv = spec.node_norm2(i);
      best = i;
    }
  return best;
}

/// Reference node for relative phases: among nodes with |f^| >= `fraction` of
/// the peak modulus, the one whose velocity xi/<xi> is farthest from the peak's.
inline std::size_t reference_node(const SpinorField& spec, std::size_t peak, double fraction = 0.25) {
  const FourierGrid& g = spec.grid();
  const double floor = fraction * fraction * spec.node_norm2(peak);
  const Vec3 up = (1.0 / g.jp(peak)) * g.wavenumber(peak);
  std::size_t best = peak;
  double bd = -1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (spec.node_norm2(i) < floor) continue;
    const double d = norm((1.0 / g.jp(i)) * g.wavenumber(i) - up);
    if (d > bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

/// Unwrapped phase series at one node: arg <f(ref), f(xi*)> (reference-relative) or of the dominant component of
/// f(xi*) when node == reference.
class PhaseSeries {
 public:
  PhaseSeries(std::size_t node, std::size_t reference, Sign theta)
      : node_(node), reference_(reference), theta_(theta) {}

  void observe(double t, const SpinorField& psi) {
    const SpinorField f = interaction_profile_field(psi, t, theta_);
    cplx z{0.0, 0.0};
    if (node_ == reference_) {
      if (component_ < 0) {
        component_ = 0;
        for (int c = 1; c < 4; ++c)
          if (std::abs(f.at(c, node_)) > std::abs(f.at(component_, node_))) component_ = c;
      }
      z = f.at(component_, node_);
    } else {
      for (int c = 0; c < 4; ++c) z += f.at(c, node_) * std::conj(f.at(c, reference_));
    }
    const double raw = std::arg(z);
    if (!phase_.empty()) {
      double step = raw - last_raw_;
      step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
      if (std::abs(step) > 0.5 * std::numbers::pi)
        throw std::runtime_error("log_phase_slope: phase step " + std::to_string(step) + " at t=" + std::to_string(t) +
                                 " is ambiguous; snapshots too sparse");
      phase_.push_back(phase_.back() + step);
    } else {
      phase_.push_back(raw);
    }
    last_raw_ = raw;
    time_.push_back(t);
  }

  const std::vector<double>& times() const { return time_; }
  const std::vector<double>& phases() const { return phase_; }
  std::size_t node() const { return node_; }
  std::size_t reference() const { return reference_; }
  Sign theta() const { return theta_; }

 private:
  std::size_t node_;
  std::size_t reference_;
  Sign theta_;
  int component_ = -1;
  std::vector<double> time_;
  std::vector<double> phase_;
  double last_raw_ = 0.0;
};

struct LogPhaseSlope {
  double measured = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  LineFit fit;
  std::size_t node = 0;
  std::size_t reference = 0;
};

/// Measured d(arg)/d(log t) over [t_lo, t_hi] and the prediction from the
/// kernel integrals of `final_psi` at the two nodes.
inline LogPhaseSlope log_phase_slope(const PhaseSeries& series, const SpinorField& final_psi, double c1,
                                     const PhaseConventions& conv, double t_lo, double t_hi) {
  std::vector<double> lt, ph;
  for (std::size_t i = 0; i < series.times().size(); ++i) {
    const double t = series.times()[i];
    if (t >= t_lo && t <= t_hi && t > 0.0) {
      lt.push_back(std::log(t));
      ph.push_back(series.phases()[i]);
    }
  }
  if (lt.size() < 3) throw std::invalid_argument("log_phase_slope: need >= 3 snapshots in the fit window");
  LogPhaseSlope out;
  out.fit = fit_line(lt, ph);
  out.measured = out.fit.slope;
  out.node = series.node();
  out.reference = series.reference();
  const FourierGrid& g = final_psi.grid();
  const SpinorField spec = transformed(final_psi, Representation::spectral);
  auto arg_node = [&](std::size_t idx) { return series.theta() == Sign::plus ? idx : g.negated(idx); };
  std::vector<std::size_t> nodes{arg_node(series.node())};
  if (series.reference() != series.node()) nodes.push_back(arg_node(series.reference()));
  const KernelIntegral k = evaluate_kernel(project(spec, Sign::plus), project(spec, Sign::minus), c1, conv, nodes);
  const double t_end = series.times().back();
  auto total = [&](std::size_t j) {
    return (k.k_plus[j] + k.k_minus[j]) * time_cutoff(t_end, norm(g.wavenumber(nodes[j])), conv.cutoff_exponent);
  };
  double pred = total(0);
  if (nodes.size() > 1) pred -= total(1);
  out.predicted = conv.correction_sign == CorrectionSign::dynamics ? pred : -pred;
  out.ratio = out.predicted != 0.0 ? out.measured / out.predicted : 0.0;
  return out;
}

struct ScatterOptions {
  std::vector<KernelSign> variants{KernelSign::theorem_minus, KernelSign::section6_plus};
  std::vector<double> block_times{4.0, 8.0, 16.0, 32.0};  ///< drift over [t_k, t_{k+1}]
  Sign theta = Sign::plus;
  double slope_t_lo = 8.0;       ///< log-phase fit window [slope_t_lo, last snapshot]
  bool relative_phase = false;  ///< reference-relative phase instead of the absolute one
};

struct VariantDrift {
  KernelSign sign = KernelSign::theorem_minus;
  std::vector<double> drift;  ///< corrected drift per block
  bool halves_final = false;    ///< final block <= 1/2 uncorrected
  bool non_increasing = false;
  double skipped_mass = 0.0;
};

struct ScatterReport {
  std::vector<std::array<double, 2>> blocks;
  std::vector<double> uncorrected;
  std::vector<VariantDrift> variants;
  LogPhaseSlope slope;
  bool has_slope = false;

  /// Some variant satisfies both drift properties.
  bool drift_pass() const {
    return std::any_of(variants.begin(), variants.end(), [](const VariantDrift& v) { return v.halves_final && v.non_increasing; });
  }
};

/// Streams a trajectory (increasing times from t=0) and collects the drift
/// metrics of the raw and phase-corrected profiles plus the log-phase slope.
class ScatterAnalysis {
 public:
  ScatterAnalysis(GridPtr grid, double c1, const PhaseConventions& conv, double horizon, ScatterOptions options)
      : c1_(c1), conv_(conv), opt_(std::move(options)) {
    if (opt_.block_times.size() < 2 && !opt_.variants.empty())
      throw std::invalid_argument("ScatterAnalysis: need at least two block times");
    for (KernelSign k : opt_.variants) {
      PhaseConventions c = conv;
      c.kernel_sign = k;
      accumulators_.emplace_back(grid, c1, c, horizon);
    }
  }

  void observe(double t, const SpinorField& psi) {
    for (auto& a : accumulators_) a.observe(t, psi);
    if (!series_) {
      const SpinorField f = interaction_profile_field(psi, t, opt_.theta);
      const std::size_t peak = spectral_peak(f);
      series_.emplace(peak, opt_.relative_phase ? reference_node(f, peak) : peak, opt_.theta);
    }
    series_->observe(t, psi);
    for (double bt : opt_.block_times) {
      if (std::abs(t - bt) > 1e-9 * std::max(1.0, bt)) continue;
      const ProfileSnapshot snap = interaction_profile(psi, t, opt_.theta);
      std::vector<SpinorField> corrected;
      for (std::size_t k = 0; k < accumulators_.size(); ++k)
        corrected.push_back(corrected_profile(snap, accumulators_[k].table(), conv_.correction_sign));
      blocks_.push_back({t, snap.profile, std::move(corrected)});
    }
    last_time_ = t;
    last_psi_ = psi;
  }

  /// Accumulated phase of variant k (in ScatterOptions::variants order).
  const PhaseTable& table(std::size_t k) const { return accumulators_.at(k).table(); }

  ScatterReport finish() const {
    ScatterReport r;
    if (blocks_.size() != opt_.block_times.size())
      throw std::runtime_error("ScatterAnalysis: missing snapshots at block times (" + std::to_string(blocks_.size()) +
                               " of " + std::to_string(opt_.block_times.size()) + " seen)");
    const double w = conv_.weight_power;
    for (std::size_t b = 0; b + 1 < blocks_.size(); ++b) {
      r.blocks.push_back({blocks_[b].time, blocks_[b + 1].time});
      r.uncorrected.push_back(drift_metric(blocks_[b].raw, blocks_[b + 1].raw, w));
    }
    for (std::size_t k = 0; k < accumulators_.size(); ++k) {
      VariantDrift v;
      v.sign = opt_.variants[k];
      for (std::size_t b = 0; b + 1 < blocks_.size(); ++b)
        v.drift.push_back(drift_metric(blocks_[b].corrected[k], blocks_[b + 1].corrected[k], w));
      v.halves_final = !v.drift.empty() && v.drift.back() <= 0.5 * r.uncorrected.back();
      v.non_increasing = std::is_sorted(v.drift.rbegin(), v.drift.rend());
      v.skipped_mass = accumulators_[k].table().skipped_mass;
      r.variants.push_back(std::move(v));
    }
    if (series_ && last_time_ > opt_.slope_t_lo) {
      r.slope = log_phase_slope(*series_, last_psi_, c1_, conv_, opt_.slope_t_lo, last_time_);
      r.has_slope = true;
    }
    return r;
  }

 private:
  struct Block {
    double time;
    SpinorField raw;
    std::vector<SpinorField> corrected;
  };

  double c1_;
  PhaseConventions conv_;
  ScatterOptions opt_;
  std::vector<PhaseAccumulator> accumulators_;
  std::optional<PhaseSeries> series_;
  std::vector<Block> blocks_;
  double last_time_ = 0.0;
  SpinorField last_psi_;
};

}  // namespace dirscat
