#pragma once

// Strang split-step evolution of
//   (d_t + alpha.grad + i beta) psi = i c1 (|x|^{-1} * |psi|^2) psi
// with both substeps solved exactly:
//   A(tau)  free Dirac group U(tau), applied spectrally,
//   P(tau)  psi -> exp(i c1 V tau) psi, V = |x|^{-1} * |psi|^2,
// which is exact for the potential subflow because |psi| is invariant under
// it. Each substep is unitary, so the L^2 norm is conserved to roundoff.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirscat/dirac.hpp"
#include "dirscat/field.hpp"
#include "dirscat/fit.hpp"
#include "dirscat/hartree.hpp"
#include "dirscat/propagator.hpp"
#include "dirscat/spectral.hpp"

namespace dirscat {

class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

enum class DataFamily { gaussian, random_smooth };
enum class BranchContent { plus, minus, both };

/// Kernel sign inside |xi/<xi> -+ theta sigma/<sigma>|^{-1}: the theorem
/// statement uses minus, the asymptotic section restates it with plus.
enum class KernelSign { theorem_minus, section6_plus };
/// Overall sign of the profile modification: `dynamics` makes
/// exp(-iB) f^ asymptotically stationary for c1 > 0; `literal` uses exp(+iB).
enum class CorrectionSign { dynamics, literal };
/// Profile entering the phase integral: time-s profile, or frozen initial one.
enum class ProfileTime { evolving, frozen };
/// Evaluation of the sigma-sum: direct lattice sum, or Coulomb solve on a
/// velocity-space grid after depositing the lattice weights at sigma/<sigma>.
enum class KernelMethod { direct, velocity_grid };

struct InitialData {
  DataFamily family = DataFamily::gaussian;
  double eps0 = 0.05;
  double width = 1.0;
  Vec3 k0{0.0, 0.0, 0.0};
  Vec3 center{0.0, 0.0, 0.0};
  BranchContent branch = BranchContent::plus;
  std::array<cplx, 4> spinor{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)};
  std::uint64_t seed = 1;
};

struct PhaseConventions {
  KernelSign kernel_sign = KernelSign::theorem_minus;
  double cutoff_exponent = 0.01;
  CorrectionSign correction_sign = CorrectionSign::dynamics;
  ProfileTime profile_time = ProfileTime::evolving;
  double weight_power = 10.0;
  KernelMethod kernel_method = KernelMethod::direct;
  int velocity_grid_n = 64;
};

struct RunConfig {
  int n = 32;
  double box_length = 32.0;
  InitialData data;
  double g = std::sqrt(4.0 * std::numbers::pi);  ///< coupling; c1 = g^2 / 4 pi
  double dt = 0.02;
  double t_final = 16.0;
  std::vector<double> snapshot_times;  ///< empty: every snapshot_every
  double snapshot_every = 1.0;
  int hk_order = 8;
  CoulombMode coulomb = CoulombMode::periodic;
  bool dealias = false;
  GaugeConvention gauge = GaugeConvention::zero_mode_dropped;
  double gauge_lambda = 0.0;
  bool hartree_diagnostic = true;  ///< W^{2,inf} of N(psi,psi,psi) with the free-space kernel
  double instability_threshold = 0.1;
  PhaseConventions phase;

  double c1() const { return g * g / (4.0 * std::numbers::pi); }

  /// Snapshot times as integer step counts, always including 0 and t_final.
  std::vector<long> snapshot_steps() const {
    const long total = std::lround(t_final / dt);
    std::vector<long> steps;
    auto push = [&](double t) {
      const double k = t / dt;
      const long r = std::lround(k);
      if (std::abs(k - r) > 1e-6) throw std::invalid_argument("snapshot time " + std::to_string(t) + " is not a multiple of dt");
      if (r < 0 || r > total) throw std::invalid_argument("snapshot time " + std::to_string(t) + " outside [0, t_final]");
      steps.push_back(r);
    };
    push(0.0);
    if (snapshot_times.empty()) {
      if (!(snapshot_every > 0.0)) throw std::invalid_argument("snapshot_every must be positive");
      const long every = std::max(1L, std::lround(snapshot_every / dt));
      for (long k = every; k < total; k += every) steps.push_back(k);
    } else {
      for (double t : snapshot_times) push(t);
    }
    steps.push_back(total);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
  }

  /// Throws std::invalid_argument naming the offending key.
  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw std::invalid_argument("config key '" + key + "': " + why);
    };
    if (n < 8 || n % 2 != 0) fail("n", "must be even and >= 8");
    if (!(box_length > 0.0)) fail("L", "must be positive");
    if (!(dt > 0.0) || dt > 0.1) fail("dt", "must satisfy 0 < dt <= 0.1");
    if (!(t_final > 0.0)) fail("t_final", "must be positive");
    if (t_final > 0.5 * box_length + 1e-12)
      fail("t_final", "exceeds the wrap-around horizon L/2 = " + std::to_string(0.5 * box_length));
    if (std::abs(t_final / dt - std::round(t_final / dt)) > 1e-6) fail("t_final", "must be a multiple of dt");
    if (!(data.eps0 >= 0.0)) fail("eps0", "must be non-negative");
    if (!(data.width > 0.0)) fail("width", "must be positive");
    if (!(g >= 0.0)) fail("g", "must be non-negative");
    if (hk_order < 0) fail("hk_order", "must be non-negative");
    if (!(phase.cutoff_exponent > 0.0)) fail("cutoff_exponent", "must be positive");
    if (phase.velocity_grid_n < 16 || phase.velocity_grid_n % 2 != 0) fail("velocity_grid_n", "must be even and >= 16");
    if (!(instability_threshold > 0.0)) fail("instability_threshold", "must be positive");
    for (double t : snapshot_times)
      if (t < 0.0 || t > t_final) fail("snapshot_times", "entries must lie in [0, t_final]");
    try {
      (void)snapshot_steps();
    } catch (const std::invalid_argument& e) {
      fail(snapshot_times.empty() ? "snapshot_every" : "snapshot_times", e.what());
    }
  }
};

inline SpinorField project_branch(const SpinorField& phi, BranchContent branch) {
  switch (branch) {
    case BranchContent::plus:
      return project(phi, Sign::plus);
    case BranchContent::minus:
      return project(phi, Sign::minus);
    case BranchContent::both:
      break;
  }
  return phi;
}

/// Initial data psi_0 in physical representation.
inline SpinorField make_initial_data(const GridPtr& grid, const InitialData& d) {
  SpinorField phi(grid, Representation::physical);
  const FourierGrid& g = *grid;
  if (d.family == DataFamily::gaussian) {
    double chi_norm = 0.0;
    for (const auto& c : d.spinor) chi_norm += std::norm(c);
    chi_norm = std::sqrt(chi_norm);
    if (chi_norm == 0.0) throw std::invalid_argument("initial data: zero spinor");
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      Vec3 x = g.position(idx) - d.center;
      for (auto& xa : x) xa -= g.box_length() * std::round(xa / g.box_length());
      const double env = d.eps0 * std::exp(-dot(x, x) / (2.0 * d.width * d.width));
      const double ph = dot(d.k0, x);
      const cplx wave = env * cplx(std::cos(ph), std::sin(ph));
      for (int c = 0; c < 4; ++c) phi.at(c, idx) = wave * d.spinor[c] / chi_norm;
    }
  } else {
    std::mt19937_64 rng(d.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    phi.set_representation(Representation::spectral);
    for (int c = 0; c < 4; ++c)
      for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const double a = std::exp(-0.5 * d.width * d.width * dot(g.wavenumber(idx), g.wavenumber(idx)));
        phi.at(c, idx) = a * cplx(normal(rng), normal(rng));
      }
    phi.to_physical();
    const double peak = sup_norm(phi);
    if (peak > 0.0) phi.scale(d.eps0 / peak);
  }
  return project_branch(phi, d.branch);
}

/// Split-step propagator with cached phase tables for the two substep sizes.
class SplitStepper {
 public:
  SplitStepper(GridPtr grid, double c1, double dt, CoulombMode mode = CoulombMode::periodic, bool dealias = false,
               GaugeConvention gauge = GaugeConvention::zero_mode_dropped, double gauge_lambda = 0.0)
      : grid_(grid), c1_(c1), dt_(dt), solver_(grid, mode, dealias), dealias_(dealias), gauge_(gauge),
        gauge_lambda_(gauge_lambda) {
    if (!std::isfinite(dt) || dt == 0.0) throw std::invalid_argument("SplitStepper: dt must be finite and nonzero");
    half_ = table(0.5 * dt);
    full_ = table(dt);
  }

  double dt() const { return dt_; }
  double c1() const { return c1_; }
  const CoulombSolver& solver() const { return solver_; }

  /// One symmetric step A(dt/2) P(dt) A(dt/2) on a physical field.
  void step(SpinorField& psi) const {
    linear(psi, half_);
    potential(psi, dt_);
    linear(psi, half_);
  }

  /// `count` steps with the inner half steps fused into full linear steps.
  void steps(SpinorField& psi, long count) const {
    if (count <= 0) return;
    linear(psi, half_);
    for (long k = 0; k < count; ++k) {
      potential(psi, dt_);
      linear(psi, k + 1 == count ? half_ : full_);
    }
  }

  void potential(SpinorField& psi, double tau) const {
    require_representation(psi, Representation::physical, "potential substep");
    ScalarField density(grid_, Representation::physical);
    for (std::size_t idx = 0; idx < psi.nodes(); ++idx) density[idx] = psi.node_norm2(idx);
    const ScalarField v = solver_.potential(density);
    const double shift = gauge_phase_rate(density, 1.0, gauge_, gauge_lambda_);
    for (std::size_t idx = 0; idx < psi.nodes(); ++idx) {
      const double ph = c1_ * (v[idx].real() + shift) * tau;
      const cplx e(std::cos(ph), std::sin(ph));
      for (int c = 0; c < 4; ++c) psi.at(c, idx) *= e;
    }
  }

 private:
  struct PhaseTable {
    std::vector<double> cos_t;
    std::vector<double> sinc_t;  ///< sin(tau <xi>) / <xi>
  };

  PhaseTable table(double tau) const {
    PhaseTable t;
    t.cos_t.resize(grid_->size());
    t.sinc_t.resize(grid_->size());
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) {
      const double jp = grid_->jp(idx);
      t.cos_t[idx] = std::cos(tau * jp);
      t.sinc_t[idx] = std::sin(tau * jp) / jp;
    }
    return t;
  }

  void linear(SpinorField& psi, const PhaseTable& t) const {
    psi.to_spectral();
    const FourierGrid& g = *grid_;
    const int n = g.n();
    const std::size_t nodes = g.size();
    cplx* c0 = psi.component(0);
    cplx* c1p = psi.component(1);
    cplx* c2 = psi.component(2);
    cplx* c3 = psi.component(3);
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz) {
      const double kz = g.k_axis(iz);
      for (int iy = 0; iy < n; ++iy) {
        const double ky = g.k_axis(iy);
        for (int ix = 0; ix < n; ++ix, ++idx) {
          const double kx = g.k_axis(ix);
          const std::array<cplx, 4> v{c0[idx], c1p[idx], c2[idx], c3[idx]};
          const auto hv = apply_hamiltonian({kx, ky, kz}, v);
          const double c = t.cos_t[idx];
          const cplx s(0.0, -t.sinc_t[idx]);
          c0[idx] = c * v[0] + s * hv[0];
          c1p[idx] = c * v[1] + s * hv[1];
          c2[idx] = c * v[2] + s * hv[2];
          c3[idx] = c * v[3] + s * hv[3];
        }
      }
    }
    (void)nodes;
    if (dealias_)
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!inside_two_thirds(g, i))
          for (int c = 0; c < 4; ++c) psi.at(c, i) = 0.0;
    psi.to_physical();
  }

  GridPtr grid_;
  double c1_;
  double dt_;
  CoulombSolver solver_;
  bool dealias_;
  GaugeConvention gauge_;
  double gauge_lambda_;
  PhaseTable half_;
  PhaseTable full_;
};

/// One Strang step of size dt (dt may be negative for the time-reversed step).
inline SpinorField strang_step(const SpinorField& psi, double dt, double c1,
                               CoulombMode mode = CoulombMode::periodic) {
  SpinorField out = transformed(psi, Representation::physical);
  SplitStepper(psi.grid_ptr(), c1, dt, mode).step(out);
  if (!out.all_finite()) throw InstabilityError("strang_step: non-finite field values", 0.0);
  return out;
}

/// Time-reversed step: applying it after strang_step(psi, dt) returns psi.
inline SpinorField strang_step_reversed(const SpinorField& psi, double dt, double c1,
                                        CoulombMode mode = CoulombMode::periodic) {
  return strang_step(psi, -dt, c1, mode);
}

/// f_theta = e^{theta i t <D>} Pi_theta psi, spectral representation.
inline SpinorField interaction_profile_field(const SpinorField& psi, double t, Sign theta) {
  SpinorField f = project(transformed(psi, Representation::spectral), theta);
  return half_kg_propagate(f, -t, theta);
}

struct DiagnosticsRow {
  double time = 0.0;
  double mass = 0.0;
  double mass_drift = 0.0;
  double linf = 0.0;
  double hk = 0.0;
  double weighted_a1_plus = 0.0;
  double weighted_a1_minus = 0.0;
  double weighted_a2_plus = 0.0;
  double weighted_a2_minus = 0.0;
  double xi_sup_plus = 0.0;
  double xi_sup_minus = 0.0;
  double hartree_w2inf = 0.0;
};

/// Norm components at one time. `hartree_solver` may be null to skip the
/// W^{2,inf} evaluation of N(psi,psi,psi).
inline DiagnosticsRow diagnose(const SpinorField& psi_phys, double t, double mass0, int hk_order, double weight_power,
                               const CoulombSolver* hartree_solver) {
  DiagnosticsRow r;
  r.time = t;
  r.mass = psi_phys.l2_norm();
  r.mass_drift = mass0 > 0.0 ? std::abs(r.mass - mass0) / mass0 : std::abs(r.mass - mass0);
  r.linf = sup_norm(psi_phys);
  const SpinorField spec = transformed(psi_phys, Representation::spectral);
  r.hk = spectral_sobolev_norm(spec, hk_order);
  for (Sign s : both_signs) {
    const SpinorField f = interaction_profile_field(spec, t, s);
    const double a1 = weighted_norm(f, 1, 2.0);
    const double a2 = weighted_norm(f, 2, 2.0);
    const double sup = fourier_weighted_sup(f, weight_power);
    if (s == Sign::plus) {
      r.weighted_a1_plus = a1;
      r.weighted_a2_plus = a2;
      r.xi_sup_plus = sup;
    } else {
      r.weighted_a1_minus = a1;
      r.weighted_a2_minus = a2;
      r.xi_sup_minus = sup;
    }
  }
  if (hartree_solver != nullptr) r.hartree_w2inf = w_k_inf_norm(hartree_term(psi_phys, psi_phys, psi_phys, *hartree_solver), 2);
  return r;
}

struct TrajectoryState {
  SpinorField psi;  ///< physical representation
  double time = 0.0;
  std::vector<DiagnosticsRow> diagnostics;
};

/// Called at every snapshot with the physical field.
using SnapshotObserver = std::function<void(double t, const SpinorField& psi)>;

/// Advances to t_final, recording diagnostics (and notifying the observer) at
/// every snapshot time.
inline TrajectoryState evolve(const RunConfig& config, const SnapshotObserver& observer = {}) {
  config.validate();
  GridPtr grid = make_grid(config.n, config.box_length);
  SpinorField psi = make_initial_data(grid, config.data);
  SplitStepper stepper(grid, config.c1(), config.dt, config.coulomb, config.dealias, config.gauge, config.gauge_lambda);
  std::optional<CoulombSolver> diag_solver;
  if (config.hartree_diagnostic) diag_solver.emplace(grid, CoulombMode::free_space);
  const double mass0 = psi.l2_norm();

  TrajectoryState state{psi, 0.0, {}};
  long current = 0;
  for (long step : config.snapshot_steps()) {
    stepper.steps(state.psi, step - current);
    current = step;
    state.time = static_cast<double>(step) * config.dt;
    if (!state.psi.all_finite()) throw InstabilityError("evolve: non-finite field at t=" + std::to_string(state.time), state.time);
    const DiagnosticsRow row = diagnose(state.psi, state.time, mass0, config.hk_order, config.phase.weight_power,
                                        diag_solver ? &*diag_solver : nullptr);
    if (row.mass > (1.0 + config.instability_threshold) * mass0 + 1e-300) {
      std::ostringstream os;
      os << "evolve: L2 norm grew from " << mass0 << " to " << row.mass << " at t=" << state.time;
      throw InstabilityError(os.str(), state.time);
    }
    state.diagnostics.push_back(row);
    if (observer) observer(state.time, state.psi);
  }
  return state;
}

struct NonlinearDecayFit {
  LineFit linf;
  LineFit hartree;
  bool has_hartree = false;
};

/// Log-log slopes of ||psi||_inf and ||N(psi,psi,psi)||_{W^{2,inf}} over
/// snapshots with t in [t_lo, t_hi].
inline NonlinearDecayFit nonlinear_decay_scan(const std::vector<DiagnosticsRow>& rows, double t_lo, double t_hi) {
  std::vector<double> t, linf, hw;
  for (const auto& r : rows)
    if (r.time >= t_lo && r.time <= t_hi) {
      t.push_back(r.time);
      linf.push_back(r.linf);
      hw.push_back(r.hartree_w2inf);
    }
  if (t.size() < 5) throw std::invalid_argument("nonlinear_decay_scan: need >= 5 snapshots in the fit window");
  NonlinearDecayFit fit;
  fit.linf = fit_loglog(t, linf);
  fit.has_hartree = std::all_of(hw.begin(), hw.end(), [](double v) { return v > 0.0; });
  if (fit.has_hartree) fit.hartree = fit_loglog(t, hw);
  return fit;
}

}  // namespace dirscat
