#pragma once

// Exact linear evolution: the half Klein-Gordon flows e^{-theta i t <D>} and
// the free Dirac group U(t) = e^{-it<D>} Pi_+ + e^{it<D>} Pi_-.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dirscat/dirac.hpp"
#include "dirscat/field.hpp"
#include "dirscat/fit.hpp"

namespace dirscat {

inline void require_finite_time(double t, const char* what) {
  if (!std::isfinite(t)) throw std::invalid_argument(std::string(what) + ": non-finite time");
}

/// Multiplies spectral coefficients by e^{-theta i t <xi>}.
inline SpinorField half_kg_propagate(const SpinorField& f, double t, Sign theta) {
  require_finite_time(t, "half_kg_propagate");
  const double sv = value(theta);
  return detail::with_spectral(f, [&](SpinorField& w) {
    const FourierGrid& g = w.grid();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double ph = -sv * t * g.jp(idx);
      const cplx e(std::cos(ph), std::sin(ph));
      for (int c = 0; c < 4; ++c) w.at(c, idx) *= e;
    }
  });
}

/// In-place U(t) on a spectral field: cos(t<xi>) v - i sin(t<xi>) H(xi) v / <xi>.
inline void apply_free_dirac_spectral(SpinorField& spec, double t) {
  require_representation(spec, Representation::spectral, "free_dirac");
  const FourierGrid& g = spec.grid();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double jp = g.jp(idx);
    const double c = std::cos(t * jp);
    const double s = std::sin(t * jp) / jp;
    const std::array<cplx, 4> v{spec.at(0, idx), spec.at(1, idx), spec.at(2, idx), spec.at(3, idx)};
    const auto hv = apply_hamiltonian(g.wavenumber(idx), v);
    for (int k = 0; k < 4; ++k) spec.at(k, idx) = c * v[k] - cplx(0.0, s) * hv[k];
  }
}

/// U(t) psi0, the solution of the linear Dirac equation.
inline SpinorField free_dirac(const SpinorField& psi0, double t) {
  require_finite_time(t, "free_dirac");
  return detail::with_spectral(psi0, [t](SpinorField& w) { apply_free_dirac_spectral(w, t); });
}

/// ||(d_t + alpha.grad + i beta) U(t) psi0||_{L^2} with a centered difference
/// of step dt in time and exact spectral space derivatives.
inline double dirac_residual(const SpinorField& psi0, double t, double dt = 1e-3) {
  const SpinorField fwd = transformed(free_dirac(psi0, t + dt), Representation::spectral);
  const SpinorField bwd = transformed(free_dirac(psi0, t - dt), Representation::spectral);
  const SpinorField mid = transformed(free_dirac(psi0, t), Representation::spectral);
  SpinorField res(psi0.grid_ptr(), Representation::spectral);
  const FourierGrid& g = res.grid();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const std::array<cplx, 4> v{mid.at(0, idx), mid.at(1, idx), mid.at(2, idx), mid.at(3, idx)};
    const auto hv = apply_hamiltonian(g.wavenumber(idx), v);
    for (int c = 0; c < 4; ++c)
      res.at(c, idx) = (fwd.at(c, idx) - bwd.at(c, idx)) / (2.0 * dt) + cplx(0.0, 1.0) * hv[c];
  }
  return res.l2_norm();
}

/// Torus horizon: unit-bounded group speed re-enters the box after L/2.
inline double wraparound_horizon(const FourierGrid& g) { return 0.5 * g.box_length(); }

struct DecaySample {
  double t = 0.0;
  double sup = 0.0;
  double l2 = 0.0;  ///< physical-space L^2 norm after the round trip
};

/// ||U(t) psi0||_{L^inf} (max over nodes of the C^4 Euclidean norm) at each time.
inline std::vector<DecaySample> decay_scan(const SpinorField& psi0, const std::vector<double>& times) {
  const double horizon = wraparound_horizon(psi0.grid());
  for (double t : times)
    if (std::abs(t) > horizon)
      throw std::invalid_argument("decay_scan: time " + std::to_string(t) + " beyond wrap-around horizon " +
                                  std::to_string(horizon));
  const SpinorField spec = transformed(psi0, Representation::spectral);
  std::vector<DecaySample> out;
  out.reserve(times.size());
  for (double t : times) {
    SpinorField w = spec;
    apply_free_dirac_spectral(w, t);
    w.to_physical();
    out.push_back({t, sup_norm(w), w.l2_norm()});
  }
  return out;
}

/// Log-log slope of the sup norm over samples with t in [t_lo, t_hi].
inline LineFit decay_slope(const std::vector<DecaySample>& samples, double t_lo, double t_hi) {
  std::vector<double> t, v;
  for (const auto& s : samples)
    if (s.t >= t_lo && s.t <= t_hi) {
      t.push_back(s.t);
      v.push_back(s.sup);
    }
  return fit_loglog(t, v);
}

}  // namespace dirscat
