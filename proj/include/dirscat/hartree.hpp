#pragma once

// Hartree nonlinearity N(psi1, psi2, psi3) = (|x|^{-1} * <psi3, psi2>) psi1.
//
// Two Coulomb kernels are available:
//   periodic    4 pi / |xi|^2 on the box lattice, zero mode dropped (default).
//   free_space  truncated kernel 4 pi (1 - cos(R|xi|)) / |xi|^2 with R = sqrt(3) L,
//               applied by zero-padded convolution on a doubled grid. Exact
//               free-space convolution for densities supported in the box.

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirscat/field.hpp"
#include "dirscat/spectral.hpp"

namespace dirscat {

enum class CoulombMode { periodic, free_space };
enum class GaugeConvention { zero_mode_dropped, mean_field_shift };

inline const char* to_string(CoulombMode m) { return m == CoulombMode::periodic ? "periodic" : "free_space"; }
inline const char* to_string(GaugeConvention c) {
  return c == GaugeConvention::zero_mode_dropped ? "zero_mode_dropped" : "mean_field_shift";
}

/// Nodewise psi_a^dagger psi_b.
inline ScalarField inner_density(const SpinorField& a, const SpinorField& b) {
  require_same_grid(a, b, "inner_density");
  require_representation(a, Representation::physical, "inner_density");
  require_representation(b, Representation::physical, "inner_density");
  ScalarField out(a.grid_ptr(), Representation::physical);
  for (std::size_t idx = 0; idx < a.nodes(); ++idx) {
    cplx s{0.0, 0.0};
    for (int c = 0; c < 4; ++c) s += std::conj(a.at(c, idx)) * b.at(c, idx);
    out[idx] = s;
  }
  return out;
}

/// Periodic Coulomb symbol 4 pi / |xi|^2, zero at xi = 0.
inline double coulomb_symbol(const Vec3& xi) {
  const double k2 = dot(xi, xi);
  return k2 == 0.0 ? 0.0 : 4.0 * std::numbers::pi / k2;
}

/// Free-space truncated kernel transform 4 pi (1 - cos(R k)) / k^2.
inline double truncated_coulomb_symbol(double k, double radius) {
  if (k * radius < 1e-4) return 2.0 * std::numbers::pi * radius * radius * (1.0 - k * k * radius * radius / 12.0);
  const double s = std::sin(0.5 * k * radius);
  return 8.0 * std::numbers::pi * s * s / (k * k);
}

/// 2/3-rule mask on the lattice.
inline bool inside_two_thirds(const FourierGrid& g, std::size_t idx) {
  const auto ijk = g.unravel(idx);
  const int cut = g.n() / 3;
  for (int a = 0; a < 3; ++a)
    if (std::abs(g.mode(ijk[a])) > cut) return false;
  return true;
}

/// Applies |x|^{-1} * density on one grid. Holds the doubled-grid kernel
/// when configured for free-space convolution.
class CoulombSolver {
 public:
  explicit CoulombSolver(GridPtr grid, CoulombMode mode = CoulombMode::periodic, bool dealias = false)
      : grid_(std::move(grid)), mode_(mode), dealias_(dealias) {
    if (mode_ == CoulombMode::free_space) build_free_space_kernel();
  }

  CoulombMode mode() const { return mode_; }
  bool dealias() const { return dealias_; }
  const FourierGrid& grid() const { return *grid_; }

  /// Potential in physical representation. Real densities give real potentials.
  ScalarField potential(const ScalarField& density) const {
    if (!(density.grid() == *grid_)) throw std::invalid_argument("coulomb_potential: grid mismatch");
    ScalarField rho = transformed(density, Representation::physical);
    bool real_input = true;
    for (const auto& v : rho.raw())
      if (v.imag() != 0.0) {
        real_input = false;
        break;
      }
    if (dealias_) {
      rho.to_spectral();
      for (std::size_t idx = 0; idx < grid_->size(); ++idx)
        if (!inside_two_thirds(*grid_, idx)) rho[idx] = 0.0;
      rho.to_physical();
    }
    ScalarField v = mode_ == CoulombMode::periodic ? periodic_potential(rho) : free_space_potential(rho);
    if (real_input)
      for (auto& x : v.raw()) x = cplx(x.real(), 0.0);
    return v;
  }

 private:
  ScalarField periodic_potential(ScalarField rho) const {
    rho.to_spectral();
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) rho[idx] *= coulomb_symbol(grid_->wavenumber(idx));
    rho.to_physical();
    return rho;
  }

  ScalarField free_space_potential(const ScalarField& rho) const {
    const int n = grid_->n();
    const int n2 = 2 * n;
    const std::size_t big = static_cast<std::size_t>(n2) * n2 * n2;
    ComplexBuffer pad(big, cplx{0.0, 0.0});
    auto padded_index = [&](int i) { return (grid_->mode(i) + n2) % n2; };
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          pad[padded_index(ix) + static_cast<std::size_t>(n2) * (padded_index(iy) + static_cast<std::size_t>(n2) * padded_index(iz))] =
              rho[grid_->index(ix, iy, iz)];
    fft_inplace(pad.data(), n2, 1, FftDirection::forward);
    for (std::size_t i = 0; i < big; ++i) pad[i] *= kernel_hat_[i];
    fft_inplace(pad.data(), n2, 1, FftDirection::inverse);
    ScalarField out(grid_, Representation::physical);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          out[grid_->index(ix, iy, iz)] =
              pad[padded_index(ix) + static_cast<std::size_t>(n2) * (padded_index(iy) + static_cast<std::size_t>(n2) * padded_index(iz))];
    return out;
  }

  // Real-space kernel samples come from the band-limited inverse transform of
  // the truncated symbol on a 4L-periodic lattice (cosine transform of the
  // even octant), then are transformed on the 2L-periodic doubled grid.
  void build_free_space_kernel() {
    const int n = grid_->n();
    const int n2 = 2 * n;
    const int m = n2 + 1;
    const double dx = grid_->dx();
    const double period = 4.0 * grid_->box_length();
    const double radius = std::sqrt(3.0) * grid_->box_length();
    const double dk = 2.0 * std::numbers::pi / period;
    const std::size_t octant = static_cast<std::size_t>(m) * m * m;
    std::unique_ptr<double[], decltype(&fftw_free)> buf(static_cast<double*>(fftw_malloc(octant * sizeof(double))),
                                                        &fftw_free);
    if (!buf) throw std::bad_alloc();
    for (int c = 0; c < m; ++c)
      for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
          const double k = dk * std::sqrt(double(a) * a + double(b) * b + double(c) * c);
          buf[a + static_cast<std::size_t>(m) * (b + static_cast<std::size_t>(m) * c)] =
              truncated_coulomb_symbol(k, radius);
        }
    {
      fftw_plan p = fftw_plan_r2r_3d(m, m, m, buf.get(), buf.get(), FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00,
                                     FFTW_ESTIMATE);
      if (p == nullptr) throw std::runtime_error("coulomb: cosine-transform plan failed");
      fftw_execute(p);
      fftw_destroy_plan(p);
    }
    const double inv_period3 = 1.0 / (period * period * period);
    const std::size_t big = static_cast<std::size_t>(n2) * n2 * n2;
    ComplexBuffer g(big);
    auto fold = [&](int j) { return j <= n ? j : n2 - j; };
    for (int iz = 0; iz < n2; ++iz)
      for (int iy = 0; iy < n2; ++iy)
        for (int ix = 0; ix < n2; ++ix) {
          const double v =
              buf[fold(ix) + static_cast<std::size_t>(m) * (fold(iy) + static_cast<std::size_t>(m) * fold(iz))] *
              inv_period3;
          g[ix + static_cast<std::size_t>(n2) * (iy + static_cast<std::size_t>(n2) * iz)] = cplx(v, 0.0);
        }
    fft_inplace(g.data(), n2, 1, FftDirection::forward);
    const double scale = dx * dx * dx / static_cast<double>(big);
    kernel_hat_.resize(big);
    for (std::size_t i = 0; i < big; ++i) kernel_hat_[i] = g[i].real() * scale;
  }

  GridPtr grid_;
  CoulombMode mode_;
  bool dealias_;
  std::vector<double> kernel_hat_;
};

/// |x|^{-1} * density with the default periodic kernel.
inline ScalarField coulomb_potential(const ScalarField& density) {
  return CoulombSolver(density.grid_ptr()).potential(density);
}

/// Pointwise V psi for a physical potential and spinor.
inline SpinorField multiply_potential(const ScalarField& v, const SpinorField& psi) {
  require_representation(psi, Representation::physical, "multiply_potential");
  SpinorField out = psi;
  for (std::size_t idx = 0; idx < psi.nodes(); ++idx)
    for (int c = 0; c < 4; ++c) out.at(c, idx) *= v[idx];
  return out;
}

/// (|x|^{-1} * <psi3, psi2>) psi1
inline SpinorField hartree_term(const SpinorField& psi1, const SpinorField& psi2, const SpinorField& psi3,
                                const CoulombSolver& solver) {
  require_same_grid(psi1, psi2, "hartree_term");
  require_same_grid(psi1, psi3, "hartree_term");
  const SpinorField p1 = transformed(psi1, Representation::physical);
  const ScalarField density =
      inner_density(transformed(psi3, Representation::physical), transformed(psi2, Representation::physical));
  return multiply_potential(solver.potential(density), p1);
}

inline SpinorField hartree_term(const SpinorField& psi1, const SpinorField& psi2, const SpinorField& psi3) {
  return hartree_term(psi1, psi2, psi3, CoulombSolver(psi1.grid_ptr()));
}

/// Phase rate (per unit time) of the spatially uniform gauge phase implied by
/// the zero-mode convention. zero_mode_dropped: 0. mean_field_shift:
/// c1 * lambda * M0 / V0 with M0 = integral of the density, V0 = box volume.
inline double gauge_phase_rate(const ScalarField& density, double c1, GaugeConvention convention,
                               double lambda = 0.0) {
  if (convention == GaugeConvention::zero_mode_dropped) return 0.0;
  const ScalarField rho = transformed(density, Representation::physical);
  double mass = 0.0;
  for (const auto& v : rho.raw()) mass += v.real();
  mass *= rho.grid().cell_volume();
  return c1 * lambda * mass / rho.grid().box_volume();
}

}  // namespace dirscat
