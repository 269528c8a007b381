#pragma once

// Periodic box discretization of R^3: node coordinates, the folded wavenumber
// lattice, Japanese bracket <xi>, and the dyadic bump profile.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirscat {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// <xi> = (1 + |xi|^2)^{1/2}
inline double japanese(const Vec3& xi) { return std::sqrt(1.0 + dot(xi, xi)); }

/// Dyadic number N = 2^exponent.
struct Dyadic {
  int exponent = 0;
  double value() const { return std::ldexp(1.0, exponent); }
  friend bool operator==(Dyadic, Dyadic) = default;
};

namespace bump {

inline double smooth_step_tail(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

/// Radial profile: 1 on [0,1], 0 on [2,inf), C-infinity in between.
inline double radial(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = smooth_step_tail(2.0 - r);
  const double b = smooth_step_tail(r - 1.0);
  return a / (a + b);
}

inline double rho(const Vec3& xi) { return radial(norm(xi)); }

/// rho_N(xi) = rho(xi/N) - rho(2 xi/N)
inline double rho_dyadic(const Vec3& xi, double n) {
  const double r = norm(xi);
  return radial(r / n) - radial(2.0 * r / n);
}

/// rho_{<=N} = 1 - sum_{M>N} rho_M, which telescopes to rho(xi/N).
inline double rho_low(const Vec3& xi, double n) { return radial(norm(xi) / n); }

/// rho_N/2 + rho_N + rho_2N
inline double rho_tilde(const Vec3& xi, double n) {
  return rho_dyadic(xi, 0.5 * n) + rho_dyadic(xi, n) + rho_dyadic(xi, 2.0 * n);
}

}  // namespace bump

/// Cubic periodic box of side L with n nodes per axis. Node (ix,iy,iz) is
/// stored at ix + n*(iy + n*iz); x runs fastest.
class FourierGrid {
 public:
  FourierGrid(int n_per_axis, double box_length) : n_(n_per_axis), length_(box_length) {
    if (n_per_axis < 8 || n_per_axis % 2 != 0)
      throw std::invalid_argument("grid: n_per_axis must be even and >= 8, got " + std::to_string(n_per_axis));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
      throw std::invalid_argument("grid: box_length must be positive and finite");
    dx_ = length_ / n_;
    dk_ = 2.0 * std::numbers::pi / length_;
    k1d_.resize(n_);
    x1d_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const int m = i < n_ / 2 ? i : i - n_;
      k1d_[i] = dk_ * m;
      x1d_[i] = dx_ * m;
    }
    jp_.resize(size());
    for (std::size_t idx = 0; idx < size(); ++idx) jp_[idx] = japanese(wavenumber(idx));
  }

  int n() const { return n_; }
  double box_length() const { return length_; }
  double dx() const { return dx_; }
  double dk() const { return dk_; }
  double cell_volume() const { return dx_ * dx_ * dx_; }
  double box_volume() const { return length_ * length_ * length_; }
  /// Spectral quadrature weight dxi/(2pi)^3 = 1/L^3.
  double spectral_weight() const { return 1.0 / box_volume(); }
  /// Largest per-axis wavenumber magnitude, pi*n/L.
  double xi_max() const { return std::numbers::pi * n_ / length_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n_) * (iy + static_cast<std::size_t>(n_) * iz);
  }
  std::array<int, 3> unravel(std::size_t idx) const {
    const int ix = static_cast<int>(idx % n_);
    const int iy = static_cast<int>((idx / n_) % n_);
    const int iz = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
    return {ix, iy, iz};
  }

  /// Per-axis wavenumber at index i, folded to [-pi n/L, pi n/L).
  double k_axis(int i) const { return k1d_[i]; }
  /// Per-axis physical coordinate, folded to [-L/2, L/2).
  double x_axis(int i) const { return x1d_[i]; }
  /// Integer lattice mode at index i, in [-n/2, n/2).
  int mode(int i) const { return i < n_ / 2 ? i : i - n_; }
  int index_of_mode(int m) const { return ((m % n_) + n_) % n_; }

  Vec3 wavenumber(std::size_t idx) const {
    const auto [ix, iy, iz] = unravel(idx);
    return {k1d_[ix], k1d_[iy], k1d_[iz]};
  }
  Vec3 position(std::size_t idx) const {
    const auto [ix, iy, iz] = unravel(idx);
    return {x1d_[ix], x1d_[iy], x1d_[iz]};
  }
  /// Unfolded node coordinate (ix*dx, ...), used for plane waves.
  Vec3 raw_position(std::size_t idx) const {
    const auto [ix, iy, iz] = unravel(idx);
    return {ix * dx_, iy * dx_, iz * dx_};
  }
  double jp(std::size_t idx) const { return jp_[idx]; }
  const std::vector<double>& jp_table() const { return jp_; }

  /// Index of -xi. Nyquist modes map to themselves.
  std::size_t negated(std::size_t idx) const {
    const auto [ix, iy, iz] = unravel(idx);
    return index((n_ - ix) % n_, (n_ - iy) % n_, (n_ - iz) % n_);
  }
  bool on_nyquist_plane(std::size_t idx) const {
    const auto [ix, iy, iz] = unravel(idx);
    return ix == n_ / 2 || iy == n_ / 2 || iz == n_ / 2;
  }

  /// Dyadic exponents j with 2^j covering every lattice |xi| up to the corner.
  int max_dyadic_exponent() const {
    return static_cast<int>(std::ceil(std::log2(std::sqrt(3.0) * xi_max()))) + 1;
  }

  friend bool operator==(const FourierGrid& a, const FourierGrid& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int n_;
  double length_;
  double dx_ = 0.0;
  double dk_ = 0.0;
  std::vector<double> k1d_;
  std::vector<double> x1d_;
  std::vector<double> jp_;
};

using GridPtr = std::shared_ptr<const FourierGrid>;

inline GridPtr make_grid(int n_per_axis, double box_length) {
  return std::make_shared<const FourierGrid>(n_per_axis, box_length);
}

}  // namespace dirscat
