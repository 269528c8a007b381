#pragma once

// Scalar and four-spinor fields on a FourierGrid.
//
// Transform normalization (discrete analogue of F f(xi) = int e^{-ix.xi} f dx):
//   forward:  f^(xi_k) = dx^3 * sum_j e^{-i x_j . xi_k} f(x_j)
//   inverse:  f(x_j)   = L^{-3} * sum_k e^{+i x_j . xi_k} f^(xi_k)
// so that ||f||_{L^2}^2 = dx^3 sum |f|^2 = L^{-3} sum |f^|^2 (Parseval).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "dirscat/fft.hpp"
#include "dirscat/grid.hpp"

namespace dirscat {

enum class Representation { physical, spectral };

inline const char* to_string(Representation r) { return r == Representation::physical ? "physical" : "spectral"; }

namespace detail {

template <int Components>
class FieldBase {
 public:
  static constexpr int components = Components;

  FieldBase() = default;
  FieldBase(GridPtr grid, Representation rep)
      : grid_(std::move(grid)), rep_(rep), data_(grid_->size() * Components, cplx{0.0, 0.0}) {}

  const FourierGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Representation representation() const { return rep_; }
  bool is_spectral() const { return rep_ == Representation::spectral; }
  std::size_t nodes() const { return grid_->size(); }

  cplx* component(int c) { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  const cplx* component(int c) const { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  cplx& at(int c, std::size_t idx) { return data_[static_cast<std::size_t>(c) * nodes() + idx]; }
  const cplx& at(int c, std::size_t idx) const { return data_[static_cast<std::size_t>(c) * nodes() + idx]; }

  ComplexBuffer& raw() { return data_; }
  const ComplexBuffer& raw() const { return data_; }

  /// Relabels the representation without touching the data.
  void set_representation(Representation rep) { rep_ = rep; }

  void to_spectral() {
    if (rep_ == Representation::spectral) return;
    fft_inplace(data_.data(), grid_->n(), Components, FftDirection::forward);
    scale(grid_->cell_volume());
    rep_ = Representation::spectral;
  }
  void to_physical() {
    if (rep_ == Representation::physical) return;
    fft_inplace(data_.data(), grid_->n(), Components, FftDirection::inverse);
    scale(1.0 / grid_->box_volume());
    rep_ = Representation::physical;
  }

  void scale(double s) {
    for (auto& v : data_) v *= s;
  }
  void scale(cplx s) {
    for (auto& v : data_) v *= s;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
  }

  /// Squared pointwise magnitude summed over components.
  double node_norm2(std::size_t idx) const {
    double s = 0.0;
    for (int c = 0; c < Components; ++c) s += std::norm(at(c, idx));
    return s;
  }

  /// L^2 norm using the quadrature of the current representation.
  double l2_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    const double w = is_spectral() ? grid_->spectral_weight() : grid_->cell_volume();
    return std::sqrt(s * w);
  }

 protected:
  GridPtr grid_;
  Representation rep_ = Representation::physical;
  ComplexBuffer data_;
};

}  // namespace detail

class ScalarField : public detail::FieldBase<1> {
 public:
  using FieldBase::FieldBase;
  cplx& operator[](std::size_t idx) { return data_[idx]; }
  const cplx& operator[](std::size_t idx) const { return data_[idx]; }
};

class SpinorField : public detail::FieldBase<4> {
 public:
  using FieldBase::FieldBase;
};

template <class Field>
Field transformed(Field f, Representation target) {
  if (target == Representation::spectral)
    f.to_spectral();
  else
    f.to_physical();
  return f;
}

template <class Field>
void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

template <class Field>
void require_representation(const Field& f, Representation rep, const char* what) {
  if (f.representation() != rep)
    throw std::invalid_argument(std::string(what) + ": expected " + to_string(rep) + " representation, got " +
                                to_string(f.representation()));
}

/// a*x + b*y, same grid and representation.
template <class Field>
Field linear_combination(cplx a, const Field& x, cplx b, const Field& y) {
  require_same_grid(x, y, "linear_combination");
  if (x.representation() != y.representation())
    throw std::invalid_argument("linear_combination: representation mismatch");
  Field out(x.grid_ptr(), x.representation());
  for (std::size_t i = 0; i < out.raw().size(); ++i) out.raw()[i] = a * x.raw()[i] + b * y.raw()[i];
  return out;
}

/// Max absolute difference over all stored values.
template <class Field>
double max_abs_difference(const Field& x, const Field& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.raw().size(); ++i) m = std::max(m, std::abs(x.raw()[i] - y.raw()[i]));
  return m;
}

template <class Field>
double max_abs(const Field& x) {
  double m = 0.0;
  for (const auto& v : x.raw()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace dirscat
