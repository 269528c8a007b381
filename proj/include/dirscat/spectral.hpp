#pragma once

// Fourier multipliers, Littlewood-Paley pieces and the norms that make up
// the a-priori solution norm (H^s, weighted H^2, <xi>^w L^inf_xi, W^{k,inf}).
//
// Multipliers accept either representation and return the result in the
// representation of the input. Reductions are sequential in node order, so
// results are bitwise reproducible.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "dirscat/field.hpp"

namespace dirscat {

using Mat4 = Eigen::Matrix4cd;
using Spinor4 = Eigen::Vector4cd;

namespace detail {

inline void check_finite_symbol(const cplx& v, const Vec3& xi) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw std::domain_error("apply_multiplier: non-finite symbol at xi=(" + std::to_string(xi[0]) + "," +
                            std::to_string(xi[1]) + "," + std::to_string(xi[2]) + ")");
}

template <class Field, class Body>
Field with_spectral(const Field& in, Body&& body) {
  Field work = in;
  const Representation original = in.representation();
  work.to_spectral();
  body(work);
  if (original == Representation::physical) work.to_physical();
  return work;
}

}  // namespace detail

/// Output coefficients = symbol(xi) * input coefficients. `symbol` returns a
/// scalar (any field) or a 4x4 matrix (spinor fields only).
template <class Field, class Symbol>
Field apply_multiplier(const Field& in, Symbol&& symbol) {
  using Result = std::invoke_result_t<Symbol&, const Vec3&>;
  return detail::with_spectral(in, [&](Field& f) {
    const FourierGrid& g = f.grid();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const Vec3 xi = g.wavenumber(idx);
      if constexpr (std::is_convertible_v<Result, cplx>) {
        const cplx s = symbol(xi);
        detail::check_finite_symbol(s, xi);
        for (int c = 0; c < Field::components; ++c) f.at(c, idx) *= s;
      } else {
        static_assert(Field::components == 4, "matrix symbols apply to spinor fields only");
        const Mat4 m = symbol(xi);
        for (int i = 0; i < 16; ++i) detail::check_finite_symbol(m(i / 4, i % 4), xi);
        Spinor4 v;
        for (int c = 0; c < 4; ++c) v(c) = f.at(c, idx);
        const Spinor4 w = m * v;
        for (int c = 0; c < 4; ++c) f.at(c, idx) = w(c);
      }
    }
  });
}

/// P_N f with symbol rho_N.
template <class Field>
Field littlewood_paley(const Field& in, Dyadic n) {
  const double nv = n.value();
  return apply_multiplier(in, [nv](const Vec3& xi) { return cplx{bump::rho_dyadic(xi, nv), 0.0}; });
}

/// P_{<=N} f with symbol rho(xi/N).
template <class Field>
Field low_pass(const Field& in, Dyadic n) {
  const double nv = n.value();
  return apply_multiplier(in, [nv](const Vec3& xi) { return cplx{bump::rho_low(xi, nv), 0.0}; });
}

/// sqrt(L^-3 sum <xi>^{2s} |f^|^2) on a spectral field.
template <class Field>
double spectral_sobolev_norm(const Field& spec, double s) {
  require_representation(spec, Representation::spectral, "sobolev_norm");
  const FourierGrid& g = spec.grid();
  double acc = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) acc += std::pow(g.jp(idx), 2.0 * s) * spec.node_norm2(idx);
  return std::sqrt(acc * g.spectral_weight());
}

/// ||<D>^s f||_{L^2}
template <class Field>
double sobolev_norm(const Field& f, double s) {
  if (f.is_spectral()) return spectral_sobolev_norm(f, s);
  return spectral_sobolev_norm(transformed(f, Representation::spectral), s);
}

/// ||<x>^a f||_{H^s} with <x> built from box coordinates folded to [-L/2, L/2).
template <class Field>
double weighted_norm(const Field& f, int weight_power, double s = 2.0) {
  Field phys = transformed(f, Representation::physical);
  const FourierGrid& g = phys.grid();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 x = g.position(idx);
    const double w = std::pow(1.0 + dot(x, x), 0.5 * weight_power);
    for (int c = 0; c < Field::components; ++c) phys.at(c, idx) *= w;
  }
  return sobolev_norm(phys, s);
}

/// max over nodes of the Euclidean C^k norm (physical representation).
template <class Field>
double sup_norm(const Field& f) {
  require_representation(f, Representation::physical, "sup_norm");
  double m = 0.0;
  for (std::size_t idx = 0; idx < f.nodes(); ++idx) m = std::max(m, f.node_norm2(idx));
  return std::sqrt(m);
}

/// ||<xi>^w f^||_{L^inf_xi} on a spectral field.
template <class Field>
double fourier_weighted_sup(const Field& spec, double w) {
  require_representation(spec, Representation::spectral, "fourier_weighted_sup");
  const FourierGrid& g = spec.grid();
  double m = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    m = std::max(m, std::pow(g.jp(idx), w) * std::sqrt(spec.node_norm2(idx)));
  return m;
}

/// Multi-indices with |alpha| <= order.
inline std::vector<std::array<int, 3>> multi_indices(int order) {
  std::vector<std::array<int, 3>> out;
  for (int total = 0; total <= order; ++total)
    for (int a = total; a >= 0; --a)
      for (int b = total - a; b >= 0; --b) out.push_back({a, b, total - a - b});
  return out;
}

/// Spectral derivative d^alpha f (returned in physical representation).
/// Odd derivatives drop the Nyquist mode so that real fields stay real.
template <class Field>
Field spectral_derivative(const Field& spec, const std::array<int, 3>& alpha) {
  require_representation(spec, Representation::spectral, "spectral_derivative");
  Field out = spec;
  const FourierGrid& g = spec.grid();
  const int half = g.n() / 2;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.unravel(idx);
    cplx factor{1.0, 0.0};
    for (int ax = 0; ax < 3; ++ax) {
      if (alpha[ax] == 0) continue;
      if (ijk[ax] == half && alpha[ax] % 2 == 1) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(cplx{0.0, g.k_axis(ijk[ax])}, alpha[ax]);
    }
    for (int c = 0; c < Field::components; ++c) out.at(c, idx) *= factor;
  }
  out.to_physical();
  return out;
}

/// ||f||_{W^{k,inf}} = sum_{|alpha|<=k} ||d^alpha f||_{L^inf}.
template <class Field>
double w_k_inf_norm(const Field& f, int order) {
  const Field spec = transformed(f, Representation::spectral);
  double total = 0.0;
  for (const auto& alpha : multi_indices(order)) total += sup_norm(spectral_derivative(spec, alpha));
  return total;
}

}  // namespace dirscat
