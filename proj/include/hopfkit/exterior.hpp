#pragma once

// Second-order central-difference exterior derivative on periodic grids.
// d on 0-forms is grad, on 1-forms curl, on 2-forms (vector proxies) div.

#include "hopfkit/grid.hpp"

#include <variant>

namespace hopfkit {

namespace detail {
inline double central(const std::span<const double> f, const GridSpec3& g, int i, int j, int k, int axis) {
  const int di = axis == 0, dj = axis == 1, dk = axis == 2;
  return (f[g.wrap_index(i + di, j + dj, k + dk)] - f[g.wrap_index(i - di, j - dj, k - dk)]) /
         (2.0 * g.spacing(axis));
}
}  // namespace detail

inline VectorField3 fd_grad(const ScalarField3& f) {
  const auto& g = f.grid();
  VectorField3 out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        out.set(g.index(i, j, k), {detail::central(f.samples(), g, i, j, k, 0),
                                   detail::central(f.samples(), g, i, j, k, 1),
                                   detail::central(f.samples(), g, i, j, k, 2)});
  return out;
}

inline VectorField3 fd_curl(const VectorField3& v) {
  const auto& g = v.grid();
  require(v.sampled(), ErrorKind::invalid_argument, "fd_curl needs a sampled field");
  VectorField3 out(g);
  const auto vx = v.component(0), vy = v.component(1), vz = v.component(2);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        using detail::central;
        out.set(g.index(i, j, k),
                {central(vz, g, i, j, k, 1) - central(vy, g, i, j, k, 2),
                 central(vx, g, i, j, k, 2) - central(vz, g, i, j, k, 0),
                 central(vy, g, i, j, k, 0) - central(vx, g, i, j, k, 1)});
      }
  return out;
}

inline ScalarField3 fd_div(const VectorField3& v) {
  const auto& g = v.grid();
  require(v.sampled(), ErrorKind::invalid_argument, "fd_div needs a sampled field");
  ScalarField3 out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        out[g.index(i, j, k)] = detail::central(v.component(0), g, i, j, k, 0) +
                                detail::central(v.component(1), g, i, j, k, 1) +
                                detail::central(v.component(2), g, i, j, k, 2);
  return out;
}

using FormField = std::variant<ScalarField3, VectorField3>;

/// d acting on a 0-form (degree 0) or on a 1-/2-form proxy (degree 1, 2).
inline FormField exterior_derivative(const FormField& field, int degree) {
  require(degree >= 0 && degree <= 2, ErrorKind::invalid_argument,
          "exterior_derivative: degree must be 0, 1 or 2, got " + std::to_string(degree));
  if (degree == 0) {
    const auto* f = std::get_if<ScalarField3>(&field);
    require(f != nullptr, ErrorKind::invalid_argument, "degree 0 expects a scalar field");
    f->grid().validate();
    return fd_grad(*f);
  }
  const auto* v = std::get_if<VectorField3>(&field);
  require(v != nullptr, ErrorKind::invalid_argument, "degree 1/2 expects a vector field");
  v->grid().validate();
  if (degree == 1) return fd_curl(*v);
  return fd_div(*v);
}

/// Least-squares slope of log(err) against log(h).
inline double convergence_order(std::span<const double> h, std::span<const double> err) {
  require(h.size() == err.size() && h.size() >= 2, ErrorKind::invalid_argument,
          "convergence_order needs >= 2 matched samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace hopfkit
