#pragma once

#include "hopfkit/core.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hopfkit {

/// Uniform periodic grid on the box [origin, origin + length).
/// Node (i,j,k) sits at origin + (i hx, j hy, k hz); storage is row-major
/// with z fastest, which is also the FFT layout.
struct GridSpec3 {
  std::array<int, 3> n{16, 16, 16};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  static GridSpec3 cube(int count, double side, double lower = 0.0) {
    return {{count, count, count}, {side, side, side}, {lower, lower, lower}};
  }
  /// Cube of side L centred on the origin.
  static GridSpec3 centred(int count, double side) { return cube(count, side, -0.5 * side); }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      require(n[a] >= 4, ErrorKind::grid_too_small,
              "grid count per axis must be >= 4 (axis " + std::to_string(a) + " has " +
                  std::to_string(n[a]) + ")");
      require(length[a] > 0.0, ErrorKind::invalid_argument, "box lengths must be positive");
    }
  }

  double spacing(int axis) const { return length[axis] / n[axis]; }
  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }
  double volume() const { return length[0] * length[1] * length[2]; }
  double max_length() const { return std::max({length[0], length[1], length[2]}); }
  std::size_t size() const {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
           static_cast<std::size_t>(n[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n[1] + static_cast<std::size_t>(j)) * n[2] +
           static_cast<std::size_t>(k);
  }
  /// Periodic index, any integer offsets accepted.
  std::size_t wrap_index(int i, int j, int k) const {
    auto w = [](int v, int m) { return ((v % m) + m) % m; };
    return index(w(i, n[0]), w(j, n[1]), w(k, n[2]));
  }
  Vec3 node(int i, int j, int k) const {
    return {origin[0] + i * spacing(0), origin[1] + j * spacing(1), origin[2] + k * spacing(2)};
  }
  Vec3 node(std::size_t flat) const {
    const int k = static_cast<int>(flat % n[2]);
    const int j = static_cast<int>((flat / n[2]) % n[1]);
    const int i = static_cast<int>(flat / (static_cast<std::size_t>(n[1]) * n[2]));
    return node(i, j, k);
  }
  Vec3 lower() const { return {origin[0], origin[1], origin[2]}; }
  Vec3 upper() const { return {origin[0] + length[0], origin[1] + length[1], origin[2] + length[2]}; }
  double diameter() const { return norm(upper() - lower()); }

  friend bool operator==(const GridSpec3&, const GridSpec3&) = default;
};

/// Sampled scalar on a grid with an optional analytic closure.
class ScalarField3 {
public:
  ScalarField3() = default;
  explicit ScalarField3(GridSpec3 grid) : grid_(grid), data_(grid.size(), 0.0) { grid_.validate(); }
  ScalarField3(GridSpec3 grid, std::vector<double> samples) : grid_(grid), data_(std::move(samples)) {
    grid_.validate();
    require(data_.size() == grid_.size(), ErrorKind::mismatch, "sample count does not match grid");
  }

  static ScalarField3 sample(const GridSpec3& grid, ScalarFn f) {
    ScalarField3 s(grid);
    for (std::size_t q = 0; q < grid.size(); ++q) s.data_[q] = f(grid.node(q));
    s.closure_ = std::move(f);
    return s;
  }

  const GridSpec3& grid() const { return grid_; }
  std::span<const double> samples() const { return data_; }
  std::span<double> samples() { return data_; }
  double operator[](std::size_t q) const { return data_[q]; }
  double& operator[](std::size_t q) { return data_[q]; }
  double at(int i, int j, int k) const { return data_[grid_.wrap_index(i, j, k)]; }

  bool has_closure() const { return static_cast<bool>(closure_); }
  const ScalarFn& closure() const { return closure_; }
  void set_closure(ScalarFn f) { closure_ = std::move(f); }

private:
  GridSpec3 grid_;
  std::vector<double> data_;
  ScalarFn closure_;
};

/// Sampled 3-vector field. May also be closure-only (no samples), in which
/// case only pointwise evaluation is available.
class VectorField3 {
public:
  VectorField3() = default;
  explicit VectorField3(GridSpec3 grid) : grid_(grid) {
    grid_.validate();
    for (auto& c : comp_) c.assign(grid_.size(), 0.0);
  }
  VectorField3(GridSpec3 grid, std::array<std::vector<double>, 3> comps)
      : grid_(grid), comp_(std::move(comps)) {
    grid_.validate();
    for (const auto& c : comp_)
      require(c.size() == grid_.size(), ErrorKind::mismatch, "component size does not match grid");
  }

  static VectorField3 sample(const GridSpec3& grid, VectorFn f) {
    VectorField3 v(grid);
    for (std::size_t q = 0; q < grid.size(); ++q) v.set(q, f(grid.node(q)));
    v.closure_ = std::move(f);
    return v;
  }
  static VectorField3 analytic(VectorFn f, GridSpec3 grid = {}) {
    VectorField3 v;
    v.grid_ = grid;
    v.closure_ = std::move(f);
    return v;
  }

  const GridSpec3& grid() const { return grid_; }
  bool sampled() const { return !comp_[0].empty(); }
  std::span<const double> component(int a) const { return comp_[a]; }
  std::span<double> component(int a) { return comp_[a]; }
  Vec3 get(std::size_t q) const { return {comp_[0][q], comp_[1][q], comp_[2][q]}; }
  void set(std::size_t q, const Vec3& v) {
    comp_[0][q] = v.x;
    comp_[1][q] = v.y;
    comp_[2][q] = v.z;
  }
  std::size_t size() const { return comp_[0].size(); }

  bool has_closure() const { return static_cast<bool>(closure_); }
  const VectorFn& closure() const { return closure_; }
  void set_closure(VectorFn f) { closure_ = std::move(f); }
  void drop_closure() { closure_ = nullptr; }

  /// Pointwise value: the closure when present, otherwise periodic
  /// trilinear interpolation of the samples.
  Vec3 eval(const Vec3& p) const {
    if (closure_) return closure_(p);
    require(sampled(), ErrorKind::invalid_argument, "field has neither closure nor samples");
    return interpolate(p);
  }

  Vec3 interpolate(const Vec3& p) const {
    std::array<int, 3> i0{};
    std::array<double, 3> t{};
    for (int a = 0; a < 3; ++a) {
      const double u = (p[a] - grid_.origin[a]) / grid_.spacing(a);
      const double f = std::floor(u);
      i0[a] = static_cast<int>(f);
      t[a] = u - f;
    }
    Vec3 out;
    for (int di = 0; di < 2; ++di)
      for (int dj = 0; dj < 2; ++dj)
        for (int dk = 0; dk < 2; ++dk) {
          const double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dk ? t[2] : 1 - t[2]);
          out += w * get(grid_.wrap_index(i0[0] + di, i0[1] + dj, i0[2] + dk));
        }
    return out;
  }

  VectorField3& operator+=(const VectorField3& o) {
    require(grid_ == o.grid_, ErrorKind::mismatch, "grid mismatch");
    for (int a = 0; a < 3; ++a)
      for (std::size_t q = 0; q < size(); ++q) comp_[a][q] += o.comp_[a][q];
    closure_ = (closure_ && o.closure_) ? VectorFn([f = closure_, g = o.closure_](const Vec3& p) {
      return f(p) + g(p);
    })
                                        : nullptr;
    return *this;
  }
  VectorField3& operator*=(double s) {
    for (auto& c : comp_)
      for (double& x : c) x *= s;
    if (closure_) closure_ = [f = closure_, s](const Vec3& p) { return s * f(p); };
    return *this;
  }
  friend VectorField3 operator+(VectorField3 a, const VectorField3& b) { return a += b; }
  friend VectorField3 operator*(double s, VectorField3 a) { return a *= s; }
  friend VectorField3 operator-(const VectorField3& a) { return -1.0 * a; }

private:
  GridSpec3 grid_;
  std::array<std::vector<double>, 3> comp_;
  VectorFn closure_;
};

/// Periodic Riemann sum (spectrally accurate for smooth periodic data).
inline double integrate(const ScalarField3& f) {
  return pairwise_sum(f.samples()) * f.grid().cell_volume();
}

/// Riemann sum of a pointwise product, for helicity/energy densities.
template <class Density>
double integrate_density(const GridSpec3& grid, Density&& density) {
  std::vector<double> vals(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) vals[q] = density(q);
  return pairwise_sum(vals) * grid.cell_volume();
}

inline double sup_norm(const VectorField3& v) {
  double m = 0.0;
  for (std::size_t q = 0; q < v.size(); ++q) m = std::max(m, norm(v.get(q)));
  return m;
}

inline double sup_norm(const ScalarField3& s) {
  double m = 0.0;
  for (double x : s.samples()) m = std::max(m, std::abs(x));
  return m;
}

/// L2 norm (with the grid measure).
inline double l2_norm(const VectorField3& v) {
  return std::sqrt(integrate_density(v.grid(), [&](std::size_t q) { return norm2(v.get(q)); }));
}

inline double inner(const VectorField3& a, const VectorField3& b) {
  require(a.grid() == b.grid(), ErrorKind::mismatch, "grid mismatch in inner product");
  return integrate_density(a.grid(), [&](std::size_t q) { return dot(a.get(q), b.get(q)); });
}

/// Pointwise map of a sampled vector field to a scalar field.
template <class F>
ScalarField3 pointwise(const VectorField3& v, F&& f) {
  ScalarField3 s(v.grid());
  for (std::size_t q = 0; q < v.size(); ++q) s[q] = f(v.get(q));
  return s;
}

}  // namespace hopfkit
