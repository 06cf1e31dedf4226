#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopfkit {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr const char* version = "0.1.0";

using complex = std::complex<double>;

/// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  invalid_argument,
  grid_too_small,
  singular_axis,
  nonzero_mean,
  not_solenoidal,
  degenerate,
  not_converged,
  stagnation,
  out_of_domain,
  mismatch,
  route_disagreement,
  io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }

/// Complex 3-vector (Riemann-Silberstein vectors, helical modes).
using CVec3 = std::array<complex, 3>;

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;
using ComplexFn = std::function<complex(const Vec3&)>;

/// Pairwise summation: fixed reduction tree, so results do not depend on
/// anything but the input order.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t block = 64;
  if (xs.size() <= block) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    require(n >= 1, ErrorKind::invalid_argument, "Gauss-Legendre order must be positive");
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) { p1 = x; p0 = 1.0; }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

/// Halton low-discrepancy point in [0,1)^3 (bases 2, 3, 5).
inline Vec3 halton3(std::size_t index) {
  auto radical = [](std::size_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    return r;
  };
  return {radical(index + 1, 2), radical(index + 1, 3), radical(index + 1, 5)};
}

/// Quasi-random points filling the box [lo, hi].
inline std::vector<Vec3> halton_points(std::size_t count, const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 u = halton3(i);
    pts[i] = {lo.x + u.x * (hi.x - lo.x), lo.y + u.y * (hi.y - lo.y), lo.z + u.z * (hi.z - lo.z)};
  }
  return pts;
}

/// Gradient of a scalar closure by Richardson-extrapolated central
/// differences (steps h and h/2), error O(h^4).
template <class F>
Vec3 richardson_gradient(F&& f, const Vec3& p, double h = 1e-3) {
  Vec3 g;
  for (std::size_t i = 0; i < 3; ++i) {
    Vec3 e;
    e[i] = 1.0;
    const double d1 = (f(p + h * e) - f(p - h * e)) / (2.0 * h);
    const double d2 = (f(p + 0.5 * h * e) - f(p - 0.5 * h * e)) / h;
    g[i] = (4.0 * d2 - d1) / 3.0;
  }
  return g;
}

/// Jacobian J(i,j) = d f_j / d x_i of a vector closure, same scheme.
template <class F>
std::array<Vec3, 3> richardson_jacobian(F&& f, const Vec3& p, double h = 1e-3) {
  std::array<Vec3, 3> rows;
  for (std::size_t i = 0; i < 3; ++i) {
    Vec3 e;
    e[i] = 1.0;
    const Vec3 d1 = (f(p + h * e) - f(p - h * e)) / (2.0 * h);
    const Vec3 d2 = (f(p + 0.5 * h * e) - f(p - 0.5 * h * e)) / h;
    rows[i] = (4.0 * d2 - d1) / 3.0;
  }
  return rows;
}

/// Curl of an analytic vector closure via the Richardson Jacobian.
template <class F>
Vec3 closure_curl(F&& f, const Vec3& p, double h = 1e-3) {
  const auto J = richardson_jacobian(f, p, h);
  return {J[1].z - J[2].y, J[2].x - J[0].z, J[0].y - J[1].x};
}

}  // namespace hopfkit
