#pragma once

// Contact forms from Clebsch data, the standard form on S^3, the
// Fubini-Study normalization, and helicity as int w ^ dw.
// 2-forms in 3D are carried by their vector proxies.

#include "hopfkit/knotlines.hpp"

#include <numeric>

namespace hopfkit {

/// w = grad phi + alpha1 grad beta1 + alpha2 grad beta2.
struct ClebschData {
  ScalarFn phi, alpha1, beta1, alpha2, beta2;
  int pairs = 2;
};

struct ContactSample {
  Vec3 point, omega, domega;
  double density = 0.0;  ///< w . dw
};

inline ContactSample contact_form(const ClebschData& d, const Vec3& p, double h = 1e-3) {
  require(d.alpha1 && d.beta1, ErrorKind::invalid_argument, "Clebsch data needs alpha1 and beta1");
  require(d.pairs == 1 || d.pairs == 2, ErrorKind::invalid_argument, "Clebsch pair count must be 1 or 2");
  auto value = [&](const ScalarFn& f) {
    const double v = f(p);
    require(std::isfinite(v), ErrorKind::invalid_argument, "Clebsch closure undefined at sample point");
    return v;
  };
  auto grad = [&](const ScalarFn& f) { return richardson_gradient(f, p, h); };
  ContactSample s;
  s.point = p;
  if (d.phi) s.omega = grad(d.phi);
  s.omega += value(d.alpha1) * grad(d.beta1);
  s.domega = cross(grad(d.alpha1), grad(d.beta1));
  if (d.pairs == 2) {
    require(d.alpha2 && d.beta2, ErrorKind::invalid_argument, "two-pair Clebsch data needs alpha2 and beta2");
    s.omega += value(d.alpha2) * grad(d.beta2);
    s.domega += cross(grad(d.alpha2), grad(d.beta2));
  }
  s.density = dot(s.omega, s.domega);
  return s;
}

struct NonintegrabilityResult {
  double min_density = 0.0;  ///< min |w . dw| over samples
  std::size_t violating = 0;
  std::size_t sample_count = 0;
  double threshold = 0.0;
  bool contact = false;  ///< min |density| > threshold
};

inline NonintegrabilityResult nonintegrability_check(const ClebschData& d, std::span<const Vec3> samples,
                                                     double threshold = 1e-10) {
  require(samples.size() >= 1000, ErrorKind::invalid_argument, "nonintegrability_check needs >= 1000 samples");
  NonintegrabilityResult r;
  r.sample_count = samples.size();
  r.threshold = threshold;
  r.min_density = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) {
    const double a = std::abs(contact_form(d, p).density);
    r.min_density = std::min(r.min_density, a);
    if (a <= threshold) ++r.violating;
  }
  r.contact = r.min_density > threshold;
  return r;
}

/// Hopfion data: w = (1/2pi)(u1 du2 - u2 du1 + u3 du4 - u4 du3), dw = B.
inline ClebschData hopfion_clebsch(double size = 1.0, double amplitude = 1.0) {
  auto u = [size](int i) { return [size, i](const Vec3& x) { return s3_lift(x, size).u[i]; }; };
  ClebschData d;
  const double a = amplitude;
  d.phi = [size, a](const Vec3& x) {
    const auto s = s3_lift(x, size);
    return -a * (s.u[0] * s.u[1] + s.u[2] * s.u[3]) / two_pi;
  };
  d.alpha1 = [size, a](const Vec3& x) { return a * s3_lift(x, size).u[0] / pi; };
  d.beta1 = u(1);
  d.alpha2 = [size, a](const Vec3& x) { return a * s3_lift(x, size).u[2] / pi; };
  d.beta2 = u(3);
  d.pairs = 2;
  return d;
}

/// Single pair on the periodic box with arbitrary smooth periodic scalars.
inline ClebschData single_pair_clebsch(ScalarFn phi, ScalarFn alpha, ScalarFn beta) {
  ClebschData d;
  d.phi = std::move(phi);
  d.alpha1 = std::move(alpha);
  d.beta1 = std::move(beta);
  d.pairs = 1;
  return d;
}

/// Periodic-box quadrature of w . dw.
inline double helicity_contact(const ClebschData& d, const GridSpec3& grid) {
  grid.validate();
  return integrate_density(grid, [&](std::size_t q) { return contact_form(d, grid.node(q)).density; });
}

/// w and dw of the Clebsch data sampled on a grid (for the helicity_AB bridge).
inline std::pair<VectorField3, VectorField3> sample_contact(const ClebschData& d, const GridSpec3& grid) {
  VectorField3 w(grid), dw(grid);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const auto s = contact_form(d, grid.node(q));
    w.set(q, s.omega);
    dw.set(q, s.domega);
  }
  return {w, dw};
}

// ---------------------------------------------------------------------------
// S^3 in R^4 = C^2, coordinates ordered (x1, y1, x2, y2)

using Vec4 = std::array<double, 4>;

/// Components of w = sum (x_i dy_i - y_i dx_i) in (dx1, dy1, dx2, dy2).
inline Vec4 standard_contact_s3(const Vec4& p) {
  const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
  require(std::abs(r - 1.0) <= 1e-12, ErrorKind::invalid_argument,
          "standard_contact_s3: point is off the unit sphere (|p| = " + format_double(r) + ")");
  return {-p[1], p[0], -p[3], p[2]};
}

/// dw = 2 (dx1 ^ dy1 + dx2 ^ dy2) as an antisymmetric matrix.
inline std::array<Vec4, 4> standard_contact_s3_d() {
  std::array<Vec4, 4> m{};
  m[0][1] = 2.0;
  m[1][0] = -2.0;
  m[2][3] = 2.0;
  m[3][2] = -2.0;
  return m;
}

/// Hopf coordinates: z1 = e^{i xi1} sin eta, z2 = e^{i xi2} cos eta.
inline Vec4 hopf_coordinates(double eta, double xi1, double xi2) {
  return {std::sin(eta) * std::cos(xi1), std::sin(eta) * std::sin(xi1), std::cos(eta) * std::cos(xi2),
          std::cos(eta) * std::sin(xi2)};
}

/// Partial derivatives of hopf_coordinates along (eta, xi1, xi2).
inline std::array<Vec4, 3> hopf_coordinates_jacobian(double eta, double xi1, double xi2) {
  const double se = std::sin(eta), ce = std::cos(eta);
  return {Vec4{ce * std::cos(xi1), ce * std::sin(xi1), -se * std::cos(xi2), -se * std::sin(xi2)},
          Vec4{-se * std::sin(xi1), se * std::cos(xi1), 0.0, 0.0},
          Vec4{0.0, 0.0, -ce * std::sin(xi2), ce * std::cos(xi2)}};
}

namespace detail {
inline double apply1(const Vec4& w, const Vec4& v) { return w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]; }
inline double apply2(const std::array<Vec4, 4>& m, const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += m[i][j] * a[i] * b[j];
  return s;
}
/// (w ^ dw)(t0, t1, t2) for tangent vectors t.
inline double wedge3(const Vec4& w, const std::array<Vec4, 4>& D, const std::array<Vec4, 3>& t) {
  return apply1(w, t[0]) * apply2(D, t[1], t[2]) - apply1(w, t[1]) * apply2(D, t[0], t[2]) +
         apply1(w, t[2]) * apply2(D, t[0], t[1]);
}
}  // namespace detail

/// w ^ dw of the standard form evaluated on an orthonormal tangent frame
/// at p (the unit-volume density on S^3 up to sign).
inline double standard_contact_volume(const Vec4& p) {
  const Vec4 w = standard_contact_s3(p);
  // orthonormal tangent frame: i p, j p, k p (quaternion units)
  const std::array<Vec4, 3> t{Vec4{-p[1], p[0], -p[3], p[2]}, Vec4{-p[2], p[3], p[0], -p[1]},
                              Vec4{-p[3], -p[2], p[1], p[0]}};
  return detail::wedge3(w, standard_contact_s3_d(), t);
}

struct S3Helicity {
  double raw = 0.0;         ///< int_{S^3} w ^ dw
  double normalized = 0.0;  ///< raw / (2 pi)^2
};

/// Gauss-Legendre in eta x trapezoid in (xi1, xi2).
inline S3Helicity helicity_contact_s3(int resolution = 32) {
  require(resolution >= 4, ErrorKind::invalid_argument, "helicity_contact_s3: resolution must be >= 4");
  const GaussLegendre gl(resolution);
  const auto D = standard_contact_s3_d();
  const int m = 2 * resolution;
  const double dxi = two_pi / m;
  std::vector<double> terms;
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double eta = 0.25 * pi * (gl.nodes[a] + 1.0), weta = 0.25 * pi * gl.weights[a];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double x1 = i * dxi, x2 = j * dxi;
        const Vec4 p = hopf_coordinates(eta, x1, x2);
        terms.push_back(weta * dxi * dxi *
                        detail::wedge3(standard_contact_s3(p), D, hopf_coordinates_jacobian(eta, x1, x2)));
      }
  }
  S3Helicity h;
  h.raw = pairwise_sum(terms);
  h.normalized = h.raw / (two_pi * two_pi);
  return h;
}

// ---------------------------------------------------------------------------
// Fubini-Study form

/// Density of F = (i/2pi) dz ^ dzbar / (1 + |z|^2)^2 against dRe z ^ dIm z.
inline double fubini_study_form(complex z) {
  require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::invalid_argument,
          "fubini_study_form: z must be finite");
  const double w = 1.0 + std::norm(z);
  return (1.0 / two_pi) * 2.0 / (w * w);
}

struct Rational {
  long long num = 0, den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1) : num(n), den(d) {
    require(d != 0, ErrorKind::invalid_argument, "rational with zero denominator");
    const long long g = std::gcd(num, den);
    if (g != 0) {
      num /= g;
      den /= g;
    }
    if (den < 0) {
      num = -num;
      den = -den;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
  friend bool operator==(const Rational&, const Rational&) = default;
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

struct NormalizationConstants {
  Rational C, g;            ///< exact
  double C_numeric = 0.0;   ///< from quadrature
  double g_numeric = 0.0;
  double radial_integral = 0.0;  ///< int_0^inf r dr / (1+r^2)^2, numeric
};

/// Solves (C/2pi) int dphi int r dr/(1+r^2)^2 = 1 and the chart matching
/// z/2 = -1/u + g, u = 1 + r^2, with z in [0, 2] on the unit sphere.
inline NormalizationConstants solve_normalization_constants(int order = 64) {
  NormalizationConstants out;
  // antiderivative -1/(2u), u = 1 + r^2: exact value at r = 0 and r -> inf
  auto antiderivative_at_u_inverse = [](Rational inv_u) { return Rational(-1, 2) * inv_u; };
  const Rational I = antiderivative_at_u_inverse(Rational(0)) - antiderivative_at_u_inverse(Rational(1));
  // (C / 2pi) * 2pi * I = 1
  out.C = Rational(1) / I;
  // Matching (1/4pi) dphi ^ dz with the polar form gives dz = 2C r dr / u^2,
  // i.e. z/2 = -1/u + g. Starting from z(0) = 0 the chart ends at
  // z(inf) = 2 C I, and g = z(inf)/2 + 1/u(inf) with 1/u(inf) = 0.
  const Rational z_top = Rational(2) * out.C * I;
  out.g = z_top * Rational(1, 2);
  // numerics: r = t / (1 - t) maps [0, 1) onto [0, inf)
  const GaussLegendre gl(order);
  auto radial = [](double t) {
    const double r = t / (1.0 - t), dr = 1.0 / ((1.0 - t) * (1.0 - t));
    const double u = 1.0 + r * r;
    return r / (u * u) * dr;
  };
  out.radial_integral = gl.integrate(radial, 0.0, 1.0);
  out.C_numeric = 1.0 / out.radial_integral;
  const double z_top_num = 2.0 * out.C_numeric * out.radial_integral;
  out.g_numeric = 0.5 * z_top_num;
  return out;
}

/// Flux of the Fubini-Study form over C in polar quadrature.
inline double fubini_study_total(int order = 64) {
  const GaussLegendre gl(order);
  return two_pi * gl.integrate(
                      [](double t) {
                        const double r = t / (1.0 - t), dr = 1.0 / ((1.0 - t) * (1.0 - t));
                        return fubini_study_form(complex(r, 0.0)) * r * dr;
                      },
                      0.0, 1.0);
}

/// Flux of (1/4pi) dphi ^ dz over the cylinder chart [0, 2pi] x [-1, 1].
inline double cylinder_chart_total(int order = 16) {
  const GaussLegendre gl(order);
  return gl.integrate([](double) { return two_pi / (4.0 * pi); }, -1.0, 1.0);
}

/// Sup relative deviation between the pullback of F through the Hopf map
/// z = z0/z1 (numerical, Richardson differences of the composed chart) and
/// dw/(2 pi) on Hopf coordinates, polar caps excluded.
inline double pullback_consistency_check(int resolution = 32, double w_scale = 1.0) {
  require(resolution >= 32, ErrorKind::invalid_argument, "pullback_consistency_check needs resolution >= 32");
  const double cap = 0.05;
  const auto D = standard_contact_s3_d();
  double worst = 0.0, scale = 0.0;
  for (int a = 0; a < resolution; ++a) {
    const double eta = cap + (0.5 * pi - 2 * cap) * (a + 0.5) / resolution;
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j) {
        const Vec3 c{eta, two_pi * (i + 0.3) / resolution, two_pi * (j + 0.7) / resolution};
        auto zfun = [](const Vec3& chart) {
          const Vec4 p = hopf_coordinates(chart.x, chart.y, chart.z);
          return complex(p[0], p[1]) / complex(p[2], p[3]);
        };
        const Vec3 gx = richardson_gradient([&](const Vec3& y) { return zfun(y).real(); }, c, 1e-4);
        const Vec3 gy = richardson_gradient([&](const Vec3& y) { return zfun(y).imag(); }, c, 1e-4);
        const double dens = fubini_study_form(zfun(c));
        const auto J = hopf_coordinates_jacobian(c.x, c.y, c.z);
        const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
        for (const auto& [u, v] : pairs) {
          const double pf = dens * (gx[u] * gy[v] - gx[v] * gy[u]);
          const double dw = w_scale * detail::apply2(D, J[u], J[v]) / two_pi;
          worst = std::max(worst, std::abs(pf - dw));
          scale = std::max(scale, std::abs(dw));
        }
      }
  }
  return worst / scale;
}

// ---------------------------------------------------------------------------
// Contactomorphisms

/// sup over samples of |J^T w'(map(p)) - rho(p) w(p)| / |w(p)|: checks that
/// `map` pulls the target form back to rho times the source form.
inline double contactomorphism_check(const VectorFn& map, const ScalarFn& rho, const ClebschData& target,
                                     const ClebschData& source, std::span<const Vec3> samples) {
  double worst = 0.0;
  for (const auto& p : samples) {
    const double r = rho(p);
    require(std::isfinite(r) && std::abs(r) > 1e-14, ErrorKind::invalid_argument,
            "contactomorphism_check: rho vanishes at a sample point");
    const Vec3 w_img = contact_form(target, map(p)).omega;
    const auto J = richardson_jacobian(map, p);  // J[i] = d map / d x_i
    const Vec3 pulled{dot(J[0], w_img), dot(J[1], w_img), dot(J[2], w_img)};
    const Vec3 w = contact_form(source, p).omega;
    const double n = norm(w);
    require(n > 0.0, ErrorKind::degenerate, "contactomorphism_check: source form vanishes at a sample");
    worst = std::max(worst, norm(pulled - r * w) / n);
  }
  return worst;
}

inline double contactomorphism_check(const VectorFn& map, const ScalarFn& rho, const ClebschData& data,
                                     std::span<const Vec3> samples) {
  return contactomorphism_check(map, rho, data, data, samples);
}

struct ContactVerdict {
  double min_density = 0.0;
  std::size_t sample_count = 0;
  bool contact = false;
  std::string chart;
};

}  // namespace hopfkit
