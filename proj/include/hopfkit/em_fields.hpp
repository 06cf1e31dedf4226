#pragma once

#include "hopfkit/exterior.hpp"
#include "hopfkit/forms.hpp"
#include "hopfkit/spectral.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace hopfkit {

/// Paired electric/magnetic fields. Closures are the primary
/// representation; samples are a view on `E.grid()`.
struct EMField {
  VectorField3 E, B;
  Signature signature = Signature::minkowski;
  double scale = 1.0;  ///< normalization a; integer helicity is H / a^2
  std::string kind = "custom";
  bool null_certified = false;

  bool sampled() const { return E.sampled() && B.sampled(); }
  const GridSpec3& grid() const { return B.grid(); }
};

// ---------------------------------------------------------------------------
// Hopf fibration pulled back to R^3

/// Inverse stereographic lift of x / size onto the unit S^3, with the
/// gradients of the four embedding coordinates.
struct S3Lift {
  std::array<double, 4> u{};
  std::array<Vec3, 4> grad{};
};

inline S3Lift s3_lift(const Vec3& x, double size) {
  const Vec3 X = x / size;
  const double r2 = norm2(X), d = 1.0 + r2, d2 = d * d;
  S3Lift s;
  s.u = {2 * X.x / d, 2 * X.y / d, 2 * X.z / d, (r2 - 1) / d};
  for (int a = 0; a < 3; ++a) {
    Vec3 g;
    for (int j = 0; j < 3; ++j) g[j] = (a == j ? 2.0 / d : 0.0) - 4.0 * X[a] * X[j] / d2;
    s.grad[a] = g / size;
  }
  s.grad[3] = (4.0 / d2) * X / size;
  return s;
}

/// Hopf map z = z0 / z1 with z0 = u1 + i u2, z1 = u3 + i u4.
inline complex hopf_map(const Vec3& x, double size = 1.0) {
  const auto s = s3_lift(x, size);
  return complex(s.u[0], s.u[1]) / complex(s.u[2], s.u[3]);
}

/// Second Hopf map from the cyclic relabelling u2 -> u3 -> u4 -> u2.
inline complex dual_hopf_map(const Vec3& x, double size = 1.0) {
  const auto s = s3_lift(x, size);
  return complex(s.u[0], s.u[2]) / complex(s.u[3], s.u[1]);
}

inline Vec3 hopfion_magnetic(const Vec3& x, double size, double amplitude = 1.0) {
  const auto s = s3_lift(x, size);
  return (amplitude / pi) * (cross(s.grad[0], s.grad[1]) + cross(s.grad[2], s.grad[3]));
}

inline Vec3 hopfion_electric(const Vec3& x, double size, double amplitude = 1.0) {
  const auto s = s3_lift(x, size);
  return (amplitude / pi) * (cross(s.grad[0], s.grad[2]) + cross(s.grad[3], s.grad[1]));
}

/// Ranada-type null Hopfion. `size` is the spatial core size; `amplitude`
/// is the normalization a, so the helicity is a^2.
inline EMField build_hopfion(const GridSpec3& grid, double size, double amplitude = 1.0) {
  require(size > 0.0, ErrorKind::invalid_argument, "build_hopfion: scale must be positive");
  require(amplitude > 0.0, ErrorKind::invalid_argument, "build_hopfion: amplitude must be positive");
  EMField f;
  f.B = VectorField3::sample(grid, [=](const Vec3& p) { return hopfion_magnetic(p, size, amplitude); });
  f.E = VectorField3::sample(grid, [=](const Vec3& p) { return hopfion_electric(p, size, amplitude); });
  f.signature = Signature::minkowski;
  f.scale = amplitude;
  f.kind = "hopfion";
  f.null_certified = true;
  return f;
}

/// Closure-only Hopfion (no grid samples).
inline EMField hopfion_closures(double size, double amplitude = 1.0) {
  EMField f;
  f.B = VectorField3::analytic([=](const Vec3& p) { return hopfion_magnetic(p, size, amplitude); });
  f.E = VectorField3::analytic([=](const Vec3& p) { return hopfion_electric(p, size, amplitude); });
  f.scale = amplitude;
  f.kind = "hopfion";
  f.null_certified = true;
  return f;
}

/// Mirror image under x -> -x: v'(p) = M v(M p), M = diag(-1, 1, 1).
inline VectorField3 mirror_x(const VectorField3& v) {
  auto flip = [](Vec3 p) { p.x = -p.x; return p; };
  const GridSpec3 g = v.grid();
  if (v.has_closure()) {
    VectorFn f = [c = v.closure(), flip](const Vec3& p) { return flip(c(flip(p))); };
    return v.sampled() ? VectorField3::sample(g, f) : VectorField3::analytic(f, g);
  }
  VectorField3 out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        // node x_i = o + i h maps to -x_i, which is node index (-2o/h - i) on a symmetric box
        const int mi = static_cast<int>(std::lround(-2.0 * g.origin[0] / g.spacing(0))) - i;
        out.set(g.index(i, j, k), flip(v.get(g.wrap_index(mi, j, k))));
      }
  return out;
}

inline EMField mirror(const EMField& f) {
  EMField m = f;
  m.E = mirror_x(f.E);
  m.B = mirror_x(f.B);
  m.kind = f.kind + "-mirror";
  return m;
}

// ---------------------------------------------------------------------------
// Dyon pairs

/// Pullback of the unit-area Fubini-Study form through a complex map,
/// as a vector: (1/pi) grad Re psi x grad Im psi / (1 + |psi|^2)^2.
inline Vec3 pullback_field(const ComplexFn& psi, const Vec3& p, double h = 1e-4) {
  const complex z = psi(p);
  require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::invalid_argument,
          "complex map not finite at sample point");
  const Vec3 gr = richardson_gradient([&](const Vec3& y) { return psi(y).real(); }, p, h);
  const Vec3 gi = richardson_gradient([&](const Vec3& y) { return psi(y).imag(); }, p, h);
  const double w = 1.0 + std::norm(z);
  return cross(gr, gi) / (pi * w * w);
}

/// Two complex maps theta, phi with B(psi) the pullback field of psi and
/// the electric fields fixed by the cross relations
///   B(theta) = -E(phi),   B(phi) = E(theta).
/// When both maps coincide the relations are solved in the least-squares
/// sense, giving E = 0 (the self-paired case is flagged).
class DyonPair {
public:
  DyonPair(ComplexFn theta, ComplexFn phi, bool self_paired = false)
      : theta_(std::move(theta)), phi_(std::move(phi)), self_paired_(self_paired) {}

  bool self_paired() const { return self_paired_; }

  Vec3 B_theta(const Vec3& p) const { return pullback_field(theta_, p); }
  Vec3 B_phi(const Vec3& p) const { return pullback_field(phi_, p); }
  Vec3 E_theta(const Vec3& p) const { return self_paired_ ? Vec3{} : B_phi(p); }
  Vec3 E_phi(const Vec3& p) const { return self_paired_ ? Vec3{} : -B_theta(p); }

  DyonPair swapped() const { return DyonPair(phi_, theta_, self_paired_); }

  /// Physical field: B is the pullback of phi, E the pullback of theta
  /// (= -E(phi) by the cross relation). For the Hopf pair this is the Hopfion.
  EMField as_field(const GridSpec3& grid) const {
    EMField f;
    const DyonPair self = *this;
    f.B = VectorField3::sample(grid, [self](const Vec3& p) { return self.B_phi(p); });
    f.E = VectorField3::sample(grid, [self](const Vec3& p) { return self.B_theta(p); });
    f.kind = "dyon";
    return f;
  }

private:
  ComplexFn theta_, phi_;
  bool self_paired_;
};

/// Builds the pair, checking the maps are finite on the grid samples and
/// detecting coinciding maps.
inline DyonPair build_dyon_pair(ComplexFn theta, ComplexFn phi, const GridSpec3& grid) {
  grid.validate();
  bool same = true;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const Vec3 p = grid.node(q);
    const complex a = theta(p), b = phi(p);
    require(std::isfinite(a.real()) && std::isfinite(a.imag()) && std::isfinite(b.real()) &&
                std::isfinite(b.imag()),
            ErrorKind::invalid_argument, "build_dyon_pair: map not finite at a sample point");
    same = same && std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a));
  }
  return DyonPair(std::move(theta), std::move(phi), same);
}

/// The Hopf pair: phi generates the Hopfion's magnetic field, theta its
/// electric field.
inline DyonPair hopf_dyon_pair(const GridSpec3& grid, double size = 1.0) {
  return build_dyon_pair([size](const Vec3& p) { return dual_hopf_map(p, size); },
                         [size](const Vec3& p) { return hopf_map(p, size); }, grid);
}

// ---------------------------------------------------------------------------
// Pointwise diagnostics

struct RSVector {
  CVec3 z;
  complex square;  ///< sum_a (z^a)^2 = E^2 - B^2 + 2i E.B
};

inline RSVector rs_vector(const Vec3& E, const Vec3& B) {
  RSVector r;
  for (int a = 0; a < 3; ++a) r.z[a] = complex(E[a], B[a]);
  r.square = r.z[0] * r.z[0] + r.z[1] * r.z[1] + r.z[2] * r.z[2];
  return r;
}

inline RSVector rs_vector(const EMField& f, const Vec3& p) { return rs_vector(f.E.eval(p), f.B.eval(p)); }

struct NullResiduals {
  double dot = 0.0;   ///< sup 2|E.B| / (|E|^2 + |B|^2)
  double norm = 0.0;  ///< sup ||E|^2 - |B|^2| / (|E|^2 + |B|^2)
  bool degenerate = false;
};

namespace detail {
template <class Source>
NullResiduals null_residuals_impl(std::size_t count, Source&& at, double floor_rel) {
  NullResiduals r;
  double peak = 0.0;
  std::vector<std::pair<Vec3, Vec3>> vals(count);
  for (std::size_t q = 0; q < count; ++q) {
    vals[q] = at(q);
    peak = std::max(peak, norm2(vals[q].first) + norm2(vals[q].second));
  }
  if (peak == 0.0) {
    r.degenerate = true;
    return r;
  }
  for (const auto& [E, B] : vals) {
    const double s = norm2(E) + norm2(B);
    if (s <= floor_rel * peak) continue;
    r.dot = std::max(r.dot, 2.0 * std::abs(dot(E, B)) / s);
    r.norm = std::max(r.norm, std::abs(norm2(E) - norm2(B)) / s);
  }
  return r;
}
}  // namespace detail

/// Sup over grid samples. Points where |E|^2 + |B|^2 is below
/// floor_rel times its maximum are skipped.
inline NullResiduals null_residuals(const EMField& f, double floor_rel = 1e-24) {
  require(f.sampled(), ErrorKind::invalid_argument, "null_residuals: field is not sampled");
  return detail::null_residuals_impl(
      f.B.size(), [&](std::size_t q) { return std::pair{f.E.get(q), f.B.get(q)}; }, floor_rel);
}

/// Sup over arbitrary points, through the closures.
inline NullResiduals null_residuals(const EMField& f, std::span<const Vec3> points,
                                    double floor_rel = 1e-24) {
  return detail::null_residuals_impl(
      points.size(), [&](std::size_t q) { return std::pair{f.E.eval(points[q]), f.B.eval(points[q])}; },
      floor_rel);
}

/// (E, B) -> (-B, E).
inline EMField duality_rotate(const EMField& f) {
  EMField r = f;
  r.E = -f.B;
  r.B = f.E;
  return r;
}

// ---------------------------------------------------------------------------
// Dirac monopole patches

enum class Hemisphere { north, south };

struct MonopolePotential {
  Vec3 cartesian;       ///< (A_x, A_y, A_z)
  double phi_component; ///< coefficient of d(phi), spherical form
};

/// A+ (north patch) and A- (south patch) of a unit-charge monopole.
inline MonopolePotential monopole_potential(Hemisphere patch, const Vec3& p, double charge = 1.0) {
  const double r = norm(p);
  require(r > 0.0, ErrorKind::singular_axis, "monopole_potential: origin is singular");
  const double sgn = patch == Hemisphere::north ? 1.0 : -1.0;
  const double denom = p.z + sgn * r;
  require(std::abs(denom) > 1e-12 * r, ErrorKind::singular_axis,
          std::string("monopole_potential: point on the singular axis of the ") +
              (patch == Hemisphere::north ? "north" : "south") + " patch");
  const double c = charge / (4.0 * pi * r * denom);
  MonopolePotential out;
  out.cartesian = {-p.y * c, p.x * c, 0.0};
  out.phi_component = charge / (4.0 * pi) * (sgn - p.z / r);
  return out;
}

struct MonopoleFlux {
  double stokes;  ///< equator circulation of A+ minus that of A-
  double direct;  ///< quadrature of sin(theta) d theta d phi / 4 pi
};

inline MonopoleFlux monopole_flux(int resolution, double charge = 1.0) {
  require(resolution >= 16, ErrorKind::invalid_argument, "monopole_flux: resolution must be >= 16");
  auto circulation = [&](Hemisphere h) {
    double s = 0.0;
    const double dphi = two_pi / resolution;
    for (int i = 0; i < resolution; ++i) {
      const double ph = i * dphi;
      const Vec3 p{std::cos(ph), std::sin(ph), 0.0};
      const Vec3 t{-std::sin(ph), std::cos(ph), 0.0};
      s += dot(monopole_potential(h, p, charge).cartesian, t) * dphi;
    }
    return s;
  };
  const GaussLegendre gl(resolution);
  const double theta_int = gl.integrate([](double th) { return std::sin(th); }, 0.0, pi);
  return {circulation(Hemisphere::north) - circulation(Hemisphere::south),
          charge * theta_int * two_pi / (4.0 * pi)};
}

// ---------------------------------------------------------------------------
// Instanton profiles

enum class InstantonChart { r4, tube };

/// |F| of the 1-instanton: 1/(1+r^2)^2 on R^4, 4/cosh^2 t on S^3 x R.
inline double instanton_profile(double x, InstantonChart chart) {
  if (chart == InstantonChart::r4) return 1.0 / ((1.0 + x * x) * (1.0 + x * x));
  const double c = std::cosh(x);
  return 4.0 / (c * c);
}

// ---------------------------------------------------------------------------
// Maxwell constraints and frames

namespace detail {
/// sup |div v| / sup sum_i |d_i v_i|, central differences on interior
/// nodes. Stencils that wrap around the box are skipped: localized fields
/// such as the Hopfion are not periodic, and the jump at the faces would
/// otherwise dominate the residual.
inline double normalized_divergence(const VectorField3& v) {
  const auto& g = v.grid();
  double num = 0.0, den = 0.0;
  for (int i = 1; i + 1 < g.n[0]; ++i)
    for (int j = 1; j + 1 < g.n[1]; ++j)
      for (int k = 1; k + 1 < g.n[2]; ++k) {
        const double a = central(v.component(0), g, i, j, k, 0);
        const double b = central(v.component(1), g, i, j, k, 1);
        const double c = central(v.component(2), g, i, j, k, 2);
        num = std::max(num, std::abs(a + b + c));
        den = std::max(den, std::abs(a) + std::abs(b) + std::abs(c));
      }
  return den > 0.0 ? num / den : 0.0;
}
}  // namespace detail

struct DivergenceResiduals {
  double div_b = 0.0, div_e = 0.0;
};

/// Normalized sup-norms of div B and div E on the samples.
inline DivergenceResiduals maxwell_divergence_residuals(const EMField& f) {
  require(f.sampled(), ErrorKind::invalid_argument, "maxwell_divergence_residuals: field not sampled");
  return {detail::normalized_divergence(f.B), detail::normalized_divergence(f.E)};
}

struct FrameVelocity {
  Vec3 minus;  ///< physical branch, |v| <= c
  Vec3 plus;   ///< reciprocal branch, |v| >= c
  bool parallel = false;           ///< E x B = 0: already parallel, v = 0
  bool null_field = false;         ///< |E| = |B|, E.B = 0: |v| = c
  bool parallel_frame_attainable = true;
};

/// Velocity of the frame in which E and B are parallel (c = 1):
///   v = n (c/2) (E^2 + B^2)/|E x B| {1 -+ sqrt((E^2 - B^2)^2 + 4(E.B)^2)/(E^2 + B^2)},
/// n the unit vector along E x B.
inline FrameVelocity frame_velocity(const Vec3& E, const Vec3& B, double c = 1.0, double null_tol = 1e-12) {
  require(norm2(E) + norm2(B) > 0.0, ErrorKind::invalid_argument, "frame_velocity: E and B both zero");
  FrameVelocity out;
  const Vec3 ExB = cross(E, B);
  const double s = norm(ExB), e2 = norm2(E), b2 = norm2(B), eb = dot(E, B);
  if (s <= 1e-15 * (e2 + b2)) {
    out.parallel = true;
    return out;
  }
  const Vec3 n = ExB / s;
  const double root = std::sqrt((e2 - b2) * (e2 - b2) + 4.0 * eb * eb) / (e2 + b2);
  const double base = 0.5 * c * (e2 + b2) / s;
  out.minus = base * (1.0 - root) * n;
  out.plus = base * (1.0 + root) * n;
  out.null_field = root <= null_tol;
  if (out.null_field) out.parallel_frame_attainable = false;
  return out;
}

/// sup |dA/dt - curl A| over the interior slices of a time series
/// (centered differences in time, spectral curl).
inline double asd_check_31(std::span<const VectorField3> series, double dt) {
  require(series.size() >= 3, ErrorKind::invalid_argument, "asd_check_31 needs at least 3 time slices");
  require(dt > 0.0, ErrorKind::invalid_argument, "asd_check_31: dt must be positive");
  double worst = 0.0;
  for (std::size_t t = 1; t + 1 < series.size(); ++t) {
    const VectorField3 curl = spectral_curl(series[t]);
    for (std::size_t q = 0; q < curl.size(); ++q) {
      const Vec3 dadt = (series[t + 1].get(q) - series[t - 1].get(q)) / (2.0 * dt);
      worst = std::max(worst, norm(dadt - curl.get(q)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Structured-grid text export
//
//   # provenance lines (optional, '#'-prefixed)
//   grid NX NY NZ LX LY LZ OX OY OZ
//   x y z Ex Ey Ez Bx By Bz          (one node per line, storage order)

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_field_grid(std::ostream& os, const EMField& f, const std::vector<std::string>& provenance = {}) {
  require(f.sampled(), ErrorKind::invalid_argument, "write_field_grid: field not sampled");
  const auto& g = f.grid();
  for (const auto& line : provenance) os << "# " << line << '\n';
  os << std::setprecision(17);
  os << "grid " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << ' ' << g.length[0] << ' ' << g.length[1]
     << ' ' << g.length[2] << ' ' << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << '\n';
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Vec3 p = g.node(q), E = f.E.get(q), B = f.B.get(q);
    os << p.x << ' ' << p.y << ' ' << p.z << ' ' << E.x << ' ' << E.y << ' ' << E.z << ' ' << B.x << ' '
       << B.y << ' ' << B.z << '\n';
  }
}

struct LoadedField {
  EMField field;
  std::vector<std::string> provenance;
};

inline LoadedField read_field_grid(std::istream& is) {
  LoadedField out;
  std::string line;
  GridSpec3 g;
  bool have_grid = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.provenance.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    require(tag == "grid", ErrorKind::io, "field file: expected 'grid' header line");
    ss >> g.n[0] >> g.n[1] >> g.n[2] >> g.length[0] >> g.length[1] >> g.length[2] >> g.origin[0] >>
        g.origin[1] >> g.origin[2];
    require(static_cast<bool>(ss), ErrorKind::io, "field file: malformed grid header");
    have_grid = true;
    break;
  }
  require(have_grid, ErrorKind::io, "field file: missing grid header");
  g.validate();
  VectorField3 E(g), B(g);
  for (std::size_t q = 0; q < g.size(); ++q) {
    double v[9];
    for (double& x : v)
      if (!(is >> x)) throw Error(ErrorKind::io, "field file: truncated at node " + std::to_string(q));
    E.set(q, {v[3], v[4], v[5]});
    B.set(q, {v[6], v[7], v[8]});
  }
  out.field.E = std::move(E);
  out.field.B = std::move(B);
  out.field.kind = "from-file";
  return out;
}

}  // namespace hopfkit
