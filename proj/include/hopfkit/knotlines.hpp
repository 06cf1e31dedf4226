#pragma once

// Field-line tracing and topological diagnostics of closed lines.

#include "hopfkit/functionals.hpp"

#include <Eigen/Dense>

#include <numeric>
#include <optional>

namespace hopfkit {

struct FieldLine {
  std::vector<double> s;       ///< arc length at each sample
  std::vector<Vec3> points;
  std::vector<Vec3> tangents;  ///< unit B/|B| at each sample
  bool closed = false;
  double gap = 0.0;            ///< distance of the best return to the seed
  double period = 0.0;         ///< arc length at the first return (closed lines)
  int accepted_steps = 0, rejected_steps = 0;

  double length() const { return s.empty() ? 0.0 : s.back(); }
  const Vec3& seed() const { return points.front(); }
};

struct Box3 {
  Vec3 lo, hi;
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

struct TraceOptions {
  double max_arc = 0.0;           ///< 0: 64 x diameter of `scale_box`
  double tol = 1e-10;             ///< Dormand-Prince error per unit arc length
  double initial_step = 1e-2;
  double max_step = 0.05;
  double stagnation_floor = 1e-10;  ///< |B| below this fraction of |B(seed)| stops the trace
  double closure_tol = 1e-6;        ///< gap / arc length
  bool stop_at_closure = true;
  std::optional<Box3> domain;       ///< leaving it is an error
  Box3 scale_box{{-1, -1, -1}, {1, 1, 1}};
};

namespace detail {
inline Vec3 hermite(const Vec3& p0, const Vec3& t0, const Vec3& p1, const Vec3& t1, double ds, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * ds * t0 + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * ds * t1;
}

struct Return {
  double s = 0.0, gap = 0.0;
};

/// Closest approach to `target` along the Hermite segments i-1..i+1
/// (golden-section search on each segment).
inline Return refine_return(const FieldLine& L, std::size_t i, const Vec3& target) {
  Return best{L.s[i], norm(L.points[i] - target)};
  for (std::size_t a : {i - 1, i}) {
    if (a + 1 >= L.points.size()) continue;
    const double ds = L.s[a + 1] - L.s[a];
    auto dist = [&](double u) {
      return norm(hermite(L.points[a], L.tangents[a], L.points[a + 1], L.tangents[a + 1], ds, u) - target);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0, x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = dist(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = dist(x2);
      }
    }
    const double u = 0.5 * (lo + hi), d = dist(u);
    if (d < best.gap) best = {L.s[a] + u * ds, d};
  }
  return best;
}

/// First local minimum of |r - seed| at sample i (checked once i+1 exists)
/// whose refined gap is below tol x arc length.
inline std::optional<Return> closure_at(const FieldLine& L, std::size_t i, double closure_tol) {
  if (i < 2 || i + 1 >= L.points.size()) return std::nullopt;
  const Vec3& seed = L.points.front();
  const double dm = norm(L.points[i - 1] - seed), d0 = norm(L.points[i] - seed), dp = norm(L.points[i + 1] - seed);
  if (!(d0 <= dm && d0 <= dp)) return std::nullopt;
  const Return r = refine_return(L, i, seed);
  if (r.gap < closure_tol * r.s) return r;
  return std::nullopt;
}
}  // namespace detail

struct ClosureResult {
  bool closed = false;
  double period = 0.0;
  double gap = 0.0;  ///< best return gap found (closed or not)
};

/// Nearest-return analysis against the seed over the whole stored line.
inline ClosureResult detect_closure(const FieldLine& line, double tol = 1e-6) {
  ClosureResult out;
  out.gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 2; i + 1 < line.points.size(); ++i) {
    const Vec3& seed = line.points.front();
    const double dm = norm(line.points[i - 1] - seed), d0 = norm(line.points[i] - seed),
                 dp = norm(line.points[i + 1] - seed);
    if (!(d0 <= dm && d0 <= dp)) continue;
    const auto r = detail::refine_return(line, i, seed);
    out.gap = std::min(out.gap, r.gap);
    if (r.gap < tol * r.s) {
      out.closed = true;
      out.period = r.s;
      out.gap = r.gap;
      return out;
    }
  }
  // the last stored sample may itself be the return point of a closed trace
  if (line.closed) return {true, line.period, line.gap};
  return out;
}

/// Adaptive Dormand-Prince 5(4) integration of dr/ds = B/|B|.
inline FieldLine trace_field_line(const VectorFn& B, const Vec3& seed, TraceOptions opt = {}) {
  require(static_cast<bool>(B), ErrorKind::invalid_argument, "trace_field_line: no field closure");
  const double b0 = norm(B(seed));
  require(std::isfinite(b0) && b0 > 1e-300, ErrorKind::stagnation, "trace_field_line: seed is a stagnation point (|B| = 0)");
  if (opt.max_arc <= 0.0) opt.max_arc = 64.0 * norm(opt.scale_box.hi - opt.scale_box.lo);
  if (opt.domain)
    require(opt.domain->contains(seed), ErrorKind::out_of_domain, "trace_field_line: seed outside the trusted domain");
  const double floor = opt.stagnation_floor * b0;
  auto f = [&](const Vec3& p) {
    const Vec3 b = B(p);
    const double n = norm(b);
    require(std::isfinite(n), ErrorKind::out_of_domain, "trace_field_line: field not finite on the line");
    if (n <= floor) throw Error(ErrorKind::stagnation, "trace_field_line: stagnation point reached (|B| below floor)");
    return b / n;
  };

  // Dormand-Prince tableau
  constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
  constexpr double a21 = 1. / 5;
  constexpr double a31 = 3. / 40, a32 = 9. / 40;
  constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
  constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176, a65 = -5103. / 18656;
  constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
  constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200, e6 = 22. / 525,
                   e7 = -1. / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;

  FieldLine L;
  Vec3 y = seed, k1 = f(seed);
  L.s.push_back(0.0);
  L.points.push_back(y);
  L.tangents.push_back(k1);
  double s = 0.0, h = std::min(opt.initial_step, opt.max_step);
  while (s < opt.max_arc) {
    h = std::min(h, opt.max_arc - s);
    const Vec3 k2 = f(y + h * (a21 * k1));
    const Vec3 k3 = f(y + h * (a31 * k1 + a32 * k2));
    const Vec3 k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec3 k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec3 k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec3 y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec3 k7 = f(y5);
    const double err = norm(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)) / h;
    if (err <= opt.tol || h <= 1e-12) {
      s += h;
      y = y5;
      k1 = k7;
      if (opt.domain && !opt.domain->contains(y))
        throw Error(ErrorKind::out_of_domain, "trace_field_line: line left the trusted domain at s = " + std::to_string(s));
      L.s.push_back(s);
      L.points.push_back(y);
      L.tangents.push_back(k7);
      ++L.accepted_steps;
      if (opt.stop_at_closure && L.points.size() >= 4) {
        if (const auto r = detail::closure_at(L, L.points.size() - 2, opt.closure_tol)) {
          L.closed = true;
          L.period = r->s;
          L.gap = r->gap;
          // drop samples beyond the return
          while (L.s.size() > 1 && L.s.back() > r->s) {
            L.s.pop_back();
            L.points.pop_back();
            L.tangents.pop_back();
          }
          break;
        }
      }
    } else {
      ++L.rejected_steps;
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(opt.tol / err, 0.25) : 5.0;
    h = std::clamp(h * std::clamp(fac, 0.2, 5.0), 1e-12, opt.max_step);
  }
  if (!L.closed) {
    const auto c = detect_closure(L, opt.closure_tol);
    L.gap = c.gap;
  }
  return L;
}

/// Trace through a sampled field (closure if present, otherwise trilinear
/// interpolation inside the grid box).
inline FieldLine trace_field_line(const VectorField3& B, const Vec3& seed, TraceOptions opt = {}) {
  const auto& g = B.grid();
  opt.scale_box = {g.lower(), g.upper()};
  if (!B.has_closure() && !opt.domain) opt.domain = Box3{g.lower(), g.upper()};
  return trace_field_line(VectorFn([&B](const Vec3& p) { return B.eval(p); }), seed, opt);
}

// ---------------------------------------------------------------------------
// Linking numbers

struct LinkingResult {
  int value = 0;
  double raw = 0.0;
};

namespace detail {
/// Signed solid-angle contribution of segment pair (a0->a1, b0->b1) to the
/// Gauss integral, times 4 pi.
inline double segment_pair_solid_angle(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  const Vec3 r13 = b0 - a0, r14 = b1 - a0, r23 = b0 - a1, r24 = b1 - a1;
  auto unit = [](const Vec3& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec3{};
  };
  const Vec3 n1 = unit(cross(r13, r14)), n2 = unit(cross(r14, r24)), n3 = unit(cross(r24, r23)),
             n4 = unit(cross(r23, r13));
  auto as = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); };
  const double omega = as(dot(n1, n2)) + as(dot(n2, n3)) + as(dot(n3, n4)) + as(dot(n4, n1));
  const double orient = dot(cross(b1 - b0, a1 - a0), r13);
  return orient > 0.0 ? omega : (orient < 0.0 ? -omega : 0.0);
}

inline std::vector<Vec3> closed_polygon(const FieldLine& c, std::size_t max_vertices) {
  const std::size_t n = c.points.size();
  const std::size_t stride = std::max<std::size_t>(1, (n + max_vertices - 1) / max_vertices);
  std::vector<Vec3> poly;
  for (std::size_t i = 0; i < n; i += stride) poly.push_back(c.points[i]);
  return poly;
}
}  // namespace detail

/// Gauss linking number of two closed polygons (each implicitly closed by
/// joining its last vertex to the first), summed exactly segment by segment.
inline LinkingResult linking_number(std::span<const Vec3> p, std::span<const Vec3> q, double separation_floor = 1e-8) {
  require(p.size() >= 3 && q.size() >= 3, ErrorKind::invalid_argument, "linking_number needs polygons with >= 3 vertices");
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& a : p)
    for (const auto& b : q) dmin = std::min(dmin, norm(a - b));
  require(dmin > separation_floor, ErrorKind::degenerate,
          "linking_number: curves intersect or nearly touch (min separation " + std::to_string(dmin) + ")");
  std::vector<double> terms;
  terms.reserve(p.size() * q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3 &a0 = p[i], &a1 = p[(i + 1) % p.size()];
    for (std::size_t j = 0; j < q.size(); ++j)
      terms.push_back(detail::segment_pair_solid_angle(a0, a1, q[j], q[(j + 1) % q.size()]));
  }
  LinkingResult r;
  r.raw = pairwise_sum(terms) / (4.0 * pi);
  r.value = static_cast<int>(std::lround(r.raw));
  return r;
}

inline LinkingResult linking_number(const FieldLine& c1, const FieldLine& c2, std::size_t max_vertices = 1500) {
  require(c1.closed && c2.closed, ErrorKind::invalid_argument, "linking_number: both lines must be closed");
  const auto p = detail::closed_polygon(c1, max_vertices), q = detail::closed_polygon(c2, max_vertices);
  return linking_number(p, q);
}

// ---------------------------------------------------------------------------
// Hopf invariant

struct HopfInvariant {
  int value = 0;
  double helicity_raw = 0.0;  ///< H / a^2
  double linking_raw = 0.0;
  int helicity_rounded = 0, linking_rounded = 0;
};

struct HopfInvariantOptions {
  Vec3 seed1{0.6, 0.1, 0.2}, seed2{-0.3, 0.7, -0.4};  ///< in units of the Hopfion size
  double size = 1.0;
  TraceOptions trace{};
};

/// Helicity route: Leray projection, curl^-1, int A.B / a^2.
inline double hopf_helicity_route(const EMField& f) {
  const VectorField3 Bp = solenoidal_project(f.B);
  const VectorField3 A = curl_inverse(Bp);
  return helicity_AB(A, Bp) / (f.scale * f.scale);
}

/// Fiber route: linking number of the B-lines through two seeds.
inline LinkingResult hopf_fiber_route(const EMField& f, const HopfInvariantOptions& opt = {}) {
  TraceOptions t = opt.trace;
  t.scale_box = {f.grid().lower(), f.grid().upper()};
  auto trace = [&](const Vec3& s) {
    const Vec3 seed = opt.size * s;
    return f.B.has_closure() ? trace_field_line(f.B.closure(), seed, t) : trace_field_line(f.B, seed, t);
  };
  const FieldLine l1 = trace(opt.seed1), l2 = trace(opt.seed2);
  require(l1.closed && l2.closed, ErrorKind::not_converged, "hopf_invariant: a traced fiber did not close");
  return linking_number(l1, l2);
}

inline HopfInvariant hopf_invariant(const EMField& f, const HopfInvariantOptions& opt = {}) {
  HopfInvariant h;
  h.helicity_raw = hopf_helicity_route(f);
  const auto lk = hopf_fiber_route(f, opt);
  h.linking_raw = lk.raw;
  h.helicity_rounded = static_cast<int>(std::lround(h.helicity_raw));
  h.linking_rounded = lk.value;
  if (h.helicity_rounded != h.linking_rounded)
    throw Error(ErrorKind::route_disagreement, "hopf_invariant: routes disagree (helicity " +
                                                   format_double(h.helicity_raw) + ", linking " +
                                                   format_double(h.linking_raw) + ")");
  h.value = h.helicity_rounded;
  return h;
}

/// Single Clebsch pair of the Hopf lift: B = (a/pi) grad u1 x grad u2.
/// Its helicity vanishes (A = (a/pi) u1 grad u2 is orthogonal to B).
inline Vec3 hopf_single_pair_field(const Vec3& x, double size, double amplitude = 1.0) {
  const auto s = s3_lift(x, size);
  return (amplitude / pi) * cross(s.grad[0], s.grad[1]);
}

inline EMField build_single_pair_field(const GridSpec3& grid, double size, double amplitude = 1.0) {
  EMField f;
  f.B = VectorField3::sample(grid, [=](const Vec3& p) { return hopf_single_pair_field(p, size, amplitude); });
  f.E = VectorField3(grid);
  f.scale = amplitude;
  f.kind = "clebsch";
  return f;
}

// ---------------------------------------------------------------------------
// Nested-torus field with prescribed rotation

namespace detail {
/// C^2 step: 0 below a, 1 above b.
inline std::pair<double, double> smoothstep(double r, double a, double b) {
  if (r <= a) return {0.0, 0.0};
  if (r >= b) return {1.0, 0.0};
  const double t = (r - a) / (b - a);
  return {t * t * t * (t * (6 * t - 15) + 10), 30 * t * t * (t - 1) * (t - 1) / (b - a)};
}
}  // namespace detail

/// B = grad(chi psi) x grad(phi) + F chi grad(phi), psi = ((r-1)^2 + z^2)/2,
/// chi a cutoff removing the axis. Lines lie on the tori rho = const around
/// the unit core circle and turn F/sqrt(1 - rho^2) times toroidally per
/// poloidal turn.
inline Vec3 torus_field(const Vec3& x, double F) {
  const double r = std::hypot(x.x, x.y);
  const auto [chi, dchi] = detail::smoothstep(r, 0.1, 0.3);
  if (chi == 0.0) return {};
  const double psi = 0.5 * ((r - 1) * (r - 1) + x.z * x.z);
  const double fr = dchi * psi + chi * (r - 1), fz = chi * x.z;
  const Vec3 rh{x.x / r, x.y / r, 0.0}, ph{-x.y / r, x.x / r, 0.0};
  return (1.0 / r) * (fr * Vec3{0, 0, 1} - fz * rh) + (F * chi / r) * ph;
}

/// Rotation number (toroidal per poloidal turns) on the torus rho = 1/2.
inline VectorField3 build_torus_field(double rotation, const GridSpec3& grid) {
  const double F = rotation * std::sqrt(0.75);
  return VectorField3::sample(grid, [F](const Vec3& p) { return torus_field(p, F); });
}

inline VectorField3 build_invariant_torus_field(int p, int q, const GridSpec3& grid) {
  require(p != 0 && q != 0, ErrorKind::invalid_argument, "torus field: p and q must be nonzero");
  require(std::gcd(p, q) == 1, ErrorKind::invalid_argument,
          "torus field: p = " + std::to_string(p) + " and q = " + std::to_string(q) + " are not coprime");
  return build_torus_field(static_cast<double>(p) / q, grid);
}

/// Seed on the resonant torus rho = 1/2.
inline Vec3 resonant_torus_seed() { return {1.5, 0.0, 0.0}; }

// ---------------------------------------------------------------------------
// Torus-knot classification

struct TorusFrame {
  Vec3 center, axis;
  double major_radius = 0.0;
};

struct KnotType {
  enum class Kind { torus, unknot, unclassified, open } kind = Kind::open;
  int p = 0, q = 0;
  std::string label() const {
    switch (kind) {
      case Kind::torus: return "(" + std::to_string(p) + "," + std::to_string(q) + ")";
      case Kind::unknot: return "unknot";
      case Kind::unclassified: return "unclassified";
      default: return "open";
    }
  }
};

/// Arc-length weighted centroid and normal of least spread, mean in-plane radius.
/// Points are treated as a closed polygon, so uneven step sizes do not bias the fit.
inline TorusFrame fit_torus_frame(std::span<const Vec3> pts) {
  const std::size_t n_pts = pts.size();
  std::vector<double> w(n_pts, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n_pts; ++i) {
    const double seg = norm(pts[(i + 1) % n_pts] - pts[i]);
    w[i] += 0.5 * seg;
    w[(i + 1) % n_pts] += 0.5 * seg;
    wsum += seg;
  }
  if (!(wsum > 0.0)) std::fill(w.begin(), w.end(), 1.0), wsum = static_cast<double>(n_pts);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n_pts; ++i) c += w[i] * Eigen::Vector3d(pts[i].x, pts[i].y, pts[i].z);
  c /= wsum;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n_pts; ++i) {
    const Eigen::Vector3d d = Eigen::Vector3d(pts[i].x, pts[i].y, pts[i].z) - c;
    cov += w[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d n = es.eigenvectors().col(0);  // ascending eigenvalues
  TorusFrame fr;
  fr.center = {c.x(), c.y(), c.z()};
  fr.axis = {n.x(), n.y(), n.z()};
  double R = 0.0;
  for (std::size_t i = 0; i < n_pts; ++i) {
    const Vec3 d = pts[i] - fr.center;
    R += w[i] * norm(d - dot(d, fr.axis) * fr.axis);
  }
  fr.major_radius = R / wsum;
  return fr;
}

inline KnotType torus_knot_classify(const FieldLine& line, std::optional<TorusFrame> frame = std::nullopt,
                                    double spread_tol = 0.2) {
  KnotType out;
  if (!line.closed) return out;
  const TorusFrame fr = frame ? *frame : fit_torus_frame(line.points);
  const Vec3 n = fr.axis / norm(fr.axis);
  Vec3 e1 = cross(std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0}, n);
  e1 = e1 / norm(e1);
  const Vec3 e2 = cross(n, e1);

  // planar round circle: algebraic circle fit in the plane of least spread
  {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    double hmax = 0.0;
    for (const auto& x : line.points) {
      const Vec3 d = x - fr.center;
      const double a = dot(d, e1), b = dot(d, e2);
      hmax = std::max(hmax, std::abs(dot(d, n)));
      const Eigen::Vector3d row(a, b, 1.0);
      M += row * row.transpose();
      rhs -= row * (a * a + b * b);
    }
    if (hmax < 1e-6 * fr.major_radius) {
      const Eigen::Vector3d sol = M.ldlt().solve(rhs);
      const double ca = -0.5 * sol(0), cb = -0.5 * sol(1);
      const double r = std::sqrt(std::max(ca * ca + cb * cb - sol(2), 0.0));
      double dev = 0.0;
      for (const auto& x : line.points) {
        const Vec3 d = x - fr.center;
        dev = std::max(dev, std::abs(std::hypot(dot(d, e1) - ca, dot(d, e2) - cb) - r));
      }
      if (r > 0.0 && dev < 1e-6 * r) {
        out.kind = KnotType::Kind::unknot;
        out.p = 1;
        return out;
      }
    }
  }

  std::vector<Vec3> pts = line.points;
  pts.push_back(line.points.front());
  double phi_total = 0.0, theta_total = 0.0, prev_phi = 0.0, prev_theta = 0.0;
  double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0.0, rho_sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - fr.center;
    const double a = dot(d, e1), b = dot(d, e2), h = dot(d, n);
    const double rr = std::hypot(a, b);
    const double phi = std::atan2(b, a), theta = std::atan2(h, rr - fr.major_radius);
    const double rho = std::hypot(rr - fr.major_radius, h);
    rho_min = std::min(rho_min, rho);
    rho_max = std::max(rho_max, rho);
    rho_sum += rho;
    if (i > 0) {
      auto wrap = [](double x) { return std::remainder(x, two_pi); };
      phi_total += wrap(phi - prev_phi);
      theta_total += wrap(theta - prev_theta);
    }
    prev_phi = phi;
    prev_theta = theta;
  }
  const double rho_mean = rho_sum / static_cast<double>(pts.size());
  int p = static_cast<int>(std::lround(phi_total / two_pi));
  int q = static_cast<int>(std::lround(theta_total / two_pi));
  if (rho_max < 1e-6 * std::max(fr.major_radius, 1e-300)) {
    out.kind = KnotType::Kind::unknot;  // the line is the core circle itself
    out.p = 1;
    return out;
  }
  if ((rho_max - rho_min) / rho_mean > spread_tol) {
    out.kind = KnotType::Kind::unclassified;
    return out;
  }
  if (p < 0) {
    p = -p;
    q = -q;
  }
  const int g = std::gcd(p, q);
  if (g > 1) {
    p /= g;
    q /= g;
  }
  out.p = p;
  out.q = q;
  out.kind = (std::min(std::abs(p), std::abs(q)) <= 1) ? KnotType::Kind::unknot : KnotType::Kind::torus;
  return out;
}

// ---------------------------------------------------------------------------
// Advected Clebsch invariants

struct AdvectedPair {
  ScalarFn alpha, beta;
  double alpha_range = 1.0, beta_range = 1.0;  ///< normalizations of the drifts
  bool beta_is_angle = false;                  ///< compare beta modulo 2 pi
};

struct AdvectionDrift {
  double alpha = 0.0, beta = 0.0;
};

inline AdvectionDrift advection_invariants_check(const FieldLine& line, const AdvectedPair& c) {
  require(c.alpha && c.beta, ErrorKind::invalid_argument, "advection check needs alpha and beta closures");
  require(!line.points.empty(), ErrorKind::invalid_argument, "advection check on an empty line");
  const double a0 = c.alpha(line.seed()), b0 = c.beta(line.seed());
  require(std::isfinite(a0) && std::isfinite(b0), ErrorKind::invalid_argument, "Clebsch closure undefined at the seed");
  AdvectionDrift d;
  for (const auto& p : line.points) {
    const double a = c.alpha(p), b = c.beta(p);
    require(std::isfinite(a) && std::isfinite(b), ErrorKind::invalid_argument, "Clebsch closure undefined on the line");
    d.alpha = std::max(d.alpha, std::abs(a - a0));
    const double db = c.beta_is_angle ? std::remainder(b - b0, two_pi) : b - b0;
    d.beta = std::max(d.beta, std::abs(db));
  }
  d.alpha /= c.alpha_range;
  d.beta /= c.beta_range;
  return d;
}

/// The Hopfion's invariant pair along B-lines: z is constant on fibers.
inline AdvectedPair hopf_advected_pair(double size = 1.0) {
  AdvectedPair c;
  c.alpha = [size](const Vec3& p) {
    const double w = std::norm(hopf_map(p, size));
    return w / (two_pi * (1.0 + w));
  };
  c.beta = [size](const Vec3& p) { return std::arg(hopf_map(p, size)); };
  c.alpha_range = 1.0 / two_pi;
  c.beta_range = two_pi;
  c.beta_is_angle = true;
  return c;
}

inline void write_field_line_csv(std::ostream& os, const FieldLine& line) {
  os << std::setprecision(17) << "s,x,y,z\n";
  for (std::size_t i = 0; i < line.points.size(); ++i)
    os << line.s[i] << ',' << line.points[i].x << ',' << line.points[i].y << ',' << line.points[i].z << '\n';
}

}  // namespace hopfkit
