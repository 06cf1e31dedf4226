#pragma once

// Global functionals: energies, helicities, Chern-Simons, actions and the
// variational / mechanical checks built on them.

#include "hopfkit/em_fields.hpp"

#include <random>

namespace hopfkit {

inline double energy_em(const EMField& f) {
  require(f.sampled(), ErrorKind::invalid_argument, "energy_em: field not sampled");
  return 0.5 * integrate_density(f.grid(), [&](std::size_t q) { return norm2(f.E.get(q)) + norm2(f.B.get(q)); });
}

/// int |v|^2, no factor 1/2.
inline double energy_v(const VectorField3& v) {
  return integrate_density(v.grid(), [&](std::size_t q) { return norm2(v.get(q)); });
}

inline double helicity_AB(const VectorField3& A, const VectorField3& B) { return inner(A, B); }

inline double helicity_v(const VectorField3& v, const CurlInverseOptions& opt = {}) {
  return inner(v, curl_inverse(v, opt));
}

/// Smallest positive curl eigenvalue on the periodic box.
inline double arnold_lambda1(const GridSpec3& g) { return two_pi / g.max_length(); }

struct ArnoldReport {
  double lhs = 0.0, rhs = 0.0, lambda1 = 0.0;
  bool satisfied = true;
  bool equality = false;  ///< lhs == rhs to 1e-10 relative
};

inline ArnoldReport arnold_from(double energy, double helicity, double lambda1) {
  ArnoldReport r;
  r.lhs = energy;
  r.lambda1 = lambda1;
  r.rhs = lambda1 * std::abs(helicity);
  r.satisfied = r.lhs >= r.rhs - 1e-12 * std::abs(r.lhs);
  r.equality = std::abs(r.lhs - r.rhs) <= 1e-10 * std::max(std::abs(r.lhs), 1e-300);
  return r;
}

/// E[v] >= lambda1 |H[v]|.
inline ArnoldReport arnold_report(const VectorField3& v, const CurlInverseOptions& opt = {}) {
  return arnold_from(energy_v(v), helicity_v(v, opt), arnold_lambda1(v.grid()));
}

/// 1/2 int A . curl A with the spectral curl.
inline double chern_simons(const VectorField3& A) { return 0.5 * inner(A, spectral_curl(A)); }

struct ActionValues {
  double euclidean = 0.0;  ///< 1/2 int (E^2 + B^2)
  double minkowski = 0.0;  ///< 1/2 int (E^2 - B^2)
};

inline ActionValues action_values(const EMField& f) {
  require(f.sampled(), ErrorKind::invalid_argument, "action_values: field not sampled");
  const auto& g = f.grid();
  return {0.5 * integrate_density(g, [&](std::size_t q) { return norm2(f.E.get(q)) + norm2(f.B.get(q)); }),
          0.5 * integrate_density(g, [&](std::size_t q) { return norm2(f.E.get(q)) - norm2(f.B.get(q)); })};
}

// ---------------------------------------------------------------------------
// Chern density identity  dA ^ dA = d(A ^ dA)  in 4D

/// Four-potential A_mu(t, x), mu = 0..3.
using Potential4 = std::function<std::array<double, 4>(double t, const Vec3& x)>;

struct ChernIdentityRecord {
  std::vector<double> h, residual;
  double order = 0.0;
};

namespace detail {
inline std::array<double, 4> shifted(const Potential4& A, double t, const Vec3& x, int mu, double d) {
  if (mu == 0) return A(t + d, x);
  Vec3 y = x;
  y[mu - 1] += d;
  return A(t, y);
}

/// dA[mu][nu] = d_mu A_nu by central differences with step h.
inline std::array<std::array<double, 4>, 4> jet(const Potential4& A, double t, const Vec3& x, double h) {
  std::array<std::array<double, 4>, 4> d{};
  for (int mu = 0; mu < 4; ++mu) {
    const auto p = shifted(A, t, x, mu, h), m = shifted(A, t, x, mu, -h);
    for (int nu = 0; nu < 4; ++nu) d[mu][nu] = (p[nu] - m[nu]) / (2.0 * h);
  }
  return d;
}

/// K^mu = eps^{mu nu rho sigma} A_nu d_rho A_sigma.
inline std::array<double, 4> chern_current(const Potential4& A, double t, const Vec3& x, double h) {
  const auto a = A(t, x);
  const auto d = jet(A, t, x, h);
  std::array<double, 4> K{};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      for (int rho = 0; rho < 4; ++rho)
        for (int sg = 0; sg < 4; ++sg) {
          const int e = levi_civita(mu, nu, rho, sg);
          if (e != 0) K[mu] += e * a[nu] * d[rho][sg];
        }
  return K;
}

/// |1/4 eps F F - d_mu K^mu| at one point.
inline double chern_identity_defect(const Potential4& A, double t, const Vec3& x, double h) {
  const auto d = jet(A, t, x, h);
  double F[4][4];
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) F[mu][nu] = d[mu][nu] - d[nu][mu];
  double lhs = 0.0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      for (int rho = 0; rho < 4; ++rho)
        for (int sg = 0; sg < 4; ++sg) {
          const int e = levi_civita(mu, nu, rho, sg);
          if (e != 0) lhs += 0.25 * e * F[mu][nu] * F[rho][sg];
        }
  double rhs = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    Vec3 xp = x, xm = x;
    double tp = t, tm = t;
    if (mu == 0) {
      tp += h;
      tm -= h;
    } else {
      xp[mu - 1] += h;
      xm[mu - 1] -= h;
    }
    rhs += (chern_current(A, tp, xp, h)[mu] - chern_current(A, tm, xm, h)[mu]) / (2.0 * h);
  }
  return std::abs(lhs - rhs);
}
}  // namespace detail

/// Sup of the finite-difference defect of the Abelian Chern identity at
/// the time slice t, on the nodes of the coarsest grid, for each grid count
/// in `counts` (h = L / n). Reports the fitted convergence order.
inline ChernIdentityRecord chern_density_identity_check(const Potential4& A, const GridSpec3& box, double t = 0.0,
                                                       std::vector<int> counts = {16, 32, 64}) {
  require(static_cast<bool>(A), ErrorKind::invalid_argument, "chern_density_identity_check needs an analytic closure");
  require(counts.size() >= 2, ErrorKind::invalid_argument, "need at least two resolutions");
  std::sort(counts.begin(), counts.end());
  GridSpec3 coarse = box;
  coarse.n = {counts.front(), counts.front(), counts.front()};
  coarse.validate();
  ChernIdentityRecord rec;
  for (int n : counts) {
    const double h = box.max_length() / n;
    double worst = 0.0;
    for (std::size_t q = 0; q < coarse.size(); ++q)
      worst = std::max(worst, detail::chern_identity_defect(A, t, coarse.node(q), h));
    rec.h.push_back(h);
    rec.residual.push_back(worst);
  }
  bool all_zero = std::all_of(rec.residual.begin(), rec.residual.end(), [](double r) { return r == 0.0; });
  rec.order = all_zero ? 0.0 : convergence_order(rec.h, rec.residual);
  return rec;
}

// ---------------------------------------------------------------------------
// Functional derivative of CS

struct VariationCheck {
  double max_rel_error = 0.0;  ///< max |fd - curl A| / sup |curl A|
  double max_abs_error = 0.0;
  double ref_scale = 0.0;
};

/// Perturbs single nodal components of A, differentiates CS by a central
/// difference and compares (dCS / h^3) with the spectral curl at the node.
inline VariationCheck cs_variation_check(const VectorField3& A, int probes = 12, std::uint64_t seed = 7,
                                         double rel_eps = 1e-2) {
  require(probes >= 1, ErrorKind::invalid_argument, "cs_variation_check: probes must be >= 1");
  const VectorField3 curl = spectral_curl(A);
  VariationCheck out;
  out.ref_scale = sup_norm(curl);
  double amax = 0.0;
  for (int a = 0; a < 3; ++a)
    for (double x : A.component(a)) amax = std::max(amax, std::abs(x));
  const double eps = rel_eps * (amax > 0.0 ? amax : 1.0);
  const double cell = A.grid().cell_volume();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> node(0, A.size() - 1);
  std::uniform_int_distribution<int> comp(0, 2);
  VectorField3 work = A;
  work.drop_closure();
  for (int p = 0; p < probes; ++p) {
    const std::size_t q = node(rng);
    const int c = comp(rng);
    const double keep = work.component(c)[q];
    work.component(c)[q] = keep + eps;
    const double up = chern_simons(work);
    work.component(c)[q] = keep - eps;
    const double dn = chern_simons(work);
    work.component(c)[q] = keep;
    const double fd = (up - dn) / (2.0 * eps * cell);
    out.max_abs_error = std::max(out.max_abs_error, std::abs(fd - curl.get(q)[c]));
  }
  out.max_rel_error = out.ref_scale > 0.0 ? out.max_abs_error / out.ref_scale : out.max_abs_error;
  return out;
}

// ---------------------------------------------------------------------------
// Duality-symmetric two-potential action

struct DualityActionRecord {
  double action = 0.0;           ///< time integral over the interior slices
  double maxwell_e = 0.0;        ///< sup |curl Zdot - curl curl A|
  double maxwell_b = 0.0;        ///< sup |curl Adot + curl curl Z|
};

/// -1/2 int dt int [(curl Z).Adot + (curl A)^2 - (curl A).Zdot + (curl Z)^2]
/// with centred time differences on the interior slices.
inline DualityActionRecord duality_symmetric_action(std::span<const VectorField3> A, std::span<const VectorField3> Z,
                                                    double dt) {
  require(A.size() >= 3 && Z.size() == A.size(), ErrorKind::invalid_argument,
          "duality_symmetric_action needs >= 3 matching slices of A and Z");
  require(dt > 0.0, ErrorKind::invalid_argument, "duality_symmetric_action: dt must be positive");
  DualityActionRecord r;
  for (std::size_t t = 1; t + 1 < A.size(); ++t) {
    const auto& g = A[t].grid();
    require(Z[t].grid() == g, ErrorKind::mismatch, "A and Z grids differ");
    const VectorField3 cA = spectral_curl(A[t]), cZ = spectral_curl(Z[t]);
    const VectorField3 ccA = spectral_curl(cA), ccZ = spectral_curl(cZ);
    VectorField3 Adot(g), Zdot(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
      Adot.set(q, (A[t + 1].get(q) - A[t - 1].get(q)) / (2.0 * dt));
      Zdot.set(q, (Z[t + 1].get(q) - Z[t - 1].get(q)) / (2.0 * dt));
    }
    const VectorField3 cZdot = spectral_curl(Zdot), cAdot = spectral_curl(Adot);
    r.action += -0.5 * dt * integrate_density(g, [&](std::size_t q) {
      return dot(cZ.get(q), Adot.get(q)) + norm2(cA.get(q)) - dot(cA.get(q), Zdot.get(q)) + norm2(cZ.get(q));
    });
    for (std::size_t q = 0; q < g.size(); ++q) {
      r.maxwell_e = std::max(r.maxwell_e, norm(cZdot.get(q) - ccA.get(q)));
      r.maxwell_b = std::max(r.maxwell_b, norm(cAdot.get(q) + ccZ.get(q)));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mechanical analogy: q' = grad sigma solves Newton with V = -|grad sigma|^2 / 2

using PointN = std::vector<double>;
using ScalarFnN = std::function<double(const PointN&)>;

inline PointN richardson_gradient_n(const ScalarFnN& f, const PointN& p, double h = 1e-3) {
  PointN g(p.size());
  PointN y = p;
  auto central = [&](std::size_t i, double s) {
    y[i] = p[i] + s;
    const double a = f(y);
    y[i] = p[i] - s;
    const double b = f(y);
    y[i] = p[i];
    return (a - b) / (2.0 * s);
  };
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = (4.0 * central(i, 0.5 * h) - central(i, h)) / 3.0;
  return g;
}

struct MechanicalRecord {
  std::vector<double> times;
  std::vector<PointN> path;
  double action = 0.0;        ///< Simpson quadrature of 1/2 |q'|^2 - V
  double delta_sigma = 0.0;   ///< sigma(q(T)) - sigma(q(0))
  double newton_residual = 0.0;  ///< sup |q'' + grad V| / (1 + |grad V|)
};

inline MechanicalRecord mechanical_analogy(const ScalarFnN& sigma, PointN q0, double T, double dt) {
  require(T > 0.0 && dt > 0.0, ErrorKind::invalid_argument, "mechanical_analogy: T and dt must be positive");
  const int steps = static_cast<int>(std::llround(T / dt));
  require(steps >= 2, ErrorKind::invalid_argument, "mechanical_analogy: T / dt must be >= 2");
  const double h = T / steps;
  const std::size_t n = q0.size();
  auto rhs = [&](const PointN& q) { return richardson_gradient_n(sigma, q); };
  auto axpy = [n](const PointN& a, double s, const PointN& b) {
    PointN r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  auto sq = [](const PointN& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
  };

  MechanicalRecord rec;
  rec.times.reserve(steps + 1);
  rec.path.reserve(steps + 1);
  std::vector<double> lagrangian;
  PointN q = std::move(q0);
  for (int s = 0; s <= steps; ++s) {
    const PointN g = rhs(q);
    rec.times.push_back(s * h);
    rec.path.push_back(q);
    lagrangian.push_back(sq(g));  // 1/2 |q'|^2 + 1/2 |grad sigma|^2 with q' = grad sigma
    if (s == steps) break;
    const PointN k1 = g, k2 = rhs(axpy(q, 0.5 * h, k1)), k3 = rhs(axpy(q, 0.5 * h, k2)), k4 = rhs(axpy(q, h, k3));
    for (std::size_t i = 0; i < n; ++i) q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    require(std::all_of(q.begin(), q.end(), [](double x) { return std::isfinite(x) && std::abs(x) < 1e150; }),
            ErrorKind::not_converged, "mechanical_analogy: trajectory diverged at step " + std::to_string(s + 1));
  }

  // composite Simpson, trapezoid on a trailing odd interval
  double S = 0.0;
  const int even = steps - steps % 2;
  for (int s = 0; s < even; s += 2) S += h / 3.0 * (lagrangian[s] + 4.0 * lagrangian[s + 1] + lagrangian[s + 2]);
  if (even < steps) S += 0.5 * h * (lagrangian[even] + lagrangian[steps]);
  rec.action = S;
  rec.delta_sigma = sigma(rec.path.back()) - sigma(rec.path.front());

  // q'' from the path against -grad V = grad (|grad sigma|^2 / 2)
  const ScalarFnN minus_v = [&](const PointN& p) { return 0.5 * sq(richardson_gradient_n(sigma, p)); };
  const int stride = std::max(1, steps / 50);
  for (int s = stride; s + stride <= steps; s += stride) {
    const PointN force = richardson_gradient_n(minus_v, rec.path[s]);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // second difference over the stored trajectory, step `stride * h`
      const double H = stride * h;
      const double acc = (rec.path[s + stride][i] - 2.0 * rec.path[s][i] + rec.path[s - stride][i]) / (H * H);
      res = std::max(res, std::abs(acc - force[i]));
    }
    rec.newton_residual = std::max(rec.newton_residual, res / (1.0 + std::sqrt(sq(force))));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Report record

struct DiagnosticsReport {
  double energy_em = 0.0, energy_v = 0.0, helicity_ab = 0.0, helicity_v = 0.0, cs = 0.0;
  NullResiduals null;
  DivergenceResiduals div;
  ArnoldReport arnold;
  double scale = 1.0;
  double kappa_fit = 0.0, force_free = 0.0;

  /// Flat key=value text, fixed key order.
  std::string to_text() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "energy_em=" << energy_em << '\n'
       << "energy_v=" << energy_v << '\n'
       << "helicity_ab=" << helicity_ab << '\n'
       << "helicity_v=" << helicity_v << '\n'
       << "cs=" << cs << '\n'
       << "null_dot=" << null.dot << '\n'
       << "null_norm=" << null.norm << '\n'
       << "div_b=" << div.div_b << '\n'
       << "div_e=" << div.div_e << '\n'
       << "arnold_lhs=" << arnold.lhs << '\n'
       << "arnold_rhs=" << arnold.rhs << '\n'
       << "arnold_lambda1=" << arnold.lambda1 << '\n'
       << "arnold_ok=" << (arnold.satisfied ? "true" : "false") << '\n'
       << "scale=" << scale << '\n'
       << "kappa_fit=" << kappa_fit << '\n'
       << "force_free=" << force_free << '\n';
    return os.str();
  }
};

}  // namespace hopfkit
