#pragma once

// Curl eigenfields on the periodic box, the gradient flow dA/dt = curl A,
// and energy relaxation at fixed helicity.

#include "hopfkit/functionals.hpp"

#include <map>
#include <ostream>

namespace hopfkit {

struct BeltramiMode {
  std::array<int, 3> k{0, 0, 1};
  int sign = 1;
  double amplitude = 1.0;
  double phase = 0.0;

  Vec3 wavevector(const GridSpec3& g) const {
    return {two_pi * k[0] / g.length[0], two_pi * k[1] / g.length[1], two_pi * k[2] / g.length[2]};
  }
  double kappa(const GridSpec3& g) const { return sign * norm(wavevector(g)); }

  /// Orthonormal e1, e2 with e1 x e2 along k.
  std::pair<Vec3, Vec3> frame(const GridSpec3& g) const {
    const Vec3 K = wavevector(g);
    const Vec3 kh = K / norm(K);
    const Vec3 aux = std::abs(kh.y) > 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 e1 = cross(aux, kh);
    e1 = e1 / norm(e1);
    return {e1, cross(kh, e1)};
  }

  /// a (cos th e1 - s sin th e2), th = K.x + phase; curl v = s |K| v.
  Vec3 operator()(const Vec3& x, const GridSpec3& g) const {
    const Vec3 K = wavevector(g);
    const auto [e1, e2] = frame(g);
    const double th = dot(K, x) + phase;
    return amplitude * (std::cos(th) * e1 - sign * std::sin(th) * e2);
  }
};

inline VectorField3 build_beltrami_mode(const BeltramiMode& m, const GridSpec3& grid) {
  grid.validate();
  require(m.k != std::array<int, 3>{0, 0, 0}, ErrorKind::invalid_argument, "Beltrami mode needs k != 0");
  require(m.sign == 1 || m.sign == -1, ErrorKind::invalid_argument, "Beltrami sign must be +1 or -1");
  for (int a = 0; a < 3; ++a)
    require(2 * std::abs(m.k[a]) < grid.n[a], ErrorKind::invalid_argument,
            "wavevector component " + std::to_string(m.k[a]) + " not resolved by " + std::to_string(grid.n[a]) +
                " points (need |k| < n/2)");
  return VectorField3::sample(grid, [m, grid](const Vec3& x) { return m(x, grid); });
}

inline VectorField3 build_beltrami_mode(std::array<int, 3> k, int sign, double amplitude, const GridSpec3& grid,
                                        double phase = 0.0) {
  return build_beltrami_mode(BeltramiMode{k, sign, amplitude, phase}, grid);
}

struct ForceFreeResult {
  double kappa_fit = 0.0;
  double residual = 0.0;   ///< ||curl B - kappa B|| / ||B||
  bool curl_free = false;  ///< curl B vanishes: degenerate, kappa_fit = 0
  double tangency = 0.0;   ///< ||B . grad kappa|| / || |B| |grad kappa| ||, in [0, 1]
};

inline ForceFreeResult force_free_residual(const VectorField3& B, const ScalarField3* kappa = nullptr) {
  const double bb = inner(B, B);
  require(bb > 0.0, ErrorKind::degenerate, "force_free_residual: zero field");
  const VectorField3 c = spectral_curl(B);
  ForceFreeResult r;
  r.kappa_fit = inner(B, c) / bb;
  r.residual = std::sqrt(integrate_density(B.grid(), [&](std::size_t q) {
                 return norm2(c.get(q) - r.kappa_fit * B.get(q));
               }) / bb);
  r.curl_free = inner(c, c) <= 1e-24 * bb * std::pow(arnold_lambda1(B.grid()), 2);
  if (kappa) {
    const VectorField3 gk = spectral_grad(*kappa);
    const double den = std::sqrt(
        integrate_density(B.grid(), [&](std::size_t q) { return norm2(B.get(q)) * norm2(gk.get(q)); }));
    const double num = std::sqrt(integrate_density(B.grid(), [&](std::size_t q) {
      const double t = dot(B.get(q), gk.get(q));
      return t * t;
    }));
    r.tangency = den > 0.0 ? num / den : 0.0;
  }
  return r;
}

struct CurlEigenvalue {
  int shell;         ///< integer |m|^2
  double kappa;
  int multiplicity;  ///< number of wavevectors in the shell
};

/// Curl eigenvalues +-|K| on divergence-free Fourier modes with integer
/// |m|^2 <= shell_max, sorted by |kappa| then sign.
inline std::vector<CurlEigenvalue> curl_spectrum(const GridSpec3& g, int shell_max) {
  require(shell_max >= 1, ErrorKind::invalid_argument, "curl_spectrum: shell_max must be >= 1");
  std::map<std::pair<long long, int>, CurlEigenvalue> groups;  // keyed by rounded |K|
  const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(shell_max))));
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j)
      for (int k = -r; k <= r; ++k) {
        const int m2 = i * i + j * j + k * k;
        if (m2 == 0 || m2 > shell_max) continue;
        const double K = norm(Vec3{two_pi * i / g.length[0], two_pi * j / g.length[1], two_pi * k / g.length[2]});
        const long long key = std::llround(K * 1e9);
        for (int s : {1, -1}) {
          auto [it, fresh] = groups.try_emplace({key, s}, CurlEigenvalue{m2, s * K, 0});
          ++it->second.multiplicity;
        }
      }
  std::vector<CurlEigenvalue> out;
  for (const auto& [key, ev] : groups) out.push_back(ev);
  std::sort(out.begin(), out.end(), [](const CurlEigenvalue& a, const CurlEigenvalue& b) {
    if (std::abs(a.kappa) != std::abs(b.kappa)) return std::abs(a.kappa) < std::abs(b.kappa);
    return a.kappa > b.kappa;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Gradient flow dA/dt = curl A

struct FlowSeries {
  std::vector<double> times;
  std::vector<VectorField3> slices;
  double kappa_max = 0.0;  ///< largest |kappa| carried by the initial data
};

/// RK4 in Fourier space. Modes below 1e-13 of the peak amplitude are
/// dropped from the initial data: the flow amplifies kappa > 0 modes
/// exponentially and would otherwise blow up round-off noise.
inline FlowSeries gradient_flow_evolve(const VectorField3& A0, double T, double dt, int slice_every = 1) {
  require(T >= 0.0 && dt > 0.0, ErrorKind::invalid_argument, "gradient_flow_evolve: need T >= 0 and dt > 0");
  require(slice_every >= 1, ErrorKind::invalid_argument, "gradient_flow_evolve: slice_every must be >= 1");
  Fft3 fft(A0.grid());
  auto s = forward(fft, A0);
  const std::size_t n = s.c[0].size();
  double peak = 0.0;
  for (std::size_t q = 0; q < n; ++q)
    peak = std::max(peak, std::sqrt(std::norm(s.c[0][q]) + std::norm(s.c[1][q]) + std::norm(s.c[2][q])));
  FlowSeries out;
  for (std::size_t q = 0; q < n; ++q) {
    const double amp = std::sqrt(std::norm(s.c[0][q]) + std::norm(s.c[1][q]) + std::norm(s.c[2][q]));
    if (amp <= 1e-13 * peak) {
      for (auto& c : s.c) c[q] = 0.0;
      continue;
    }
    out.kappa_max = std::max(out.kappa_max, norm(fft.wavevector(q)));
  }
  require(dt * out.kappa_max < 1.0, ErrorKind::invalid_argument,
          "gradient_flow_evolve: dt = " + std::to_string(dt) + " violates the stability bound dt < 1/kappa_max = " +
              std::to_string(1.0 / out.kappa_max));
  {
    VectorSpectrum probe = s;
    require(relative_divergence(fft, probe) <= 1e-8, ErrorKind::not_solenoidal,
            "gradient_flow_evolve: initial potential is not divergence-free");
  }
  const int steps = static_cast<int>(std::llround(T / dt));
  const double h = steps > 0 ? T / steps : 0.0;
  double norm0 = 0.0;
  for (std::size_t q = 0; q < n; ++q) norm0 += std::norm(s.c[0][q]) + std::norm(s.c[1][q]) + std::norm(s.c[2][q]);
  norm0 = std::sqrt(norm0);

  auto record = [&](int step) {
    out.times.push_back(step * h);
    out.slices.push_back(inverse(fft, s));
  };
  auto axpy = [n](const VectorSpectrum& a, double c, const VectorSpectrum& b) {
    VectorSpectrum r = a;
    for (int d = 0; d < 3; ++d)
      for (std::size_t q = 0; q < n; ++q) r.c[d][q] += c * b.c[d][q];
    return r;
  };
  record(0);
  for (int step = 1; step <= steps; ++step) {
    const auto k1 = spectral_curl(fft, s);
    const auto k2 = spectral_curl(fft, axpy(s, 0.5 * h, k1));
    const auto k3 = spectral_curl(fft, axpy(s, 0.5 * h, k2));
    const auto k4 = spectral_curl(fft, axpy(s, h, k3));
    double nrm = 0.0;
    for (int d = 0; d < 3; ++d)
      for (std::size_t q = 0; q < n; ++q) {
        s.c[d][q] += h / 6.0 * (k1.c[d][q] + 2.0 * k2.c[d][q] + 2.0 * k3.c[d][q] + k4.c[d][q]);
        nrm += std::norm(s.c[d][q]);
      }
    const double bound = std::exp(out.kappa_max * step * h) * 10.0 * norm0;
    require(std::sqrt(nrm) <= bound, ErrorKind::not_converged,
            "gradient_flow_evolve: instability detected at t = " + std::to_string(step * h));
    if (step % slice_every == 0 || step == steps) record(step);
  }
  return out;
}

struct FlowBalance {
  double dissipation = 0.0;  ///< int dt int |curl A|^2 (Simpson)
  double delta_cs = 0.0;     ///< CS(A(T)) - CS(A(0))
};

/// Both sides of int_0^T dt int |B|^2 = CS(T) - CS(0) on a flow series.
/// Simpson needs uniformly spaced slices; an odd interval count falls back
/// to the trapezoid rule on the last interval.
inline FlowBalance flow_energy_balance(const FlowSeries& s) {
  require(s.slices.size() >= 2, ErrorKind::invalid_argument, "flow_energy_balance: need >= 2 slices");
  std::vector<double> b2(s.slices.size());
  for (std::size_t t = 0; t < s.slices.size(); ++t) {
    const auto c = spectral_curl(s.slices[t]);
    b2[t] = inner(c, c);
  }
  const std::size_t m = s.slices.size() - 1;
  const std::size_t even = m - m % 2;
  FlowBalance r;
  for (std::size_t t = 0; t < even; t += 2) {
    const double h = 0.5 * (s.times[t + 2] - s.times[t]);
    r.dissipation += h / 3.0 * (b2[t] + 4.0 * b2[t + 1] + b2[t + 2]);
  }
  if (even < m) r.dissipation += 0.5 * (s.times[m] - s.times[even]) * (b2[even] + b2[m]);
  r.delta_cs = chern_simons(s.slices.back()) - chern_simons(s.slices.front());
  return r;
}

// ---------------------------------------------------------------------------
// Relaxation at fixed helicity

struct RelaxOptions {
  double tol = 1e-9;       ///< force-free residual at convergence (relative to lambda1)
  int max_iters = 1000;
};

struct RelaxTraceRow {
  int iter;
  double energy, helicity, residual;
};

struct RelaxResult {
  VectorField3 field;
  std::vector<RelaxTraceRow> trace;
  int iterations = 0;
  double energy = 0.0, helicity = 0.0, lambda = 0.0;
};

/// Projected steepest descent on E = int |v|^2 at fixed H = int v . curl^-1 v.
/// The constrained gradient is g = v - lambda curl^-1 v with lambda the
/// Lagrange multiplier; after each step v is rescaled back onto the
/// helicity level set (H is quadratic). The step is halved until energy
/// does not increase. Everything is done on the spectrum.
inline RelaxResult relax_to_minimizer(const VectorField3& v0, const RelaxOptions& opt = {}) {
  Fft3 fft(v0.grid());
  auto s = forward(fft, v0);
  const std::size_t n = s.c[0].size();
  const double N = static_cast<double>(n);
  const double weight = v0.grid().volume() / (N * N);  // Parseval: int a.b = weight sum Re(a^ . conj b^)
  const double lambda1 = arnold_lambda1(v0.grid());
  const complex I(0.0, 1.0);

  double vnorm = 0.0;
  for (std::size_t q = 0; q < n; ++q) vnorm += std::norm(s.c[0][q]) + std::norm(s.c[1][q]) + std::norm(s.c[2][q]);
  require(std::abs(s.c[0][0]) + std::abs(s.c[1][0]) + std::abs(s.c[2][0]) <= 1e-10 * std::sqrt(vnorm),
          ErrorKind::nonzero_mean, "relax_to_minimizer: input has a nonzero mean");
  require(relative_divergence(fft, s) <= 1e-8, ErrorKind::not_solenoidal,
          "relax_to_minimizer: input is not divergence-free");

  auto curl_inv = [&](const VectorSpectrum& v) {
    VectorSpectrum a{{Spectrum(n), Spectrum(n), Spectrum(n)}};
    for (std::size_t q = 0; q < n; ++q) {
      const Vec3 k = fft.wavevector(q);
      const double k2 = norm2(k);
      if (k2 == 0.0) continue;
      a.c[0][q] = I * (k.y * v.c[2][q] - k.z * v.c[1][q]) / k2;
      a.c[1][q] = I * (k.z * v.c[0][q] - k.x * v.c[2][q]) / k2;
      a.c[2][q] = I * (k.x * v.c[1][q] - k.y * v.c[0][q]) / k2;
    }
    return a;
  };
  auto ip = [&](const VectorSpectrum& a, const VectorSpectrum& b) {
    std::vector<double> terms(n);
    for (std::size_t q = 0; q < n; ++q)
      terms[q] = (a.c[0][q] * std::conj(b.c[0][q]) + a.c[1][q] * std::conj(b.c[1][q]) +
                  a.c[2][q] * std::conj(b.c[2][q])).real();
    return weight * pairwise_sum(terms);
  };
  struct State {
    double E, H, residual, lambda;
  };
  auto evaluate = [&](const VectorSpectrum& v) {
    const auto a = curl_inv(v);
    const auto c = spectral_curl(fft, v);
    State st;
    st.E = ip(v, v);
    st.H = ip(v, a);
    st.lambda = st.E / st.H;
    const double kfit = ip(v, c) / st.E;
    VectorSpectrum r = c;
    for (int d = 0; d < 3; ++d)
      for (std::size_t q = 0; q < n; ++q) r.c[d][q] -= kfit * v.c[d][q];
    st.residual = std::sqrt(ip(r, r) / st.E) / lambda1;
    return st;
  };

  State st = evaluate(s);
  require(std::abs(st.H) * lambda1 > 1e-10 * st.E, ErrorKind::degenerate,
          "relax_to_minimizer: helicity is zero, so the fixed-helicity constraint set is degenerate "
          "(the infimum of the energy is 0 and no minimizer exists)");
  const double H0 = st.H;
  RelaxResult res;
  res.trace.push_back({0, st.E, st.H, st.residual});
  double tau = 1.0;
  int it = 0;
  while (st.residual > opt.tol) {
    require(it < opt.max_iters, ErrorKind::not_converged,
            "relax_to_minimizer: no convergence in " + std::to_string(opt.max_iters) +
                " iterations (residual " + std::to_string(st.residual) + ")");
    ++it;
    const auto a = curl_inv(s);
    const double lam = ip(s, a) / ip(a, a);
    VectorSpectrum trial;
    State next{};
    for (int attempt = 0;; ++attempt) {
      trial = s;
      for (int d = 0; d < 3; ++d)
        for (std::size_t q = 0; q < n; ++q) trial.c[d][q] -= tau * (s.c[d][q] - lam * a.c[d][q]);
      const State raw = evaluate(trial);
      require(raw.H * H0 > 0.0, ErrorKind::not_converged, "relax_to_minimizer: helicity changed sign");
      const double scale = std::sqrt(H0 / raw.H);
      for (auto& c : trial.c)
        for (auto& x : c) x *= scale;
      next = evaluate(trial);
      if (next.E <= st.E * (1.0 + 1e-14) || attempt >= 40) break;
      tau *= 0.5;
    }
    require(next.E <= st.E * (1.0 + 1e-14), ErrorKind::not_converged,
            "relax_to_minimizer: line search failed to decrease the energy");
    s = std::move(trial);
    st = next;
    res.trace.push_back({it, st.E, st.H, st.residual});
    tau = std::min(1.0, 2.0 * tau);
  }
  res.iterations = it;
  res.field = inverse(fft, s);
  res.energy = st.E;
  res.helicity = st.H;
  res.lambda = st.E / std::abs(st.H);
  return res;
}

inline void write_relax_trace(std::ostream& os, const std::vector<RelaxTraceRow>& rows) {
  os << std::setprecision(17) << "iter,energy,helicity,residual\n";
  for (const auto& r : rows) os << r.iter << ',' << r.energy << ',' << r.helicity << ',' << r.residual << '\n';
}

// ---------------------------------------------------------------------------
// Steady Euler and induction

/// w = v x curl v; alpha solves lap alpha = div w; returns
/// ||w - grad alpha|| / ||v||^2 (L2 norms).
inline double euler_steady_residual(const VectorField3& v) {
  const double vv = inner(v, v);
  if (vv == 0.0) return 0.0;
  const VectorField3 w = dealiased_cross(v, spectral_curl(v));
  const ScalarField3 alpha = poisson_solve(spectral_div(w));
  const VectorField3 ga = spectral_grad(alpha);
  const double r2 = integrate_density(v.grid(), [&](std::size_t q) { return norm2(w.get(q) - ga.get(q)); });
  return std::sqrt(r2) / vv;
}

/// sup |dB/dt - curl(v x B)| over interior slices.
inline double induction_residual(std::span<const VectorField3> v, std::span<const VectorField3> B, double dt) {
  require(B.size() >= 3 && v.size() == B.size(), ErrorKind::invalid_argument,
          "induction_residual needs >= 3 matching slices of v and B");
  require(dt > 0.0, ErrorKind::invalid_argument, "induction_residual: dt must be positive");
  double worst = 0.0;
  for (std::size_t t = 1; t + 1 < B.size(); ++t) {
    const VectorField3 rhs = spectral_curl(dealiased_cross(v[t], B[t]));
    for (std::size_t q = 0; q < rhs.size(); ++q)
      worst = std::max(worst, norm((B[t + 1].get(q) - B[t - 1].get(q)) / (2.0 * dt) - rhs.get(q)));
  }
  return worst;
}

using ScalarFnT = std::function<double(double, const Vec3&)>;

/// Pointwise |v x B - (grad beta alpha_t - grad alpha beta_t)| with
/// B = grad alpha x grad beta, sup over the points.
inline double clebsch_induction_residual(const ScalarFnT& alpha, const ScalarFnT& beta, const VectorFn& v, double t,
                                         std::span<const Vec3> points, double h = 1e-4) {
  double worst = 0.0;
  for (const Vec3& p : points) {
    const Vec3 ga = richardson_gradient([&](const Vec3& y) { return alpha(t, y); }, p, h);
    const Vec3 gb = richardson_gradient([&](const Vec3& y) { return beta(t, y); }, p, h);
    auto dtime = [&](const ScalarFnT& f) {
      const double d1 = (f(t + h, p) - f(t - h, p)) / (2.0 * h);
      const double d2 = (f(t + 0.5 * h, p) - f(t - 0.5 * h, p)) / h;
      return (4.0 * d2 - d1) / 3.0;
    };
    const Vec3 lhs = cross(v(p), cross(ga, gb));
    const Vec3 rhs = dtime(alpha) * gb - dtime(beta) * ga;
    worst = std::max(worst, norm(lhs - rhs));
  }
  return worst;
}

}  // namespace hopfkit
