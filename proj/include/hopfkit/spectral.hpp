#pragma once

// Fourier-space operators on the periodic box (FFTW3 backend).
//
// Derivatives use the effective wavenumber k' = 2 pi m / L with the
// Nyquist index mapped to zero, so curl, div and curl_inverse stay mutually
// consistent on even grids.

#include "hopfkit/grid.hpp"

#include <fftw3.h>

#include <memory>

namespace hopfkit {

using Spectrum = std::vector<complex>;

class Fft3 {
public:
  explicit Fft3(const GridSpec3& g) : grid_(g), buf_(g.size()) {
    g.validate();
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_3d(g.n[0], g.n[1], g.n[2], p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_3d(g.n[0], g.n[1], g.n[2], p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (int a = 0; a < 3; ++a) {
      k_[a].resize(g.n[a]);
      for (int m = 0; m < g.n[a]; ++m) {
        int s = m <= g.n[a] / 2 ? m : m - g.n[a];
        if (g.n[a] % 2 == 0 && m == g.n[a] / 2) s = 0;
        k_[a][m] = two_pi * s / g.length[a];
      }
    }
  }
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;
  ~Fft3() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  const GridSpec3& grid() const { return grid_; }

  Spectrum forward(std::span<const double> x) {
    for (std::size_t q = 0; q < x.size(); ++q) buf_[q] = x[q];
    fftw_execute(fwd_);
    return buf_;
  }
  /// Inverse transform with 1/N normalization, real part.
  std::vector<double> inverse(const Spectrum& s) {
    buf_ = s;
    fftw_execute(inv_);
    std::vector<double> out(buf_.size());
    const double inv_n = 1.0 / static_cast<double>(buf_.size());
    for (std::size_t q = 0; q < out.size(); ++q) out[q] = buf_[q].real() * inv_n;
    return out;
  }

  /// Effective wavevector of flat spectral index q.
  Vec3 wavevector(std::size_t q) const {
    const auto& g = grid_;
    const int k = static_cast<int>(q % g.n[2]);
    const int j = static_cast<int>((q / g.n[2]) % g.n[1]);
    const int i = static_cast<int>(q / (static_cast<std::size_t>(g.n[1]) * g.n[2]));
    return {k_[0][i], k_[1][j], k_[2][k]};
  }
  /// Integer mode numbers (signed, Nyquist kept) of flat index q.
  std::array<int, 3> modes(std::size_t q) const {
    const auto& g = grid_;
    const int idx[3] = {static_cast<int>(q / (static_cast<std::size_t>(g.n[1]) * g.n[2])),
                        static_cast<int>((q / g.n[2]) % g.n[1]), static_cast<int>(q % g.n[2])};
    std::array<int, 3> m{};
    for (int a = 0; a < 3; ++a) m[a] = idx[a] <= g.n[a] / 2 ? idx[a] : idx[a] - g.n[a];
    return m;
  }

private:
  GridSpec3 grid_;
  Spectrum buf_;
  fftw_plan fwd_{}, inv_{};
  std::array<std::vector<double>, 3> k_;
};

struct VectorSpectrum {
  std::array<Spectrum, 3> c;
};

inline VectorSpectrum forward(Fft3& fft, const VectorField3& v) {
  require(v.sampled(), ErrorKind::invalid_argument, "spectral operator needs a sampled field");
  require(v.grid() == fft.grid(), ErrorKind::mismatch, "field grid does not match FFT grid");
  return {{fft.forward(v.component(0)), fft.forward(v.component(1)), fft.forward(v.component(2))}};
}

inline VectorField3 inverse(Fft3& fft, const VectorSpectrum& s) {
  return VectorField3(fft.grid(), {fft.inverse(s.c[0]), fft.inverse(s.c[1]), fft.inverse(s.c[2])});
}

inline VectorSpectrum spectral_curl(const Fft3& fft, const VectorSpectrum& s) {
  VectorSpectrum out{{Spectrum(s.c[0].size()), Spectrum(s.c[0].size()), Spectrum(s.c[0].size())}};
  const complex i(0.0, 1.0);
  for (std::size_t q = 0; q < s.c[0].size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    out.c[0][q] = i * (k.y * s.c[2][q] - k.z * s.c[1][q]);
    out.c[1][q] = i * (k.z * s.c[0][q] - k.x * s.c[2][q]);
    out.c[2][q] = i * (k.x * s.c[1][q] - k.y * s.c[0][q]);
  }
  return out;
}

inline VectorField3 spectral_curl(const VectorField3& v) {
  Fft3 fft(v.grid());
  return inverse(fft, spectral_curl(fft, forward(fft, v)));
}

inline ScalarField3 spectral_div(const VectorField3& v) {
  Fft3 fft(v.grid());
  const auto s = forward(fft, v);
  Spectrum d(s.c[0].size());
  const complex i(0.0, 1.0);
  for (std::size_t q = 0; q < d.size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    d[q] = i * (k.x * s.c[0][q] + k.y * s.c[1][q] + k.z * s.c[2][q]);
  }
  return ScalarField3(v.grid(), fft.inverse(d));
}

inline VectorField3 spectral_grad(const ScalarField3& f) {
  Fft3 fft(f.grid());
  const auto s = fft.forward(f.samples());
  VectorSpectrum g{{Spectrum(s.size()), Spectrum(s.size()), Spectrum(s.size())}};
  const complex i(0.0, 1.0);
  for (std::size_t q = 0; q < s.size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    for (int a = 0; a < 3; ++a) g.c[a][q] = i * k[a] * s[q];
  }
  return inverse(fft, g);
}

/// Relative spectral divergence ||k . v^|| / (||k|| ||v^||), in [0, 1].
inline double relative_divergence(const Fft3& fft, const VectorSpectrum& s) {
  double num = 0.0, den = 0.0;
  for (std::size_t q = 0; q < s.c[0].size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    const complex kv = k.x * s.c[0][q] + k.y * s.c[1][q] + k.z * s.c[2][q];
    num += std::norm(kv);
    den += norm2(k) * (std::norm(s.c[0][q]) + std::norm(s.c[1][q]) + std::norm(s.c[2][q]));
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

struct CurlInverseOptions {
  double divergence_tol = 1e-8;  ///< on relative_divergence
  double mean_tol = 1e-10;       ///< |mean| relative to the rms of v
};

/// Coulomb-gauge inverse curl, A^ = i k x v^ / |k|^2, A^(0) = 0.
inline VectorField3 curl_inverse(const VectorField3& v, const CurlInverseOptions& opt = {}) {
  Fft3 fft(v.grid());
  const auto s = forward(fft, v);
  const double n = static_cast<double>(v.size());
  double sumsq = 0.0;
  for (std::size_t q = 0; q < v.size(); ++q) sumsq += norm2(v.get(q));
  const double rms = std::sqrt(sumsq / n);
  const Vec3 mean{s.c[0][0].real() / n, s.c[1][0].real() / n, s.c[2][0].real() / n};
  require(norm(mean) <= opt.mean_tol * rms, ErrorKind::nonzero_mean,
          "curl_inverse: field has nonzero mean (|mean| = " + std::to_string(norm(mean)) +
              "); curl^-1 is undefined on the k = 0 mode");
  const double div = relative_divergence(fft, s);
  require(div <= opt.divergence_tol, ErrorKind::not_solenoidal,
          "curl_inverse: relative divergence residual " + std::to_string(div) + " exceeds tolerance " +
              std::to_string(opt.divergence_tol));
  VectorSpectrum a{{Spectrum(s.c[0].size()), Spectrum(s.c[0].size()), Spectrum(s.c[0].size())}};
  const complex i(0.0, 1.0);
  for (std::size_t q = 0; q < s.c[0].size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    const double k2 = norm2(k);
    if (k2 == 0.0) continue;
    a.c[0][q] = i * (k.y * s.c[2][q] - k.z * s.c[1][q]) / k2;
    a.c[1][q] = i * (k.z * s.c[0][q] - k.x * s.c[2][q]) / k2;
    a.c[2][q] = i * (k.x * s.c[1][q] - k.y * s.c[0][q]) / k2;
  }
  return inverse(fft, a);
}

/// Leray projection onto divergence-free, zero-mean fields. Modes whose
/// effective wavevector vanishes (mean and pure Nyquist) are dropped.
inline VectorField3 solenoidal_project(const VectorField3& v) {
  Fft3 fft(v.grid());
  auto s = forward(fft, v);
  for (std::size_t q = 0; q < s.c[0].size(); ++q) {
    const Vec3 k = fft.wavevector(q);
    const double k2 = norm2(k);
    if (k2 == 0.0) {
      for (int a = 0; a < 3; ++a) s.c[a][q] = 0.0;
      continue;
    }
    const complex kv = (k.x * s.c[0][q] + k.y * s.c[1][q] + k.z * s.c[2][q]) / k2;
    for (int a = 0; a < 3; ++a) s.c[a][q] -= k[a] * kv;
  }
  return inverse(fft, s);
}

/// Removes the k = 0 mode of every component.
inline VectorField3 remove_mean(const VectorField3& v) {
  VectorField3 out = v;
  out.drop_closure();
  for (int a = 0; a < 3; ++a) {
    double m = 0.0;
    for (double x : v.component(a)) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : out.component(a)) x -= m;
  }
  return out;
}

/// Periodic Poisson solve lap(u) = f (zero-mean solution; mean of f ignored).
inline ScalarField3 poisson_solve(const ScalarField3& f) {
  Fft3 fft(f.grid());
  auto s = fft.forward(f.samples());
  for (std::size_t q = 0; q < s.size(); ++q) {
    const double k2 = norm2(fft.wavevector(q));
    s[q] = k2 == 0.0 ? complex{} : -s[q] / k2;
  }
  return ScalarField3(f.grid(), fft.inverse(s));
}

/// Applies the two-thirds dealiasing mask to a spectrum in place.
inline void dealias_two_thirds(const Fft3& fft, VectorSpectrum& s) {
  const auto& g = fft.grid();
  for (std::size_t q = 0; q < s.c[0].size(); ++q) {
    const auto m = fft.modes(q);
    bool keep = true;
    for (int a = 0; a < 3; ++a) keep = keep && 3 * std::abs(m[a]) < g.n[a];
    if (!keep)
      for (int a = 0; a < 3; ++a) s.c[a][q] = 0.0;
  }
}

/// Pointwise a x b with both factors band-limited to the 2/3 range first.
inline VectorField3 dealiased_cross(const VectorField3& a, const VectorField3& b) {
  Fft3 fft(a.grid());
  auto sa = forward(fft, a);
  auto sb = forward(fft, b);
  dealias_two_thirds(fft, sa);
  dealias_two_thirds(fft, sb);
  const VectorField3 fa = inverse(fft, sa), fb = inverse(fft, sb);
  VectorField3 out(a.grid());
  for (std::size_t q = 0; q < out.size(); ++q) out.set(q, cross(fa.get(q), fb.get(q)));
  auto so = forward(fft, out);
  dealias_two_thirds(fft, so);
  return inverse(fft, so);
}

}  // namespace hopfkit
