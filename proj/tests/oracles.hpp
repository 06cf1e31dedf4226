#pragma once

// Independent reference computations used by the tests. None of these call
// into the library routine they are checking.

#include "hopfkit/core.hpp"
#include "hopfkit/grid.hpp"

#include <random>
#include <vector>

namespace oracle {

using hopfkit::Vec3;

/// Lorentz boost of (E, B) into the frame moving with velocity v (c = 1).
inline std::pair<Vec3, Vec3> boost(const Vec3& E, const Vec3& B, const Vec3& v) {
  using hopfkit::cross;
  using hopfkit::dot;
  const double v2 = dot(v, v);
  const double g = 1.0 / std::sqrt(1.0 - v2);
  const double k = g * g / (g + 1.0);
  const Vec3 Ep = g * (E + cross(v, B)) - k * dot(v, E) * v;
  const Vec3 Bp = g * (B - cross(v, E)) - k * dot(v, B) * v;
  return {Ep, Bp};
}

/// Gauss double integral (1/4pi) oint oint (r1 - r2).(dr1 x dr2)/|r1 - r2|^3
/// for closed curves given as functions of a parameter in [0, 2pi).
template <class C1, class C2, class D1, class D2>
double gauss_linking(C1 r1, D1 dr1, C2 r2, D2 dr2, int n = 800) {
  const double h = hopfkit::two_pi / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double t = i * h, u = j * h;
      const Vec3 d = r1(t) - r2(u);
      const double r = hopfkit::norm(d);
      s += hopfkit::dot(d, hopfkit::cross(dr1(t), dr2(u))) / (r * r * r);
    }
  return s * h * h / (4.0 * hopfkit::pi);
}

/// Smooth zero-mean divergence-free field on the box: a random sum of
/// modes A_k cos(k.x + p) with A_k orthogonal to k, |k_i| <= kmax.
inline hopfkit::VectorField3 random_solenoidal(const hopfkit::GridSpec3& g, std::uint64_t seed, int kmax = 2,
                                               int modes = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ph(0.0, hopfkit::two_pi);
  struct M {
    Vec3 K, A;
    double p;
  };
  std::vector<M> ms;
  while (static_cast<int>(ms.size()) < modes) {
    const std::array<int, 3> k{kd(rng), kd(rng), kd(rng)};
    if (k == std::array<int, 3>{0, 0, 0}) continue;
    const Vec3 K{hopfkit::two_pi * k[0] / g.length[0], hopfkit::two_pi * k[1] / g.length[1],
                 hopfkit::two_pi * k[2] / g.length[2]};
    Vec3 a{nd(rng), nd(rng), nd(rng)};
    a = a - (hopfkit::dot(a, K) / hopfkit::dot(K, K)) * K;
    ms.push_back({K, a, ph(rng)});
  }
  return hopfkit::VectorField3::sample(g, [ms](const Vec3& x) {
    Vec3 v;
    for (const auto& m : ms) v += std::cos(hopfkit::dot(m.K, x) + m.p) * m.A;
    return v;
  });
}

}  // namespace oracle
