#pragma once

// Antisymmetric rank-2 tensors at a 4D chart point and their Hodge duals.
//
// Storage order is (F01, F02, F03, F23, F13, F12). Field extraction:
//   B = (-F23, F13, -F12)              both signatures
//   E = (F01, F02, F03)                Minkowski
//   E = -(F01, F02, F03)               Euclidean tube, E = -dA/dt
// The Hodge star is (*F)_ij = 1/2 eps_ijlm F^lm with eps_0123 = +1 and
// indices on F raised by diag(1,-1,-1,-1) (Minkowski) or the identity.
// In field language this gives *(E, B) = (-B, E) for Minkowski and
// *(E, B) = (B, E) for Euclidean.

#include "hopfkit/core.hpp"

#include <utility>

namespace hopfkit {

enum class Signature { minkowski, euclidean };

template <class T>
struct FourForm2 {
  std::array<T, 6> c{};
  Signature signature = Signature::euclidean;

  T& f01() { return c[0]; }
  T& f02() { return c[1]; }
  T& f03() { return c[2]; }
  T& f23() { return c[3]; }
  T& f13() { return c[4]; }
  T& f12() { return c[5]; }
  const T& f01() const { return c[0]; }
  const T& f02() const { return c[1]; }
  const T& f03() const { return c[2]; }
  const T& f23() const { return c[3]; }
  const T& f13() const { return c[4]; }
  const T& f12() const { return c[5]; }

  /// Full antisymmetric component F_ij, i, j in 0..3.
  T operator()(int i, int j) const {
    if (i == j) return T{};
    if (i > j) return -(*this)(j, i);
    if (i == 0) return c[j - 1];
    if (i == 2 && j == 3) return c[3];
    if (i == 1 && j == 3) return c[4];
    return c[5];  // (1,2)
  }

  FourForm2& operator+=(const FourForm2& o) {
    for (int a = 0; a < 6; ++a) c[a] += o.c[a];
    return *this;
  }
  FourForm2& operator-=(const FourForm2& o) {
    for (int a = 0; a < 6; ++a) c[a] -= o.c[a];
    return *this;
  }
  FourForm2& operator*=(T s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend FourForm2 operator+(FourForm2 a, const FourForm2& b) { return a += b; }
  friend FourForm2 operator-(FourForm2 a, const FourForm2& b) { return a -= b; }
  friend FourForm2 operator*(T s, FourForm2 a) { return a *= s; }
  friend FourForm2 operator-(FourForm2 a) { return a *= T(-1); }
  friend bool operator==(const FourForm2&, const FourForm2&) = default;
};

using RealForm = FourForm2<double>;
using ComplexForm = FourForm2<complex>;

/// Builds F from field vectors under the signature's extraction rule.
inline RealForm from_fields(const Vec3& E, const Vec3& B, Signature sig) {
  const double es = sig == Signature::minkowski ? 1.0 : -1.0;
  RealForm F;
  F.signature = sig;
  F.c = {es * E.x, es * E.y, es * E.z, -B.x, B.y, -B.z};
  return F;
}

inline Vec3 electric(const RealForm& F) {
  const double es = F.signature == Signature::minkowski ? 1.0 : -1.0;
  return {es * F.f01(), es * F.f02(), es * F.f03()};
}

inline Vec3 magnetic(const RealForm& F) { return {-F.f23(), F.f13(), -F.f12()}; }

namespace detail {
/// Levi-Civita symbol on four indices.
inline int levi_civita(int a, int b, int c, int d) {
  const int p[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) return 0;
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}
inline double metric_diag(Signature sig, int i) {
  return (sig == Signature::minkowski && i > 0) ? -1.0 : 1.0;
}
}  // namespace detail

template <class T>
FourForm2<T> hodge_star(const FourForm2<T>& F) {
  constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {1, 3}, {1, 2}};
  FourForm2<T> out;
  out.signature = F.signature;
  for (int a = 0; a < 6; ++a) {
    const int i = pairs[a][0], j = pairs[a][1];
    T s{};
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m) {
        const int eps = detail::levi_civita(i, j, l, m);
        if (eps == 0) continue;
        const double raise = detail::metric_diag(F.signature, l) * detail::metric_diag(F.signature, m);
        s += T(0.5 * eps * raise) * F(l, m);
      }
    out.c[a] = s;
  }
  return out;
}

/// Self-dual / anti-self-dual pair F+ = (F + *F)/2, F- = (F - *F)/2.
/// Euclidean only: *F+ = F+, *F- = -F-.
inline std::pair<RealForm, RealForm> sd_asd_split(const RealForm& F) {
  require(F.signature == Signature::euclidean, ErrorKind::invalid_argument,
          "real self-dual split needs Euclidean signature; use sd_asd_split_complex");
  const RealForm star = hodge_star(F);
  return {0.5 * (F + star), 0.5 * (F - star)};
}

/// Minkowski split into the +-i eigenspaces of *:
/// F+ = (F - i*F)/2 with *F+ = iF+, F- = (F + i*F)/2 with *F- = -iF-.
struct ComplexSplit {
  ComplexForm plus, minus;
  bool complexified = true;
};

inline ComplexSplit sd_asd_split_complex(const RealForm& F) {
  ComplexForm Fc;
  Fc.signature = F.signature;
  for (int a = 0; a < 6; ++a) Fc.c[a] = F.c[a];
  if (F.signature == Signature::euclidean) {
    const auto [p, m] = sd_asd_split(F);
    ComplexSplit out{Fc, Fc, false};
    for (int a = 0; a < 6; ++a) {
      out.plus.c[a] = p.c[a];
      out.minus.c[a] = m.c[a];
    }
    return out;
  }
  const ComplexForm star = hodge_star(Fc);
  const complex i(0.0, 1.0);
  return {complex(0.5) * (Fc - i * star), complex(0.5) * (Fc + i * star), true};
}

inline bool is_anti_self_dual_b5(const RealForm& F, double tol = 0.0) {
  return std::abs(F.f01() + F.f23()) <= tol && std::abs(F.f02() - F.f13()) <= tol &&
         std::abs(F.f03() + F.f12()) <= tol;
}

/// The dt-block 1-form phi of F and its 3D dual *3 phi (a 2-form on Y,
/// returned both as its vector proxy and as the (F23, F13, F12) block).
struct Hodge3Projection {
  Vec3 phi;
  Vec3 star3_phi;
  std::array<double, 3> star3_block;  // (23, 13, 12) components
};

inline Hodge3Projection hodge3_project(const RealForm& F) {
  // phi ^ dt = -phi_i dt ^ dy^i, so F0i = -phi_i; this is E in the tube
  // convention for either signature.
  const Vec3 phi{-F.f01(), -F.f02(), -F.f03()};
  return {phi, phi, {phi.x, -phi.y, phi.z}};
}

/// Phi = phi ^ dt + *3 phi as a Euclidean 4D 2-form.
inline RealForm assemble_phi(const Vec3& phi) {
  RealForm F;
  F.signature = Signature::euclidean;
  F.c = {-phi.x, -phi.y, -phi.z, phi.x, -phi.y, phi.z};
  return F;
}

}  // namespace hopfkit
