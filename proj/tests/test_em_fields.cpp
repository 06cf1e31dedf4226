#include "hopfkit/functionals.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace hopfkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double half = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

EMField constant_field(const GridSpec3& g, const Vec3& E, const Vec3& B) {
  EMField f;
  f.E = VectorField3::sample(g, [E](const Vec3&) { return E; });
  f.B = VectorField3::sample(g, [B](const Vec3&) { return B; });
  return f;
}

}  // namespace

TEST_CASE("lift onto the unit three-sphere") {
  for (const auto& p : random_points(200, 1)) {
    const auto s = s3_lift(p, 0.7);
    CHECK_THAT(s.u[0] * s.u[0] + s.u[1] * s.u[1] + s.u[2] * s.u[2] + s.u[3] * s.u[3], WithinAbs(1.0, 1e-14));
    for (int i = 0; i < 4; ++i) {
      const Vec3 fd = richardson_gradient([i](const Vec3& y) { return s3_lift(y, 0.7).u[i]; }, p);
      CHECK(norm(fd - s.grad[i]) < 1e-8 * (1.0 + norm(s.grad[i])));
    }
  }
}

TEST_CASE("hopfion is null at the origin and at random points") {
  const Vec3 E = hopfion_electric({0, 0, 0}, 1.0), B = hopfion_magnetic({0, 0, 0}, 1.0);
  CHECK_THAT(norm(E), WithinRel(norm(B), 1e-15));
  CHECK(std::abs(dot(E, B)) < 1e-15 * norm2(B));

  const EMField f = hopfion_closures(1.3, 2.0);
  for (const auto& p : random_points(1000, 2)) {
    const auto rs = rs_vector(f, p);
    CHECK(std::abs(rs.square) / (norm2(f.E.eval(p)) + norm2(f.B.eval(p))) < 1e-10);
  }
  const auto r = null_residuals(f, halton_points(10000, {-4, -4, -4}, {4, 4, 4}));
  CHECK(r.dot < 1e-10);
  CHECK(r.norm < 1e-10);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("hopfion construction rejects bad parameters") {
  const auto g = GridSpec3::centred(8, 4.0);
  CHECK_THROWS_AS(build_hopfion(g, 0.0), Error);
  CHECK_THROWS_AS(build_hopfion(g, -1.0), Error);
  CHECK_THROWS_AS(build_hopfion(g, 1.0, 0.0), Error);
}

TEST_CASE("hopfion magnetic field is the pullback of the area form") {
  // (1/pi) grad Re z x grad Im z / (1+|z|^2)^2 computed independently by
  // finite differences of the Hopf map
  for (const auto& p : random_points(50, 3, 1.5)) {
    const Vec3 fd = pullback_field([](const Vec3& y) { return hopf_map(y); }, p);
    const Vec3 B = hopfion_magnetic(p, 1.0);
    CHECK(norm(fd - B) < 1e-7 * norm(B));
    const Vec3 fdE = pullback_field([](const Vec3& y) { return dual_hopf_map(y); }, p);
    CHECK(norm(fdE - hopfion_electric(p, 1.0)) < 1e-7 * norm(B));
  }
}

TEST_CASE("RS vector") {
  const auto a = rs_vector({1, 0, 0}, {0, 1, 0});
  CHECK(a.z[0] == complex(1, 0));
  CHECK(a.z[1] == complex(0, 1));
  CHECK(a.square == complex(0, 0));
  const auto b = rs_vector({1, 0, 0}, {1, 0, 0});
  CHECK(b.square == complex(0, 2));
}

TEST_CASE("null residuals: violation and degenerate input") {
  const auto g = GridSpec3::cube(8, 1.0);
  const auto r = null_residuals(constant_field(g, {0, 0, 1}, {0, 0, 1}));
  CHECK_THAT(r.dot, WithinAbs(1.0, 1e-15));
  CHECK_THAT(r.norm, WithinAbs(0.0, 1e-15));
  CHECK(null_residuals(constant_field(g, {}, {})).degenerate);
}

TEST_CASE("duality rotation") {
  const auto g = GridSpec3::centred(16, 6.0);
  const EMField f = build_hopfion(g, 1.0);
  const EMField r1 = duality_rotate(f);
  const EMField r2 = duality_rotate(r1);
  const EMField r4 = duality_rotate(duality_rotate(r2));
  for (std::size_t q = 0; q < g.size(); ++q) {
    CHECK(r2.E.get(q) == -1.0 * f.E.get(q));
    CHECK(r2.B.get(q) == -1.0 * f.B.get(q));
    CHECK(r4.E.get(q) == f.E.get(q));
    CHECK(r4.B.get(q) == f.B.get(q));
    CHECK(norm2(r1.E.get(q)) + norm2(r1.B.get(q)) == norm2(f.E.get(q)) + norm2(f.B.get(q)));
  }
  const auto d0 = maxwell_divergence_residuals(f), d1 = maxwell_divergence_residuals(r1);
  CHECK(d1.div_b == d0.div_e);
  CHECK(d1.div_e == d0.div_b);
  const auto n0 = null_residuals(f), n1 = null_residuals(r1);
  CHECK_THAT(n1.dot, WithinAbs(n0.dot, 1e-15));
  CHECK_THAT(n1.norm, WithinAbs(n0.norm, 1e-15));
  CHECK(energy_em(r1) == energy_em(f));
}

TEST_CASE("dyon pair cross relations") {
  const auto g = GridSpec3::centred(8, 4.4);
  const DyonPair d = hopf_dyon_pair(g);
  CHECK_FALSE(d.self_paired());
  for (const auto& p : random_points(200, 4, 2.0)) {
    const Vec3 Bt = d.B_theta(p), Bp = d.B_phi(p), Et = d.E_theta(p), Ep = d.E_phi(p);
    const double s = norm2(Bt) + norm2(Bp);
    CHECK(std::abs(dot(Bt, Et) + dot(Bp, Ep)) < 1e-10 * s);
    CHECK(std::abs(norm2(Bt) - norm2(Ep)) < 1e-10 * s);
    CHECK(std::abs(norm2(Bp) - norm2(Et)) < 1e-10 * s);
    // the Hopf pair reproduces the hopfion
    CHECK(norm(Bp - hopfion_magnetic(p, 1.0)) < 1e-7 * norm(Bp));
    CHECK(norm(Bt - hopfion_electric(p, 1.0)) < 1e-7 * norm(Bp));
    // swapping negates the mixed products
    const DyonPair sw = d.swapped();
    CHECK_THAT(dot(sw.B_theta(p), sw.E_theta(p)), WithinAbs(-dot(Bt, Et), 1e-10 * s));
  }
  const EMField f = d.as_field(g);
  const auto r = null_residuals(f);
  CHECK(r.dot < 1e-8);
  CHECK(r.norm < 1e-8);
}

TEST_CASE("self-paired dyon is degenerate") {
  // no node on the unit circle in z = 0, where the Hopf map is singular
  const auto g = GridSpec3::centred(8, 4.4);
  auto z = [](const Vec3& p) { return hopf_map(p); };
  const DyonPair d = build_dyon_pair(z, z, g);
  CHECK(d.self_paired());
  for (const auto& p : random_points(20, 5, 2.0)) CHECK(dot(d.B_theta(p), d.E_theta(p)) == 0.0);
  auto bad = [](const Vec3& p) { return p.x == 0.0 ? complex(INFINITY, 0.0) : complex(p.x, p.y); };
  CHECK_THROWS_AS(build_dyon_pair(bad, z, g), Error);
}

TEST_CASE("monopole patches") {
  const Vec3 eq{0.3, 0.8, 0.0};
  CHECK_THAT(monopole_potential(Hemisphere::north, eq).phi_component, WithinAbs(1.0 / (4 * pi), 1e-16));
  CHECK_THAT(monopole_potential(Hemisphere::south, eq).phi_component, WithinAbs(-1.0 / (4 * pi), 1e-16));
  for (const auto& p : random_points(100, 6)) {
    const auto n = monopole_potential(Hemisphere::north, p), s = monopole_potential(Hemisphere::south, p);
    CHECK_THAT(n.phi_component - s.phi_component, WithinAbs(1.0 / two_pi, 1e-15));
    // Cartesian and spherical forms agree: A . (phi-hat) rho = A_phi
    const double rho = std::hypot(p.x, p.y);
    const Vec3 phat{-p.y / rho, p.x / rho, 0};
    CHECK_THAT(dot(n.cartesian, phat) * rho, WithinAbs(n.phi_component, 1e-14));
    // the difference is (1/2pi) grad phi
    CHECK(norm(n.cartesian - s.cartesian - phat / (two_pi * rho)) < 1e-13 / rho);
  }
  try {
    monopole_potential(Hemisphere::south, {0, 0, 1});
    FAIL("expected singular axis");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_axis);
  }
  CHECK_THROWS_AS(monopole_potential(Hemisphere::north, {0, 0, -2}), Error);
  CHECK_NOTHROW(monopole_potential(Hemisphere::north, {0, 0, 1}));
}

TEST_CASE("monopole curvature by finite differences") {
  // curl A+ = p / (4 pi r^3) away from the south axis, error O(h^2)
  std::vector<double> hs, errs;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    double e = 0.0;
    for (const auto& p : random_points(30, 7, 1.0)) {
      if (p.z < -0.2) continue;
      const auto A = [](const Vec3& y) { return monopole_potential(Hemisphere::north, y).cartesian; };
      Vec3 curl;
      for (int a = 0; a < 3; ++a) {
        Vec3 pp = p, pm = p;
        pp[a] += h;
        pm[a] -= h;
        const Vec3 d = (A(pp) - A(pm)) / (2 * h);
        // d_a A_b contributes eps_cab
        curl[(a + 2) % 3] += d[(a + 1) % 3];
        curl[(a + 1) % 3] -= d[(a + 2) % 3];
      }
      const double r = norm(p);
      e = std::max(e, norm(curl - p / (4 * pi * r * r * r)) * r * r);
    }
    hs.push_back(h);
    errs.push_back(e);
  }
  CHECK_THAT(convergence_order(hs, errs), WithinAbs(2.0, 0.2));
}

TEST_CASE("monopole flux") {
  const auto m = monopole_flux(32);
  CHECK_THAT(m.stokes, WithinAbs(1.0, 1e-8));
  CHECK_THAT(m.direct, WithinAbs(1.0, 1e-8));
  const auto m2 = monopole_flux(32, 2.0);
  CHECK_THAT(m2.stokes, WithinAbs(2.0, 1e-8));
  CHECK_THAT(m2.direct, WithinAbs(2.0, 1e-8));
  CHECK_THROWS_AS(monopole_flux(8), Error);
}

TEST_CASE("instanton profiles") {
  CHECK(instanton_profile(0.0, InstantonChart::r4) == 1.0);
  CHECK(instanton_profile(0.0, InstantonChart::tube) == 4.0);
  CHECK(instanton_profile(40.0, InstantonChart::tube) < 1e-30);
  CHECK_THAT(instanton_profile(1.0, InstantonChart::r4), WithinRel(0.25, 1e-15));
}

TEST_CASE("divergence residuals converge at second order for the hopfion") {
  std::vector<double> hs, rb, re;
  for (int n : {32, 64, 128}) {
    const auto g = GridSpec3::centred(n, 8.0);
    const auto d = maxwell_divergence_residuals(build_hopfion(g, 1.0));
    hs.push_back(g.spacing(0));
    rb.push_back(d.div_b);
    re.push_back(d.div_e);
  }
  CHECK_THAT(convergence_order(hs, rb), WithinAbs(2.0, 0.3));
  CHECK_THAT(convergence_order(hs, re), WithinAbs(2.0, 0.3));
}

TEST_CASE("divergence residual catches a gradient field") {
  const auto g = GridSpec3::cube(16, two_pi);
  EMField f;
  f.B = VectorField3::sample(g, [](const Vec3& x) { return Vec3{std::cos(x.x), 0, 0}; });
  f.E = VectorField3(g);
  CHECK(maxwell_divergence_residuals(f).div_b > 0.9);
  CHECK(maxwell_divergence_residuals(f).div_e == 0.0);
}

TEST_CASE("frame velocity") {
  const auto v = frame_velocity({1, 0, 0}, {0, 1, 0});
  CHECK(v.null_field);
  CHECK_FALSE(v.parallel_frame_attainable);
  CHECK_THAT(norm(v.minus), WithinAbs(1.0, 1e-12));
  CHECK(v.minus.z > 0.0);  // along E x B

  const auto par = frame_velocity({1, 2, 3}, {2, 4, 6});
  CHECK(par.parallel);
  CHECK(par.minus == Vec3{});
  CHECK_THROWS_AS(frame_velocity({}, {}), Error);

  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    const Vec3 E{nd(rng), nd(rng), nd(rng)}, B{nd(rng), nd(rng), nd(rng)};
    const auto fv = frame_velocity(E, B);
    REQUIRE_FALSE(fv.null_field);
    CHECK(norm(fv.minus) < 1.0);
    CHECK(norm(fv.plus) > 1.0);
    CHECK_THAT(norm(fv.minus) * norm(fv.plus), WithinRel(1.0, 1e-12));
    const auto [Ep, Bp] = oracle::boost(E, B, fv.minus);
    CHECK(norm(cross(Ep, Bp)) / (norm(Ep) * norm(Bp)) < 1e-8);
  }
}

TEST_CASE("anti-self-dual time series check") {
  const auto g = GridSpec3::cube(16, two_pi);
  // k = (1,0,0), positive helicity: curl a = a
  auto mode = [](const Vec3& x) { return Vec3{0, std::sin(x.x), std::cos(x.x)}; };
  const double dt = 1e-3;
  std::vector<VectorField3> series;
  for (int s = 0; s < 5; ++s) {
    const double e = std::exp(s * dt);
    series.push_back(VectorField3::sample(g, [&](const Vec3& x) { return e * mode(x); }));
  }
  CHECK(asd_check_31(series, dt) < 1e-6);

  std::vector<VectorField3> frozen(3, VectorField3::sample(g, mode));
  CHECK_THAT(asd_check_31(frozen, dt), WithinRel(1.0, 1e-12));
  std::vector<VectorField3> zero(3, VectorField3(g));
  CHECK(asd_check_31(zero, dt) == 0.0);
  CHECK_THROWS_AS(asd_check_31(std::span(zero).first(2), dt), Error);
}

TEST_CASE("mirror hopfion") {
  const auto g = GridSpec3::centred(16, 6.0);
  const EMField f = build_hopfion(g, 1.0);
  const EMField m = mirror(f);
  for (const auto& p : random_points(20, 8, 2.0)) {
    const Vec3 b = f.B.eval({-p.x, p.y, p.z});
    CHECK(m.B.eval(p) == Vec3{-b.x, b.y, b.z});
  }
  CHECK(m.kind == "hopfion-mirror");
}

TEST_CASE("structured-grid round trip") {
  const auto g = GridSpec3::centred(8, 5.0);
  const EMField f = build_hopfion(g, 1.0);
  std::stringstream ss;
  write_field_grid(ss, f, {"hopfkit test kind=hopfion"});
  const auto text = ss.str();
  CHECK(text.rfind("# hopfkit test kind=hopfion\ngrid 8 8 8 5 5 5 -2.5 -2.5 -2.5\n", 0) == 0);
  const auto back = read_field_grid(ss);
  REQUIRE(back.field.grid() == g);
  CHECK(back.provenance == std::vector<std::string>{"hopfkit test kind=hopfion"});
  for (std::size_t q = 0; q < g.size(); ++q) {
    CHECK(back.field.B.get(q) == f.B.get(q));
    CHECK(back.field.E.get(q) == f.E.get(q));
  }

  std::istringstream trunc(text.substr(0, text.size() / 2));
  try {
    read_field_grid(trunc);
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_field_grid(empty), Error);
}
