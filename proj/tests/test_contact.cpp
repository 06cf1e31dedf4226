#include "hopfkit/contact.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace hopfkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// dz + x dy on R^3
ClebschData standard_r3() {
  return single_pair_clebsch([](const Vec3& p) { return p.z; }, [](const Vec3& p) { return p.x; },
                             [](const Vec3& p) { return p.y; });
}

Vec4 random_s3(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec4 p{nd(rng), nd(rng), nd(rng), nd(rng)};
  const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
  for (auto& x : p) x /= r;
  return p;
}

}  // namespace

TEST_CASE("standard contact form on R^3") {
  const auto d = standard_r3();
  for (const auto& p : halton_points(50, {-3, -3, -3}, {3, 3, 3})) {
    const auto s = contact_form(d, p);
    CHECK(norm(s.omega - Vec3{0, p.x, 1}) < 1e-10);
    CHECK(norm(s.domega - Vec3{0, 0, 1}) < 1e-10);
    CHECK_THAT(s.density, WithinAbs(1.0, 1e-10));
  }
  const auto pts = halton_points(1000, {-2, -2, -2}, {2, 2, 2});
  const auto r = nonintegrability_check(d, pts);
  CHECK(r.contact);
  CHECK_THAT(r.min_density, WithinAbs(1.0, 1e-10));
  CHECK(r.violating == 0);
  CHECK(r.sample_count == 1000);
  CHECK_THROWS_AS(nonintegrability_check(d, std::span(pts).first(999)), Error);
}

TEST_CASE("integrable forms have zero density") {
  // beta a function of alpha: d alpha ^ d beta = 0
  const auto dep = single_pair_clebsch([](const Vec3& p) { return std::sin(p.y); },
                                       [](const Vec3& p) { return p.x + p.z * p.z; },
                                       [](const Vec3& p) { return std::exp(0.3 * (p.x + p.z * p.z)); });
  const auto pts = halton_points(1000, {-1, -1, -1}, {1, 1, 1});
  const auto a = nonintegrability_check(dep, pts);
  CHECK_FALSE(a.contact);
  CHECK(a.min_density < 1e-10);
  CHECK(a.violating > 0);

  // exact form df
  ClebschData exact;
  exact.phi = [](const Vec3& p) { return p.x * p.y + std::cos(p.z); };
  exact.alpha1 = [](const Vec3&) { return 0.0; };
  exact.beta1 = [](const Vec3& p) { return p.z; };
  exact.pairs = 1;
  const auto e = nonintegrability_check(exact, pts);
  CHECK(e.min_density == 0.0);
  CHECK(e.violating == 1000);
}

TEST_CASE("contact form errors") {
  auto d = standard_r3();
  d.alpha1 = [](const Vec3& p) { return p.x > 0 ? std::nan("") : 0.0; };
  CHECK_THROWS_AS(contact_form(d, {1, 0, 0}), Error);
  CHECK_NOTHROW(contact_form(d, {-1, 0, 0}));
  auto three = standard_r3();
  three.pairs = 3;
  CHECK_THROWS_AS(contact_form(three, {0, 0, 0}), Error);
  auto two = standard_r3();
  two.pairs = 2;
  CHECK_THROWS_AS(contact_form(two, {0, 0, 0}), Error);
}

TEST_CASE("Hopfion Clebsch data is a contact form") {
  const auto d = hopfion_clebsch(1.0);
  // dw reproduces the Hopfion magnetic field
  for (const auto& p : halton_points(200, {-2, -2, -2}, {2, 2, 2})) {
    const auto s = contact_form(d, p);
    CHECK(norm(s.domega - hopfion_magnetic(p, 1.0, 1.0)) < 1e-8 * std::max(1.0, norm(s.domega)));
  }
  const auto coarse = nonintegrability_check(d, halton_points(1000, {-2, -2, -2}, {2, 2, 2}));
  const auto fine = nonintegrability_check(d, halton_points(8000, {-2, -2, -2}, {2, 2, 2}));
  CHECK(coarse.contact);
  CHECK(fine.contact == coarse.contact);
  CHECK(fine.min_density <= coarse.min_density);
}

TEST_CASE("helicity as the integral of w ^ dw") {
  const auto g = GridSpec3::cube(32, two_pi);
  // single pair: zero
  const auto one = single_pair_clebsch([](const Vec3& p) { return std::sin(p.y + p.z); },
                                       [](const Vec3& p) { return std::cos(p.x) + 0.5 * std::sin(p.z); },
                                       [](const Vec3& p) { return std::sin(p.y); });
  const auto [w1, dw1] = sample_contact(one, g);
  CHECK(std::abs(helicity_contact(one, g)) < 1e-10 * l2_norm(w1) * l2_norm(dw1));

  // two pairs for w = (cos z, -sin z, 0), which has dw = w: helicity (2 pi)^3,
  // matching the curl-inverse route on the sampled field
  ClebschData two;
  two.phi = [](const Vec3&) { return 0.0; };
  two.alpha1 = [](const Vec3& p) { return std::cos(p.z); };
  two.beta1 = [](const Vec3& p) { return p.x; };
  two.alpha2 = [](const Vec3& p) { return -std::sin(p.z); };
  two.beta2 = [](const Vec3& p) { return p.y; };
  const double hc = helicity_contact(two, g);
  const auto [w, dw] = sample_contact(two, g);
  const double hab = helicity_AB(curl_inverse(solenoidal_project(dw)), dw);
  CHECK_THAT(hc, WithinRel(std::pow(two_pi, 3), 1e-9));
  CHECK_THAT(hc, WithinRel(hab, 1e-6));
}

TEST_CASE("Hopfion contact helicity is a squared") {
  const double a = 1.5;
  const auto g = GridSpec3::centred(64, 16.0);
  const double hc = helicity_contact(hopfion_clebsch(1.0, a), g);
  CHECK(std::abs(hc / (a * a) - 1.0) < 0.01);
}

TEST_CASE("standard contact form on S^3") {
  const Vec4 w = standard_contact_s3({1, 0, 0, 0});
  CHECK(w == Vec4{0, 1, 0, 0});
  std::mt19937_64 rng(4);
  for (int t = 0; t < 500; ++t) {
    const Vec4 p = random_s3(rng);
    const Vec4 f = standard_contact_s3(p);
    CHECK(std::abs(detail::apply1(f, p)) < 1e-15);  // annihilates the radial direction
    // Reeb field i p: w(R) = 1 and i_R dw = 0; dw is nondegenerate on ker w = span(j p, k p)
    const Vec4 reeb{-p[1], p[0], -p[3], p[2]};
    const Vec4 jp{-p[2], p[3], p[0], -p[1]};
    const Vec4 kp{-p[3], -p[2], p[1], p[0]};
    const auto D = standard_contact_s3_d();
    CHECK_THAT(detail::apply1(f, reeb), WithinAbs(1.0, 1e-15));
    CHECK(std::abs(detail::apply2(D, reeb, jp)) < 1e-15);
    CHECK(std::abs(detail::apply1(f, jp)) < 1e-15);
    CHECK(std::abs(detail::apply2(D, jp, kp)) > 1.0);
    CHECK(std::abs(standard_contact_volume(p)) > 1.0);
  }
  try {
    standard_contact_s3({0.9, 0, 0, 0});
    FAIL("expected off-sphere error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  const auto h = helicity_contact_s3(32);
  CHECK(h.raw > 0.0);
  CHECK_THAT(h.normalized, WithinAbs(1.0, 1e-12));
  CHECK_THAT(helicity_contact_s3(8).normalized, WithinAbs(1.0, 1e-10));
  CHECK_THROWS_AS(helicity_contact_s3(3), Error);
}

TEST_CASE("Fubini-Study normalization") {
  CHECK_THAT(fubini_study_total(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(cylinder_chart_total(), WithinAbs(1.0, 1e-15));
  const auto c = solve_normalization_constants();
  CHECK(c.C == Rational(2));
  CHECK(c.g == Rational(1));
  CHECK_THAT(c.C_numeric, WithinAbs(2.0, 1e-10));
  CHECK_THAT(c.radial_integral, WithinAbs(0.5, 1e-12));

  CHECK_THAT(fubini_study_form(0.0), WithinRel(1.0 / pi, 1e-15));
  for (double r : {0.1, 1.0, 3.0}) CHECK(fubini_study_form(complex(r, 0)) < fubini_study_form(0.0));
  // rotational symmetry and |z|^-4 decay
  CHECK_THAT(fubini_study_form(complex(0.6, 0.8)), WithinRel(fubini_study_form(1.0), 1e-15));
  const double z = 1e4;
  CHECK_THAT(fubini_study_form(z) * z * z * z * z, WithinRel(1.0 / pi, 1e-7));
  CHECK_THROWS_AS(fubini_study_form(complex(std::numeric_limits<double>::infinity(), 0)), Error);

  CHECK(Rational(6, -4).str() == "-3/2");
  CHECK_THROWS_AS(Rational(1, 0), Error);
}

TEST_CASE("pullback of the Fubini-Study form is dw / 2 pi") {
  CHECK(pullback_consistency_check(32) < 1e-8);
  // doubling w doubles dw, so the relative mismatch becomes 1/2
  CHECK_THAT(pullback_consistency_check(32, 2.0), WithinAbs(0.5, 1e-8));
  CHECK_THROWS_AS(pullback_consistency_check(16), Error);
}

TEST_CASE("contactomorphisms") {
  const auto pts = halton_points(100, {-1, -1, -1}, {1, 1, 1});
  const auto d = standard_r3();
  const VectorFn id = [](const Vec3& p) { return p; };
  const ScalarFn one = [](const Vec3&) { return 1.0; };
  CHECK(contactomorphism_check(id, one, d, pts) < 1e-12);

  // dS + p dq in coordinates (q, S, p); (q, S, p) -> (q, 2S, 2p) pulls it back to twice itself
  const auto hj = single_pair_clebsch([](const Vec3& x) { return x.y; }, [](const Vec3& x) { return x.z; },
                                      [](const Vec3& x) { return x.x; });
  const VectorFn scale = [](const Vec3& x) { return Vec3{x.x, 2 * x.y, 2 * x.z}; };
  const ScalarFn two = [](const Vec3&) { return 2.0; };
  CHECK(contactomorphism_check(scale, two, hj, pts) < 1e-10);
  CHECK(contactomorphism_check(scale, one, hj, pts) > 0.5);

  // dz - y dx pulled back through (x, y, z + xy) is dz + x dy
  ClebschData target = single_pair_clebsch([](const Vec3& p) { return p.z; }, [](const Vec3& p) { return -p.y; },
                                           [](const Vec3& p) { return p.x; });
  const VectorFn shear = [](const Vec3& p) { return Vec3{p.x, p.y, p.z + p.x * p.y}; };
  CHECK(contactomorphism_check(shear, one, target, d, pts) < 1e-10);
  // the contact density keeps its sign under the map
  for (const auto& p : pts) CHECK(contact_form(target, shear(p)).density * contact_form(d, p).density > 0.0);

  const ScalarFn vanishing = [](const Vec3& p) { return p.x > 0.5 ? 0.0 : 1.0; };
  try {
    contactomorphism_check(id, vanishing, d, pts);
    FAIL("expected rho error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}
