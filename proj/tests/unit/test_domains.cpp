#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "udalab/domains.hpp"
#include "udalab/rng.hpp"

using namespace udalab;
using domains::MixtureDomain;
using domains::Vec2;

namespace {

MixtureDomain random_domain(rng::Xoshiro256pp& gen) {
  const Vec2 mu_pos(gen.uniform(-2, 2), gen.uniform(-2, 2));
  const Vec2 mu_neg(gen.uniform(-2, 2), gen.uniform(-2, 2));
  const double sigma = gen.uniform(0.5, 2.0);
  const double phi = gen.uniform(0, 2 * M_PI);
  return MixtureDomain::make(mu_pos, mu_neg, sigma, Vec2(std::cos(phi), std::sin(phi)));
}

Vec2 random_unit(rng::Xoshiro256pp& gen) {
  const double phi = gen.uniform(0, 2 * M_PI);
  return Vec2(std::cos(phi), std::sin(phi));
}

}  // namespace

TEST_CASE("MixtureDomain validation") {
  CHECK_THROWS_AS(MixtureDomain::make({0, 0}, {1, 1}, 0.0, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureDomain::make({0, 0}, {1, 1}, -1.0, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureDomain::make({0, 0}, {1, 1}, 1.0, {0.5, 0.5}), std::invalid_argument);
  CHECK_NOTHROW(MixtureDomain::make({0, 0}, {1, 1}, 1.0, {0, 1}));
}

TEST_CASE("project_domain maps means and keeps sigma") {
  const auto d = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1});

  const auto p_up = domains::project_domain(d, {0, 1});
  CHECK(p_up.mean_pos == doctest::Approx(1.0));
  CHECK(p_up.mean_neg == doctest::Approx(-1.0));
  CHECK(p_up.sigma == doctest::Approx(1.0));

  // Both components project identically: degenerate unimodal case.
  const auto p_right = domains::project_domain(d, {1, 0});
  CHECK(p_right.mean_pos == doctest::Approx(-1.0));
  CHECK(p_right.mean_neg == doctest::Approx(-1.0));

  CHECK_THROWS_AS(domains::project_domain(d, {0, 0}), std::invalid_argument);
}

TEST_CASE("induced density integrates to one") {
  rng::Xoshiro256pp gen(31);
  for (int i = 0; i < 10; ++i) {
    const auto d = random_domain(gen);
    const auto p = domains::project_domain(d, random_unit(gen));
    const double mass =
        oracles::trapezoid([&](double z) { return p.density(z); }, -30.0, 30.0, 10001);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("intersection_coord closed form and degenerate signal") {
  CHECK(domains::intersection_coord({1, 0}, {0, 1}, 3.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(domains::intersection_coord({0, 1}, {0, 1}, 1.0), std::domain_error);

  // Linear-solve oracle: solve {v.x = 0, u.x = z} and project on perp(u).
  const Vec2 u(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const Vec2 v(0, 1);
  CHECK(domains::intersection_coord(u, v, 1.0) ==
        doctest::Approx(oracles::intersection_linear_solve(u, v, 1.0)).epsilon(1e-12));

  rng::Xoshiro256pp gen(7);
  for (int i = 0; i < 50; ++i) {
    const Vec2 uu = random_unit(gen);
    const Vec2 vv = random_unit(gen);
    if (domains::degenerate_projection(uu, vv)) continue;
    const double z = gen.uniform(-3, 3);
    CHECK(domains::intersection_coord(uu, vv, z) ==
          doctest::Approx(oracles::intersection_linear_solve(uu, vv, z)).epsilon(1e-9));
  }
}

TEST_CASE("induced_label_fn degenerate and symmetric cases") {
  const auto d = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1});

  // Projection along the label normal: exact step, 0.5 at the boundary.
  CHECK(domains::induced_label_fn(d, {0, 1}, 0.7) == doctest::Approx(1.0));
  CHECK(domains::induced_label_fn(d, {0, 1}, -0.2) == doctest::Approx(0.0));
  CHECK(domains::induced_label_fn(d, {0, 1}, 0.0) == doctest::Approx(0.5));

  // Projection orthogonal to the label direction with symmetric components.
  for (double z : {-2.0, 0.0, 1.3}) {
    CHECK(domains::induced_label_fn(d, {1, 0}, z) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("induced_label_fn matches conditional sampling") {
  // Reduced version of the acceptance oracle: 5 random configs, 3 z points.
  rng::Xoshiro256pp gen(101);
  for (int cfg = 0; cfg < 5; ++cfg) {
    const auto d = random_domain(gen);
    const Vec2 u = random_unit(gen);
    const auto p = domains::project_domain(d, u);
    const double lo = std::min(p.mean_pos, p.mean_neg) - p.sigma;
    const double hi = std::max(p.mean_pos, p.mean_neg) + p.sigma;
    for (int k = 0; k < 3; ++k) {
      const double z = lo + (hi - lo) * (k + 0.5) / 3.0;
      const auto mc = oracles::slab_label_mc(d, u, z, 400000, 2e-3, 1000 + cfg * 10 + k);
      REQUIRE(mc.count > 100);
      const double closed = domains::induced_label_fn(d, u, z);
      CHECK(std::abs(closed - mc.mean) <= 3.0 * mc.std_error + 1e-3);
    }
  }
}

TEST_CASE("induced_label_fn stays within [0,1] on a grid") {
  rng::Xoshiro256pp gen(55);
  for (int cfg = 0; cfg < 20; ++cfg) {
    const auto d = random_domain(gen);
    const Vec2 u = random_unit(gen);
    for (int i = 0; i <= 200; ++i) {
      const double z = -12.0 + 24.0 * i / 200.0;
      const double f = domains::induced_label_fn(d, u, z);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("branch consistency near the degenerate threshold") {
  // As v.perp(u) -> 0 the smooth branches converge to the sign(z) branch.
  const Vec2 u(0, 1);
  for (double side : {1e-6, -1e-6}) {
    const Vec2 v = Vec2(-side, 1.0).normalized();  // v.perp(u) ~ side
    for (double z : {0.7, -0.4, 1.9}) {
      const auto d = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, v);
      const double smooth = domains::induced_label_fn(d, u, z);
      const double vdu = v.dot(u);
      const double s = z > 0 ? 1.0 : -1.0;
      const double step = vdu > 0 ? 0.5 * (1 + s) : 0.5 * (1 - s);
      CHECK(std::abs(smooth - step) < 1e-3);
    }
  }
}

TEST_CASE("negating u and z leaves the induced density invariant") {
  rng::Xoshiro256pp gen(77);
  for (int cfg = 0; cfg < 20; ++cfg) {
    const auto d = random_domain(gen);
    const Vec2 u = random_unit(gen);
    const auto p = domains::project_domain(d, u);
    const auto p_neg = domains::project_domain(d, -u);
    for (double z : {-1.7, 0.3, 2.2}) {
      CHECK(p.density(z) == p_neg.density(-z));  // exact: same arithmetic
    }
  }
}

TEST_CASE("degenerate branch swaps under joint negation") {
  const auto d = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1});
  for (double z : {0.4, -1.1}) {
    CHECK(domains::induced_label_fn(d, {0, 1}, z) ==
          domains::induced_label_fn(d, {0, -1}, -z));
  }
}

TEST_CASE("hypothesis_eval") {
  CHECK(domains::hypothesis_eval({{0, 1}, 1.0, 0.0}, 0.0) == doctest::Approx(0.5));
  CHECK(domains::hypothesis_eval({{0, 1}, 10.0, 0.0}, 5.0) >= 1.0 - 1e-9);
  // erf-based oracle for Phi(1)
  const double phi1 = 0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)));
  CHECK(domains::hypothesis_eval({{0, 1}, 1.0, 0.0}, 1.0) == doctest::Approx(phi1).epsilon(1e-12));
  // strictly increasing for a > 0
  double prev = -1.0;
  for (double z = -3.0; z <= 3.0; z += 0.25) {
    const double h = domains::hypothesis_eval({{1, 0}, 2.0, 0.3}, z);
    CHECK(h > prev);
    prev = h;
  }
}
