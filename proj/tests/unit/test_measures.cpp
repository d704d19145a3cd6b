#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "udalab/measures.hpp"
#include "udalab/rng.hpp"

using namespace udalab;
using domains::InducedMixture1D;
using domains::LinearUdaModel;
using domains::MixtureDomain;
using domains::MixtureDomainPair;
using domains::Vec2;
using measures::QuadratureSpec;
using measures::Rule;

namespace {

const QuadratureSpec kDefault = QuadratureSpec::default_spec();

MixtureDomain random_domain(rng::Xoshiro256pp& gen) {
  const double phi = gen.uniform(0, 2 * M_PI);
  return MixtureDomain::make({gen.uniform(-2, 2), gen.uniform(-2, 2)},
                             {gen.uniform(-2, 2), gen.uniform(-2, 2)}, gen.uniform(0.5, 2.0),
                             {std::cos(phi), std::sin(phi)});
}

InducedMixture1D random_mixture(rng::Xoshiro256pp& gen) {
  return {gen.uniform(-2, 2), gen.uniform(-2, 2), gen.uniform(0.5, 2.0)};
}

// Wide enough to cover 6 sigma for all random draws above.
const QuadratureSpec kWide{-16.0, 16.0, 6001, Rule::simpson};

}  // namespace

TEST_CASE("QuadratureSpec validation") {
  CHECK_THROWS_AS(measures::integrate([](double) { return 1.0; },
                                      QuadratureSpec{1.0, 0.0, 1001, Rule::simpson}),
                  std::invalid_argument);
  CHECK_THROWS_AS(measures::integrate([](double) { return 1.0; },
                                      QuadratureSpec{0.0, 1.0, 1000, Rule::simpson}),
                  std::invalid_argument);
  CHECK_THROWS_AS(measures::integrate([](double) { return 1.0; },
                                      QuadratureSpec{0.0, 1.0, 51, Rule::simpson}),
                  std::invalid_argument);
}

TEST_CASE("integrate basics") {
  const QuadratureSpec unit{0.0, 1.0, 1001, Rule::trapezoid};
  CHECK(measures::integrate([](double) { return 1.0; }, unit) == doctest::Approx(1.0).epsilon(1e-12));

  const QuadratureSpec sym{-1.0, 1.0, 1001, Rule::simpson};
  CHECK(measures::integrate([](double z) { return z; }, sym) == doctest::Approx(0.0).epsilon(1e-12));

  const QuadratureSpec wide{-10.0, 10.0, 2001, Rule::simpson};
  const double inv = 1.0 / std::sqrt(2.0 * M_PI);
  CHECK(measures::integrate([&](double z) { return inv * std::exp(-0.5 * z * z); }, wide) ==
        doctest::Approx(1.0).epsilon(1e-8));

  CHECK_THROWS_AS(measures::integrate([](double z) { return z > 0.5 ? NAN : 1.0; }, unit),
                  NumericFailure);
}

// Grid with no node at z = 0, where degenerate-branch steps carry their
// measure-zero midpoint value (asymmetric range keeps 0 between nodes).
const QuadratureSpec kOffset{-12.003, 12.009, 4001, Rule::simpson};

TEST_CASE("abs_error basics") {
  const auto src = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1});

  // h == 0.5 against a degenerate step: |0.5 - {0,1}| = 0.5 pointwise.
  const LinearUdaModel flat{{0, 1}, 0.0, 0.0};
  CHECK(measures::abs_error(flat, src, {0, 1}, kOffset) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(measures::abs_error(flat, src, {0, 1}, kDefault) == doctest::Approx(0.5).epsilon(2e-3));

  // Analytic case-1 optimum at large a: error below 1e-3.
  const LinearUdaModel sharp{{0, 1}, 1000.0, 0.0};
  CHECK(measures::abs_error(sharp, src, {0, 1}, kDefault) < 1e-3);

  // Range precondition.
  CHECK_THROWS_AS(
      measures::abs_error(flat, src, {0, 1}, QuadratureSpec{-3.0, 3.0, 1001, Rule::simpson}),
      RangeCoverageError);
}

TEST_CASE("abs_error agrees with a sampling oracle") {
  rng::Xoshiro256pp gen(5);
  for (int i = 0; i < 5; ++i) {
    const auto d = random_domain(gen);
    const double phi = gen.uniform(0, 2 * M_PI);
    const Vec2 u(std::cos(phi), std::sin(phi));
    const LinearUdaModel m{u, gen.uniform(-5, 5), gen.uniform(-2, 2)};
    const double quad = measures::abs_error(m, d, u, kWide);
    const auto mc = oracles::induced_expectation_mc(
        d, u,
        [&](double z) {
          return std::abs(domains::induced_label_fn(d, u, z) - domains::hypothesis_eval(m, z));
        },
        1000000, 900 + i);
    CHECK(std::abs(quad - mc.mean) <= 3.0 * mc.std_error + 1e-6);
  }
}

TEST_CASE("sq_source_loss basics") {
  const auto src = MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1});

  const LinearUdaModel flat{{0, 1}, 0.0, 0.0};
  CHECK(measures::sq_source_loss(flat, src, {0, 1}, kOffset) ==
        doctest::Approx(0.25).epsilon(1e-9));

  const LinearUdaModel sharp{{0, 1}, 1000.0, 0.0};
  CHECK(measures::sq_source_loss(sharp, src, {0, 1}, kDefault) < 1e-3);

  // Saturated hypothesis against f~ == 1: with both means far above the
  // boundary the sub-boundary mass is ~1e-33 and the loss vanishes.
  const auto all_pos = MixtureDomain::make({0, 8}, {0, 6}, 0.5, {0, 1});
  const LinearUdaModel saturated{{0, 1}, 0.0, 40.0};
  CHECK(measures::sq_source_loss(saturated, all_pos, {0, 1}, kDefault) < 1e-12);
}

TEST_CASE("label_mismatch on the case-study configurations") {
  // Case 2: identical marginals, flipped target labels -> mismatch 1.
  const MixtureDomainPair case2{MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1}),
                                MixtureDomain::make({1, -1}, {1, 1}, 1.0, {0, -1})};
  CHECK(measures::label_mismatch(measures::DomainSide::source, {0, 1}, case2, kOffset) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(measures::label_mismatch(measures::DomainSide::source, {0, 1}, case2, kDefault) ==
        doctest::Approx(1.0).epsilon(2e-3));

  // Case 1: identical labeling -> mismatch 0.
  const MixtureDomainPair case1{MixtureDomain::make({-1, 1}, {-1, -1}, 1.0, {0, 1}),
                                MixtureDomain::make({1, 1}, {1, -1}, 1.0, {0, 1})};
  CHECK(measures::label_mismatch(measures::DomainSide::source, {0, 1}, case1, kDefault) < 1e-6);

  // u orthogonal to both label normals: both induced labelings are flat 0.5.
  CHECK(measures::label_mismatch(measures::DomainSide::target, {1, 0}, case1, kDefault) < 1e-9);
}

TEST_CASE("total_variation") {
  const InducedMixture1D p{0.3, -0.4, 1.0};
  CHECK(measures::total_variation(p, p, kDefault) < 1e-10);

  // N(0,1) vs N(4,1) as mixtures with duplicated means; closed-form oracle.
  const InducedMixture1D a{0.0, 0.0, 1.0};
  const InducedMixture1D b{4.0, 4.0, 1.0};
  CHECK(measures::total_variation(a, b, kDefault) ==
        doctest::Approx(oracles::tv_equal_sigma_gaussians(0.0, 4.0, 1.0)).epsilon(1e-8));
  CHECK(oracles::tv_equal_sigma_gaussians(0.0, 4.0, 1.0) == doctest::Approx(1.9090).epsilon(1e-4));

  // Symmetry, exactly, on the shared grid.
  rng::Xoshiro256pp gen(21);
  for (int i = 0; i < 20; ++i) {
    const auto pa = random_mixture(gen);
    const auto pb = random_mixture(gen);
    CHECK(measures::total_variation(pa, pb, kWide) == measures::total_variation(pb, pa, kWide));
  }
}

TEST_CASE("sq_density_mismatch") {
  const InducedMixture1D p{0.5, -0.5, 1.0};
  CHECK(measures::sq_density_mismatch(p, p, kDefault) == doctest::Approx(0.0));

  rng::Xoshiro256pp gen(42);
  for (int i = 0; i < 50; ++i) {
    const auto pa = random_mixture(gen);
    const auto pb = random_mixture(gen);
    CHECK(measures::sq_density_mismatch(pa, pb, kWide) ==
          measures::sq_density_mismatch(pb, pa, kWide));
  }

  // Fine-grid trapezoid oracle.
  const InducedMixture1D pa{1.2, -0.3, 0.8};
  const InducedMixture1D pb{-0.7, 0.9, 1.4};
  const double fine = oracles::trapezoid(
      [&](double z) {
        const double d = pa.density(z) - pb.density(z);
        return d * d;
      },
      -16.0, 16.0, 1000001);
  CHECK(measures::sq_density_mismatch(pa, pb, kWide) == doctest::Approx(fine).epsilon(1e-6));
}

TEST_CASE("kl_divergence") {
  const InducedMixture1D p{0.5, -0.5, 1.0};
  CHECK(measures::kl_divergence(p, p, kDefault) == doctest::Approx(0.0).epsilon(1e-9));

  // Degenerate mixtures N(0,1) || N(1,1): closed form (mu1-mu2)^2 / 2.
  const InducedMixture1D a{0.0, 0.0, 1.0};
  const InducedMixture1D b{1.0, 1.0, 1.0};
  CHECK(measures::kl_divergence(a, b, kDefault) == doctest::Approx(0.5).epsilon(1e-8));

  // Monte-Carlo oracle on random pairs.
  rng::Xoshiro256pp gen(33);
  for (int i = 0; i < 5; ++i) {
    const auto pa = random_mixture(gen);
    const auto pb = random_mixture(gen);
    const double quad = measures::kl_divergence(pa, pb, kWide);
    const auto mc = oracles::kl_mc(pa, pb, 1000000, 500 + i);
    CHECK(std::abs(quad - mc.mean) <= 3.0 * mc.std_error + 1e-6);
  }
}

TEST_CASE("Pinsker property over random mixture pairs") {
  // D_1 is the unhalved integral, so the Pinsker majorant is sqrt(2 KL).
  rng::Xoshiro256pp gen(64);
  for (int i = 0; i < 100; ++i) {
    const auto pa = random_mixture(gen);
    const auto pb = random_mixture(gen);
    const double tv = measures::total_variation(pa, pb, kWide);
    const double kl = measures::kl_divergence(pa, pb, kWide);
    CHECK(tv <= std::sqrt(2.0 * std::max(kl, 0.0)) + 1e-4);
    CHECK(tv >= 0.0);
    CHECK(tv <= 2.0);
    CHECK(kl >= -1e-9);
  }
}

TEST_CASE("grid refinement changes measures by less than 1e-6") {
  // Certifies the default range/resolution on case-study-scale configs.
  rng::Xoshiro256pp gen(90);
  QuadratureSpec doubled = kDefault;
  doubled.nodes = 8001;
  for (int i = 0; i < 10; ++i) {
    const double phi = gen.uniform(0, 2 * M_PI);
    const Vec2 v(std::cos(phi), std::sin(phi));
    const double phi2 = gen.uniform(0, 2 * M_PI);
    const MixtureDomainPair pair{
        MixtureDomain::make({gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5)},
                            {gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5)}, 1.0, v),
        MixtureDomain::make({gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5)},
                            {gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5)}, 1.0,
                            {std::cos(phi2), std::sin(phi2)})};
    const double phi3 = gen.uniform(0, 2 * M_PI);
    const LinearUdaModel m{{std::cos(phi3), std::sin(phi3)}, gen.uniform(-5, 5),
                           gen.uniform(-2, 2)};
    const auto coarse = measures::compute_measures(pair, m, kDefault);
    const auto fine = measures::compute_measures(pair, m, doubled);
    CHECK(std::abs(coarse.e_S_sq - fine.e_S_sq) < 1e-6);
    CHECK(std::abs(coarse.e_S_abs - fine.e_S_abs) < 1e-6);
    CHECK(std::abs(coarse.e_T_abs - fine.e_T_abs) < 1e-6);
    CHECK(std::abs(coarse.mismatch_S - fine.mismatch_S) < 1e-6);
    CHECK(std::abs(coarse.mismatch_T - fine.mismatch_T) < 1e-6);
    CHECK(std::abs(coarse.tv - fine.tv) < 1e-6);
    CHECK(std::abs(coarse.mismatch_sq - fine.mismatch_sq) < 1e-6);
    CHECK(std::abs(coarse.kl - fine.kl) < 1e-6);
  }
}

TEST_CASE("measure ranges") {
  rng::Xoshiro256pp gen(17);
  for (int i = 0; i < 20; ++i) {
    const auto ds = random_domain(gen);
    const auto dt = random_domain(gen);
    const double phi = gen.uniform(0, 2 * M_PI);
    const LinearUdaModel m{{std::cos(phi), std::sin(phi)}, gen.uniform(-5, 5), gen.uniform(-2, 2)};
    const auto ms = measures::compute_measures({ds, dt}, m, kWide);
    CHECK(ms.e_S_sq >= 0.0);
    CHECK(ms.e_S_abs >= 0.0);
    CHECK(ms.e_S_abs <= 1.0);
    CHECK(ms.e_T_abs >= 0.0);
    CHECK(ms.e_T_abs <= 1.0);
    CHECK(ms.mismatch_S >= 0.0);
    CHECK(ms.mismatch_S <= 1.0);
    CHECK(ms.mismatch_T >= 0.0);
    CHECK(ms.mismatch_T <= 1.0);
    CHECK(ms.tv >= 0.0);
    CHECK(ms.tv <= 2.0);
    CHECK(ms.mismatch_sq >= 0.0);
    CHECK(ms.kl >= -1e-9);
  }
}
