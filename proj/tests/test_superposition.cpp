// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/models.hpp"
#include "palmix/stats.hpp"
#include "palmix/superposition.hpp"

using namespace palmix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const Window kUnit({0, 0}, {1, 1});
}

TEST_CASE("homogeneous Poisson pair mixes by rate ratio") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel p2(kUnit, 3.0);
  const SuperposedModel sup({&p1, &p2});
  const MixtureWeights w = mixture_weights(sup, Point{0.5, 0.5});
  REQUIRE(w.weights.size() == 2);
  CHECK_THAT(w.weights[0], WithinAbs(0.4, 1e-12));
  CHECK_THAT(w.weights[1], WithinAbs(0.6, 1e-12));
}

TEST_CASE("a null component gets weight zero and is never selected") {
  const PoissonModel live(kUnit, 5.0);
  const PoissonModel null(kUnit, 0.0);
  const SuperposedModel sup({&live, &null});
  const MixtureWeights w = mixture_weights(sup, Point{0.5, 0.5});
  CHECK(w.weights[0] == 1.0);
  CHECK(w.weights[1] == 0.0);
  // Selecting the null branch would raise ZeroIntensityAtPoint inside its
  // Palm sampler; two hundred clean draws prove the branch is dead.
  RngStream rng(21);
  for (int i = 0; i < 200; ++i) {
    CHECK_NOTHROW(palm_sample_superposition(sup, Point{0.5, 0.5}, rng));
  }
}

TEST_CASE("inhomogeneous and homogeneous components mix by local density") {
  const PoissonModel grad(kUnit, [](const Point& p) { return p.coords()[0]; }, 1.0);
  const PoissonModel flat(kUnit, 1.0);
  const SuperposedModel sup({&grad, &flat});
  const MixtureWeights w = mixture_weights(sup, Point{0.5, 0.5});
  CHECK_THAT(w.weights[0], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(w.weights[1], WithinAbs(2.0 / 3.0, 1e-15));
}

TEST_CASE("superposed intensity is the exact component sum") {
  const PoissonModel p1(kUnit, [](const Point& p) { return 2.0 * p.coords()[0] + 0.5; }, 2.5);
  const BinomialModel b(kUnit, 9);
  const SuperposedModel sup({&p1, &b});
  RngStream rng(22);
  for (int i = 0; i < 100; ++i) {
    const Point x = rng.uniform_in(kUnit);
    CHECK(sup.intensity(x) == p1.intensity(x) + b.intensity(x));
  }
}

TEST_CASE("superposition needs at least two components on one window") {
  const PoissonModel p1(kUnit, 1.0);
  const PoissonModel other(Window({0, 0}, {2, 2}), 1.0);
  CHECK_THROWS_AS(SuperposedModel({&p1}), InvalidModel);
  CHECK_THROWS_AS(SuperposedModel({&p1, &other}), WindowMismatch);
}

TEST_CASE("conditioning where every component is silent is an error") {
  const PoissonModel grad(kUnit, [](const Point& p) { return p.coords()[0] > 0.5 ? 1.0 : 0.0; }, 1.0);
  const PoissonModel null(kUnit, 0.0);
  const SuperposedModel sup({&grad, &null});
  CHECK_THROWS_AS(mixture_weights(sup, Point{0.25, 0.5}), ZeroIntensityAtPoint);
}

TEST_CASE("sampled superposition concatenates component patterns in order") {
  const BinomialModel b1(kUnit, 2);
  const BinomialModel b2(kUnit, 3);
  const SuperposedModel sup({&b1, &b2});
  RngStream rng(23);
  CHECK(sup.sample(rng).points().size() == 5);
}

TEST_CASE("Palm draws of a superposition contain the atom") {
  const PoissonModel p1(kUnit, 2.0);
  const BinomialModel b(kUnit, 6);
  const SuperposedModel sup({&p1, &b});
  const Point x{0.3, 0.7};
  const Region atom_ball = Region::ball(x, 0.0);
  RngStream rng(24);
  for (int i = 0; i < 100; ++i) CHECK(count_in(palm_sample_superposition(sup, x, rng), atom_ball) >= 1);
}

TEST_CASE("two-point weights for a Poisson pair expand the squared sum") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel p2(kUnit, 3.0);
  const SuperposedModel sup({&p1, &p2});
  const TwoPointWeights w = two_point_weights(sup, Point{0.3, 0.3}, Point{0.7, 0.7});
  CHECK_THAT(w.w11, WithinAbs(4.0 / 25.0, 1e-12));
  CHECK_THAT(w.w12, WithinAbs(6.0 / 25.0, 1e-12));
  CHECK_THAT(w.w21, WithinAbs(6.0 / 25.0, 1e-12));
  CHECK_THAT(w.w22, WithinAbs(9.0 / 25.0, 1e-12));
  CHECK_THAT(w.normalizer, WithinRel(25.0, 1e-12));
  CHECK_THAT(w.normalizer, WithinRel(sup.product_density2(Point{0.3, 0.3}, Point{0.7, 0.7}), 1e-12));
}

TEST_CASE("a single-point Binomial partner kills the both-in-2 branch") {
  const PoissonModel p1(kUnit, 2.0);
  const BinomialModel b1(kUnit, 1);
  const SuperposedModel sup({&p1, &b1});
  const TwoPointWeights w = two_point_weights(sup, Point{0.3, 0.3}, Point{0.7, 0.7});
  CHECK(w.w22 == 0.0);
  CHECK(w.w11 > 0.0);
}

TEST_CASE("a null partner degenerates the two-point law to component one") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel null(kUnit, 0.0);
  const SuperposedModel sup({&p1, &null});
  const TwoPointWeights w = two_point_weights(sup, Point{0.3, 0.3}, Point{0.7, 0.7});
  CHECK(w.w11 == 1.0);
  CHECK(w.w12 == 0.0);
  CHECK(w.w21 == 0.0);
  CHECK(w.w22 == 0.0);
}

TEST_CASE("coincident conditioning points are degenerate") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel p2(kUnit, 3.0);
  const SuperposedModel sup({&p1, &p2});
  CHECK_THROWS_AS(two_point_weights(sup, Point{0.5, 0.5}, Point{0.5, 0.5}), DegenerateConditioning);
}

TEST_CASE("chained weights telescope to the direct two-point weights") {
  // Heterogeneous pair: Poisson keeps its intensity after one removal,
  // Binomial drops from 20 to 19 points. Conditioning the second stage on
  // the unadjusted intensities would give branch mass (0.36, 0.24, 0.2449,
  // 0.1551); the correct chain gives (900, 600, 600, 380)/2480. The 1e-12
  // bound separates the two by nine orders of magnitude.
  const PoissonModel pois(kUnit, 30.0);
  const BinomialModel binom(kUnit, 20);
  const SuperposedModel sup({&pois, &binom});
  const Point x{0.3, 0.3};
  const Point y{0.7, 0.7};
  const TwoPointWeights direct = two_point_weights(sup, x, y);
  const TwoPointWeights chained = chained_two_point_weights(sup, x, y);
  CHECK_THAT(direct.w11, WithinAbs(900.0 / 2480.0, 1e-12));
  CHECK_THAT(direct.w12, WithinAbs(600.0 / 2480.0, 1e-12));
  CHECK_THAT(direct.w21, WithinAbs(600.0 / 2480.0, 1e-12));
  CHECK_THAT(direct.w22, WithinAbs(380.0 / 2480.0, 1e-12));
  CHECK_THAT(chained.w11, WithinAbs(direct.w11, 1e-12));
  CHECK_THAT(chained.w12, WithinAbs(direct.w12, 1e-12));
  CHECK_THAT(chained.w21, WithinAbs(direct.w21, 1e-12));
  CHECK_THAT(chained.w22, WithinAbs(direct.w22, 1e-12));
  CHECK(std::abs(chained.w11 - 0.36) > 2e-3);
  CHECK(std::abs(chained.w21 - 0.4 * 30.0 / 49.0) > 2e-3);
}

TEST_CASE("chain-rule branch probability reproduces w11 for the Poisson pair") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel p2(kUnit, 3.0);
  const SuperposedModel sup({&p1, &p2});
  const TwoPointWeights chained = chained_two_point_weights(sup, Point{0.2, 0.2}, Point{0.8, 0.8});
  CHECK_THAT(chained.w11, WithinAbs(4.0 / 25.0, 1e-12));
}

TEST_CASE("two-point reduced Palm of Binomial(2) plus null is always empty") {
  const BinomialModel b2(kUnit, 2);
  const PoissonModel null(kUnit, 0.0);
  const SuperposedModel sup({&b2, &null});
  RngStream rng(25);
  for (int i = 0; i < 100; ++i) {
    CHECK(two_point_reduced_palm_sample(sup, Point{0.3, 0.3}, Point{0.7, 0.7}, rng).points().empty());
  }
}

TEST_CASE("chained and direct two-point samplers agree for a Poisson pair") {
  const PoissonModel p1(kUnit, 4.0);
  const PoissonModel p2(kUnit, 6.0);
  const SuperposedModel sup({&p1, &p2});
  const Point x{0.3, 0.3};
  const Point y{0.7, 0.7};
  RngStream rng_a(26);
  RngStream rng_b(27);
  const int n = 20000;
  std::vector<double> direct_counts;
  std::vector<double> chained_counts;
  for (int i = 0; i < n; ++i) {
    direct_counts.push_back(static_cast<double>(two_point_reduced_palm_sample(sup, x, y, rng_a).points().size()));
    chained_counts.push_back(static_cast<double>(chained_reduced_palm_sample(sup, x, y, rng_b).points().size()));
  }
  const KsResult ks = ks_two_sample(direct_counts, chained_counts);
  CHECK(ks.p_value >= 1e-3);
}

TEST_CASE("three Poisson components mix by rate and associate") {
  const PoissonModel p1(kUnit, 1.0);
  const PoissonModel p2(kUnit, 2.0);
  const PoissonModel p3(kUnit, 3.0);
  const SuperposedModel flat({&p1, &p2, &p3});
  const MixtureWeights w = mixture_weights(flat, Point{0.5, 0.5});
  REQUIRE(w.weights.size() == 3);
  CHECK(w.weights[0] == 1.0 / 6.0);
  CHECK(w.weights[1] == 2.0 / 6.0);
  CHECK(w.weights[2] == 3.0 / 6.0);

  const SuperposedModel left_inner({&p1, &p2});
  const SuperposedModel left({&left_inner, &p3});
  const SuperposedModel right_inner({&p2, &p3});
  const SuperposedModel right({&p1, &right_inner});
  RngStream rng(28);
  for (int i = 0; i < 100; ++i) {
    const Point x = rng.uniform_in(kUnit);
    const MixtureWeights wf = mixture_weights(flat, x);
    const MixtureWeights wl = flattened_mixture_weights(left, x);
    const MixtureWeights wr = flattened_mixture_weights(right, x);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(wl.weights[j] == wf.weights[j]);
      CHECK(wr.weights[j] == wf.weights[j]);
    }
  }
}

TEST_CASE("reduced superposition Palm of Poisson components is Poisson") {
  const PoissonModel p1(kUnit, 2.0);
  const PoissonModel p2(kUnit, 3.0);
  const SuperposedModel sup({&p1, &p2});
  const PoissonModel merged(kUnit, 5.0);
  const Point x{0.5, 0.5};
  RngStream rng_a(29);
  RngStream rng_b(30);
  const int n = 20000;
  std::vector<double> reduced_counts;
  std::vector<double> plain_counts;
  for (int i = 0; i < n; ++i) {
    reduced_counts.push_back(static_cast<double>(reduced_palm_sample_superposition(sup, x, rng_a).points().size()));
    plain_counts.push_back(static_cast<double>(merged.sample(rng_b).points().size()));
  }
  const KsResult ks = ks_two_sample(reduced_counts, plain_counts);
  CHECK(ks.p_value >= 1e-3);
}
