// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <span>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"

using namespace palmix;

TEST_CASE("points carry one to three finite coordinates") {
  CHECK(Point{0.5}.dim() == 1);
  CHECK(Point{0.5, 0.5}.dim() == 2);
  CHECK(Point{0.1, 0.2, 0.3}.dim() == 3);
  // Empty braces pick the inert default constructor; the span path validates.
  CHECK_THROWS_AS(Point(std::span<const double>{}), PalmixError);
  CHECK_THROWS_AS((Point{0.1, 0.2, 0.3, 0.4}), PalmixError);
  CHECK_THROWS_AS((Point{0.1, std::numeric_limits<double>::quiet_NaN()}), PalmixError);
  CHECK_THROWS_AS((Point{std::numeric_limits<double>::infinity()}), PalmixError);
}

TEST_CASE("point equality is exact") {
  CHECK(Point{0.25, 0.5} == Point{0.25, 0.5});
  CHECK_FALSE(Point{0.25, 0.5} == Point{0.25, 0.5 + 1e-16});
  CHECK_FALSE(Point{0.25} == Point{0.25, 0.5});
}

TEST_CASE("squared distance") {
  CHECK(squared_distance(Point{0.0, 0.0}, Point{3.0, 4.0}) == 25.0);
  CHECK(squared_distance(Point{1.5}, Point{1.5}) == 0.0);
}

TEST_CASE("window validates bounds and measures itself") {
  const Window w({0, 0}, {2, 3});
  CHECK(w.dim() == 2);
  CHECK(w.volume() == 6.0);
  CHECK(w.extent(0) == 2.0);
  CHECK(w.extent(1) == 3.0);
  CHECK_THROWS_AS(Window({0, 0}, {0, 1}), PalmixError);
  CHECK_THROWS_AS(Window({0, 1}, {1, 0}), PalmixError);
}

TEST_CASE("window containment is closed") {
  const Window w({0, 0}, {1, 1});
  CHECK(w.contains(Point{0.0, 0.0}));
  CHECK(w.contains(Point{1.0, 1.0}));
  CHECK(w.contains(Point{0.5, 1.0}));
  CHECK_FALSE(w.contains(Point{0.5, 1.0 + 1e-12}));
}

TEST_CASE("box regions use closed faces") {
  const Region box = Region::box({0.25, 0.25}, {0.5, 0.75});
  CHECK(box.contains(Point{0.25, 0.25}));
  CHECK(box.contains(Point{0.5, 0.75}));
  CHECK_FALSE(box.contains(Point{0.5 + 1e-12, 0.5}));
  CHECK_THAT(box.volume(), Catch::Matchers::WithinRel(0.125, 1e-14));
}

TEST_CASE("ball regions include their boundary sphere") {
  const Region ball = Region::ball(Point{0.5, 0.5}, 0.25);
  CHECK(ball.contains(Point{0.5, 0.5}));
  CHECK(ball.contains(Point{0.75, 0.5}));
  CHECK_FALSE(ball.contains(Point{0.75 + 1e-9, 0.5}));
  CHECK_THAT(ball.volume(), Catch::Matchers::WithinRel(M_PI * 0.0625, 1e-14));
}

TEST_CASE("ball volume by dimension") {
  CHECK_THAT(Region::ball(Point{0.5}, 0.1).volume(), Catch::Matchers::WithinRel(0.2, 1e-14));
  CHECK_THAT(Region::ball(Point{0.5, 0.5, 0.5}, 0.1).volume(),
             Catch::Matchers::WithinRel(4.0 / 3.0 * M_PI * 1e-3, 1e-14));
}

TEST_CASE("radius zero ball holds exactly its center") {
  const Region ball = Region::ball(Point{0.5, 0.5}, 0.0);
  CHECK(ball.contains(Point{0.5, 0.5}));
  // Offset must square to a representable value; 1e-300 squared underflows.
  CHECK_FALSE(ball.contains(Point{0.5, 0.5 + 1e-12}));
  CHECK(ball.volume() == 0.0);
}

TEST_CASE("whole-window region matches window containment") {
  const Window w({0, 0}, {1, 2});
  const Region whole = Region::whole(w);
  CHECK(whole.contains(Point{1.0, 2.0}));
  CHECK_FALSE(whole.contains(Point{1.0, 2.1}));
  CHECK(whole.volume() == 2.0);
}
