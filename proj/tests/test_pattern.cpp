// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/pattern.hpp"
#include "palmix/rng.hpp"

using namespace palmix;

namespace {

const Window kUnit({0, 0}, {1, 1});

PointPattern random_pattern(RngStream& rng, std::size_t n) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(rng.uniform_in(kUnit));
  return PointPattern(std::move(pts), kUnit);
}

// Brute force over distinct index tuples, the definition the DP must match.
std::uint64_t brute_factorial(const PointPattern& p, const std::vector<Region>& boxes) {
  const std::size_t n = p.points().size();
  const std::size_t k = boxes.size();
  std::vector<std::size_t> idx(k, 0);
  std::vector<bool> used(n, false);
  std::uint64_t total = 0;
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == k) {
      ++total;
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || !boxes[depth].contains(p.points()[j])) continue;
      used[j] = true;
      self(self, depth + 1);
      used[j] = false;
    }
  };
  recurse(recurse, 0);
  return total;
}

}  // namespace

TEST_CASE("count_in on an empty pattern is zero") {
  const PointPattern empty({}, kUnit);
  CHECK(count_in(empty, Region::ball(Point{0.5, 0.5}, 0.4)) == 0);
}

TEST_CASE("count_in sees an atom at the ball center") {
  const PointPattern p({Point{0.5, 0.5}}, kUnit);
  CHECK(count_in(p, Region::ball(Point{0.5, 0.5}, 0.1)) == 1);
}

TEST_CASE("count_in respects multiplicity") {
  const PointPattern p({Point{0.1, 0.1}, Point{0.1, 0.1}, Point{0.9, 0.9}}, kUnit);
  CHECK(count_in(p, Region::box({0, 0}, {0.2, 0.2})) == 2);
}

TEST_CASE("pattern points must lie in the window") {
  CHECK_THROWS_AS(PointPattern({Point{1.5, 0.5}}, kUnit), PalmixError);
}

TEST_CASE("superpose keeps p1 points first and is the multiset union") {
  const PointPattern p1({Point{0.1, 0.1}}, kUnit);
  const PointPattern p2({Point{0.9, 0.9}}, kUnit);
  const PointPattern s = superpose(p1, p2);
  REQUIRE(s.points().size() == 2);
  CHECK(s.points()[0] == Point{0.1, 0.1});
  CHECK(s.points()[1] == Point{0.9, 0.9});

  const PointPattern empty({}, kUnit);
  CHECK(superpose(empty, p2).points().size() == 1);
  const PointPattern twice = superpose(p1, p1);
  CHECK(count_in(twice, Region::ball(Point{0.1, 0.1}, 0.0)) == 2);
}

TEST_CASE("superpose rejects mismatched windows") {
  const PointPattern p1({}, kUnit);
  const PointPattern p2({}, Window({0, 0}, {2, 2}));
  CHECK_THROWS_AS(superpose(p1, p2), WindowMismatch);
}

TEST_CASE("counting measures add under superposition") {
  RngStream rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    const PointPattern p1 = random_pattern(rng, 5);
    const PointPattern p2 = random_pattern(rng, 7);
    const Point lo = rng.uniform_in(kUnit);
    const Region box = Region::box(Point{lo.coords()[0] * 0.5, lo.coords()[1] * 0.5}, Point{0.9, 0.9});
    CHECK(count_in(superpose(p1, p2), box) == count_in(p1, box) + count_in(p2, box));
  }
}

TEST_CASE("add_atom and remove_atom are inverse") {
  RngStream rng(7);
  const PointPattern p = random_pattern(rng, 4);
  const Point x{0.25, 0.75};
  const PointPattern q = remove_atom(add_atom(p, x), x);
  REQUIRE(q.points().size() == p.points().size());
  for (std::size_t i = 0; i < p.points().size(); ++i) CHECK(q.points()[i] == p.points()[i]);
}

TEST_CASE("add_atom on empty gives the singleton") {
  const PointPattern p = add_atom(PointPattern({}, kUnit), Point{0.5, 0.5});
  REQUIRE(p.points().size() == 1);
  CHECK(p.points()[0] == Point{0.5, 0.5});
}

TEST_CASE("remove_atom deletes exactly one copy") {
  const Point x{0.3, 0.3};
  const PointPattern p({x, x}, kUnit);
  const PointPattern q = remove_atom(p, x);
  REQUIRE(q.points().size() == 1);
  CHECK(q.points()[0] == x);
  CHECK_THROWS_AS(remove_atom(remove_atom(q, x), x), AtomNotFound);
}

TEST_CASE("remove_index drops the requested slot") {
  const PointPattern p({Point{0.1, 0.1}, Point{0.2, 0.2}, Point{0.3, 0.3}}, kUnit);
  const PointPattern q = remove_index(p, 1);
  REQUIRE(q.points().size() == 2);
  CHECK(q.points()[0] == Point{0.1, 0.1});
  CHECK(q.points()[1] == Point{0.3, 0.3});
  CHECK_THROWS_AS(remove_index(p, 3), PalmixError);
}

TEST_CASE("power_count with one box is count_in") {
  RngStream rng(11);
  const PointPattern p = random_pattern(rng, 9);
  const Region box = Region::box({0.2, 0.2}, {0.8, 0.7});
  CHECK(power_count(p, {box}) == count_in(p, box));
}

TEST_CASE("power_count enumerates ordered tuples with repetition") {
  const PointPattern p({Point{0.3, 0.3}, Point{0.4, 0.4}}, kUnit);
  const Region b = Region::box({0.2, 0.2}, {0.5, 0.5});
  CHECK(power_count(p, {b, b}) == 4);
  const Region empty_box = Region::box({0.9, 0.9}, {0.95, 0.95});
  CHECK(power_count(p, {b, empty_box}) == 0);
}

TEST_CASE("factorial_power_count needs distinct indices") {
  const Region b = Region::box({0.2, 0.2}, {0.5, 0.5});
  const PointPattern one({Point{0.3, 0.3}}, kUnit);
  CHECK(factorial_power_count(one, {b, b}) == 0);
  const PointPattern two({Point{0.3, 0.3}, Point{0.4, 0.4}}, kUnit);
  CHECK(factorial_power_count(two, {b, b}) == 2);
  const PointPattern three({Point{0.3, 0.3}, Point{0.4, 0.4}, Point{0.25, 0.45}}, kUnit);
  CHECK(factorial_power_count(three, {b, b, b}) == 6);
}

TEST_CASE("tuple counters match brute-force enumeration") {
  RngStream rng(23);
  for (int rep = 0; rep < 40; ++rep) {
    const PointPattern p = random_pattern(rng, 8);
    std::vector<Region> boxes;
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 2.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double a = rng.uniform() * 0.6;
      const double b = rng.uniform() * 0.6;
      boxes.push_back(Region::box(Point{a, b}, Point{a + 0.4, b + 0.4}));
    }
    const std::uint64_t expected = brute_factorial(p, boxes);
    CHECK(factorial_power_count(p, std::span<const Region>(boxes)) == expected);
    std::uint64_t product = 1;
    for (const Region& box : boxes) product *= count_in(p, box);
    CHECK(power_count(p, std::span<const Region>(boxes)) == product);
  }
}

TEST_CASE("square count equals falling factorial plus count") {
  RngStream rng(31);
  for (int rep = 0; rep < 60; ++rep) {
    const PointPattern p = random_pattern(rng, 1 + static_cast<std::size_t>(rng.uniform() * 10.0));
    const Region b = Region::box({0.1, 0.1}, {0.7, 0.8});
    const std::uint64_t n = count_in(p, b);
    CHECK(power_count(p, {b, b}) == n * n);
    CHECK(factorial_power_count(p, {b, b}) + n == n * n);
  }
}
