// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"

namespace palmix {

// A finite multiset of points together with its window. Duplicate points are
// legal; whether a process is simple is a statistical question, not a type
// constraint. Immutable after construction.
class PointPattern {
 public:
  PointPattern(std::vector<Point> points, Window window)
      : points_(std::move(points)), window_(std::move(window)) {
    for (const Point& p : points_) {
      if (!window_.contains(p)) throw OutOfWindow("pattern point lies outside its window");
    }
  }

  explicit PointPattern(Window window) : window_(std::move(window)) {}

  const std::vector<Point>& points() const { return points_; }
  const Window& window() const { return window_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<Point> points_;
  Window window_;
};

// Number of points inside the region, with multiplicity.
inline std::uint64_t count_in(const PointPattern& pattern, const Region& region) {
  std::uint64_t n = 0;
  for (const Point& p : pattern.points()) {
    if (region.contains(p)) ++n;
  }
  return n;
}

// Multiset union; the first pattern's points come first.
inline PointPattern superpose(const PointPattern& a, const PointPattern& b) {
  if (a.window() != b.window()) throw WindowMismatch("superpose requires a common window");
  std::vector<Point> pts;
  pts.reserve(a.size() + b.size());
  pts.insert(pts.end(), a.points().begin(), a.points().end());
  pts.insert(pts.end(), b.points().begin(), b.points().end());
  return {std::move(pts), a.window()};
}

// Appends one copy of x.
inline PointPattern add_atom(const PointPattern& pattern, const Point& x) {
  std::vector<Point> pts = pattern.points();
  pts.push_back(x);
  return {std::move(pts), pattern.window()};
}

// Deletes exactly one copy of x (the first occurrence, by exact coordinate
// equality).
inline PointPattern remove_atom(const PointPattern& pattern, const Point& x) {
  std::vector<Point> pts = pattern.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] == x) {
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
      return {std::move(pts), pattern.window()};
    }
  }
  throw AtomNotFound("remove_atom: no point equals the requested atom");
}

// Removes the point at a known index.
inline PointPattern remove_index(const PointPattern& pattern, std::size_t index) {
  std::vector<Point> pts = pattern.points();
  if (index >= pts.size()) throw PalmixError("remove_index: index out of range");
  pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(index));
  return {std::move(pts), pattern.window()};
}

// Count of ordered k-tuples (j_1,...,j_k) with X_{j_i} in boxes[i]; indices
// may repeat. Equals the product of the individual counts.
inline std::uint64_t power_count(const PointPattern& pattern, std::span<const Region> boxes) {
  if (boxes.empty()) throw EmptyInput("power_count requires at least one region");
  std::uint64_t prod = 1;
  for (const Region& b : boxes) {
    prod *= count_in(pattern, b);
    if (prod == 0) return 0;
  }
  return prod;
}

// Count of ordered k-tuples of pairwise distinct indices with X_{j_i} in
// boxes[i]. For k regions this is the permanent of the point/region
// membership matrix, computed by subset DP in O(n k 2^k).
inline std::uint64_t factorial_power_count(const PointPattern& pattern,
                                           std::span<const Region> boxes) {
  const std::size_t k = boxes.size();
  if (k == 0) throw EmptyInput("factorial_power_count requires at least one region");
  if (k == 1) return count_in(pattern, boxes[0]);
  if (k == 2) {
    // Ordered distinct pairs: c0*c1 minus the diagonal (points in both).
    std::uint64_t c0 = 0, c1 = 0, both = 0;
    for (const Point& p : pattern.points()) {
      const bool in0 = boxes[0].contains(p);
      const bool in1 = boxes[1].contains(p);
      c0 += in0;
      c1 += in1;
      both += in0 && in1;
    }
    return c0 * c1 - both;
  }
  if (k > 16) throw PalmixError("factorial_power_count supports at most 16 regions");

  const std::uint32_t full = (1u << k) - 1u;
  std::vector<std::uint64_t> ways(full + 1u, 0);
  ways[0] = 1;
  for (const Point& p : pattern.points()) {
    std::uint32_t mask = 0;
    for (std::size_t r = 0; r < k; ++r) {
      if (boxes[r].contains(p)) mask |= 1u << r;
    }
    if (mask == 0) continue;
    // Descending subset order so each point is assigned to at most one slot.
    for (std::uint32_t s = full; ; --s) {
      if (ways[s] != 0) {
        std::uint32_t avail = mask & ~s;
        while (avail != 0) {
          const std::uint32_t bit = avail & (0u - avail);
          ways[s | bit] += ways[s];
          avail ^= bit;
        }
      }
      if (s == 0) break;
    }
  }
  return ways[full];
}

inline std::uint64_t power_count(const PointPattern& pattern, std::initializer_list<Region> boxes) {
  return power_count(pattern, std::span<const Region>(boxes.begin(), boxes.size()));
}

inline std::uint64_t factorial_power_count(const PointPattern& pattern, std::initializer_list<Region> boxes) {
  return factorial_power_count(pattern, std::span<const Region>(boxes.begin(), boxes.size()));
}

}  // namespace palmix
