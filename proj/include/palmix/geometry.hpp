// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>

#include "palmix/errors.hpp"

namespace palmix {

// A point in R^d, d in {1,2,3}. Coordinates must be finite.
class Point {
 public:
  Point() = default;

  Point(std::initializer_list<double> coords) { init(coords.begin(), coords.size()); }

  explicit Point(std::span<const double> coords) { init(coords.data(), coords.size()); }

  int dim() const { return dim_; }

  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[static_cast<std::size_t>(i)] != b.c_[static_cast<std::size_t>(i)]) return false;
    }
    return true;
  }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }

 private:
  void init(const double* data, std::size_t n) {
    if (n < 1 || n > 3) {
      throw PalmixError("point dimension must be 1, 2 or 3, got " + std::to_string(n));
    }
    dim_ = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(data[i])) throw PalmixError("point coordinate is not finite");
      c_[i] = data[i];
    }
  }

  std::array<double, 3> c_{};
  int dim_ = 0;
};

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Axis-aligned box with strictly positive volume; the observation window.
class Window {
 public:
  Window(Point lower, Point upper) : lower_(lower), upper_(upper) {
    if (lower.dim() != upper.dim()) throw PalmixError("window corner dimensions differ");
    for (int i = 0; i < lower.dim(); ++i) {
      if (!(lower[i] < upper[i])) throw PalmixError("window requires lower < upper on every axis");
    }
  }

  int dim() const { return lower_.dim(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  double extent(int i) const { return upper_[i] - lower_[i]; }

  double volume() const {
    double v = 1;
    for (int i = 0; i < dim(); ++i) v *= extent(i);
    return v;
  }

  // Closed membership: faces belong to the window.
  bool contains(const Point& p) const {
    if (p.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
    }
    return true;
  }

  friend bool operator==(const Window& a, const Window& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }
  friend bool operator!=(const Window& a, const Window& b) { return !(a == b); }

 private:
  Point lower_;
  Point upper_;
};

// Measurable test set: a closed box or a closed ball. Radius zero is allowed
// and means exact-coordinate membership.
class Region {
 public:
  static Region box(Point lower, Point upper) {
    if (lower.dim() != upper.dim()) throw PalmixError("region corner dimensions differ");
    for (int i = 0; i < lower.dim(); ++i) {
      if (!(lower[i] < upper[i])) throw PalmixError("box region requires lower < upper on every axis");
    }
    Region r;
    r.ball_ = false;
    r.a_ = lower;
    r.b_ = upper;
    return r;
  }

  static Region ball(Point center, double radius) {
    if (!(radius >= 0) || !std::isfinite(radius)) {
      throw PalmixError("ball region requires a finite radius >= 0");
    }
    Region r;
    r.ball_ = true;
    r.a_ = center;
    r.radius_ = radius;
    return r;
  }

  static Region whole(const Window& w) { return box(w.lower(), w.upper()); }

  bool is_ball() const { return ball_; }
  int dim() const { return a_.dim(); }
  const Point& lower() const { return a_; }
  const Point& upper() const { return b_; }
  const Point& center() const { return a_; }
  double radius() const { return radius_; }

  bool contains(const Point& p) const {
    if (p.dim() != dim()) return false;
    if (ball_) return squared_distance(p, a_) <= radius_ * radius_;
    for (int i = 0; i < dim(); ++i) {
      if (p[i] < a_[i] || p[i] > b_[i]) return false;
    }
    return true;
  }

  // Lebesgue measure of the region itself (not clipped to any window).
  double volume() const {
    if (!ball_) {
      double v = 1;
      for (int i = 0; i < dim(); ++i) v *= b_[i] - a_[i];
      return v;
    }
    switch (dim()) {
      case 1: return 2.0 * radius_;
      case 2: return std::numbers::pi * radius_ * radius_;
      default: return 4.0 / 3.0 * std::numbers::pi * radius_ * radius_ * radius_;
    }
  }

  // True when the region lies entirely inside the window (closed inclusion).
  bool inside(const Window& w) const {
    if (dim() != w.dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      const double lo = ball_ ? a_[i] - radius_ : a_[i];
      const double hi = ball_ ? a_[i] + radius_ : b_[i];
      if (lo < w.lower()[i] || hi > w.upper()[i]) return false;
    }
    return true;
  }

 private:
  Region() = default;

  bool ball_ = false;
  Point a_;
  Point b_;
  double radius_ = 0;
};

}  // namespace palmix
