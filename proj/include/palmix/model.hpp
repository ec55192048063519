// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"
#include "palmix/pattern.hpp"
#include "palmix/rng.hpp"

namespace palmix {

using IntensityFn = std::function<double(const Point&)>;
using DensityFn = std::function<double(const Point&)>;

// A simulable point process on a box window. Implementations are immutable
// after construction and never own RNG state; all randomness flows through
// the stream passed to each call, so independent streams give independent,
// reproducible replicates.
//
// intensity() is the Lebesgue density of the first moment measure on the
// window. product_density2() is the density of the second factorial moment
// measure. palm_sample(x) draws a pattern conditioned to carry an atom at x
// (the atom is appended last); reduced_palm_sample(x) is the same draw with
// that atom removed. reduced_palm2_sample(x, y) conditions on distinct atoms
// at both points and removes both. Capability flags gate each optional
// operation; calling an unsupported one throws.
class ProcessModel {
 public:
  virtual ~ProcessModel() = default;

  virtual const Window& window() const = 0;
  virtual PointPattern sample(RngStream& rng) const = 0;
  virtual double intensity(const Point& x) const = 0;

  virtual bool has_analytic_palm() const = 0;
  virtual PointPattern palm_sample(const Point& x, RngStream& rng) const {
    (void)x;
    (void)rng;
    throw NoAnalyticPalm("model has no analytic Palm sampler");
  }
  virtual PointPattern reduced_palm_sample(const Point& x, RngStream& rng) const {
    return remove_atom(palm_sample(x, rng), x);
  }

  virtual bool has_product_density2() const = 0;
  virtual double product_density2(const Point& x, const Point& y) const {
    (void)x;
    (void)y;
    throw NoProductDensity("model has no second product density");
  }

  virtual bool has_reduced_palm2() const { return false; }
  virtual PointPattern reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const {
    (void)x;
    (void)y;
    (void)rng;
    throw NoAnalyticPalm("model has no analytic two-point reduced Palm sampler");
  }

 protected:
  void require_in_window(const Point& x) const {
    if (!window().contains(x)) throw OutOfWindow("point outside the model window");
  }
  void require_pair(const Point& x, const Point& y) const {
    require_in_window(x);
    require_in_window(y);
    if (x == y) throw DegenerateConditioning("two-point operation requires distinct points");
  }
};

}  // namespace palmix
