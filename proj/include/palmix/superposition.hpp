// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/pattern.hpp"
#include "palmix/rng.hpp"

namespace palmix {

// Component-selection probabilities for Palm conditioning at one point:
// weight_j is proportional to component j's intensity density there.
struct MixtureWeights {
  std::vector<double> weights;
};

// Branch probabilities for Palm conditioning at two distinct points x, y of
// a two-component superposition. Branches: both points in component 1, x in
// 1 and y in 2, y in 1 and x in 2, both in component 2. The normalizer is
// the shared denominator of all four branches and equals the superposition's
// second product density at (x, y).
struct TwoPointWeights {
  double w11 = 0;
  double w12 = 0;
  double w21 = 0;
  double w22 = 0;
  double normalizer = 0;
};

namespace detail {

inline void check_normalized(std::span<const double> w) {
  double sum = 0;
  for (double v : w) {
    if (!(v >= 0) || v > 1 + 1e-12) throw PalmixError("weight outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12 * static_cast<double>(w.size())) throw PalmixError("weights do not sum to 1");
}

}  // namespace detail

// Sum of k >= 2 independent processes on one common window. Implements the
// full process contract: samples superpose, intensities add, and the second
// product density adds the cross terms m_j(x) m_l(y) over ordered pairs of
// distinct components. Palm samplers realize the mixture form: one component
// is selected with probability proportional to its intensity at the
// conditioning point and contributes its Palm draw; the others contribute
// ordinary samples. Components are borrowed, not owned, and must outlive
// the superposition.
class SuperposedModel : public ProcessModel {
 public:
  explicit SuperposedModel(std::vector<const ProcessModel*> components) : components_(std::move(components)) {
    if (components_.size() < 2) throw InvalidModel("superposition needs at least two components");
    for (const auto* c : components_) {
      if (c == nullptr) throw InvalidModel("superposition component is null");
      if (!(c->window() == components_[0]->window())) throw WindowMismatch("superposition components must share one window");
    }
  }

  const std::vector<const ProcessModel*>& components() const { return components_; }

  const Window& window() const override { return components_[0]->window(); }

  PointPattern sample(RngStream& rng) const override {
    std::vector<Point> pts;
    for (const auto* c : components_) {
      PointPattern part = c->sample(rng);
      pts.insert(pts.end(), part.points().begin(), part.points().end());
    }
    return PointPattern(std::move(pts), window());
  }

  double intensity(const Point& x) const override {
    double total = 0;
    for (const auto* c : components_) total += c->intensity(x);
    return total;
  }

  bool has_analytic_palm() const override {
    for (const auto* c : components_) {
      if (!c->has_analytic_palm()) return false;
    }
    return true;
  }

  PointPattern palm_sample(const Point& x, RngStream& rng) const override;
  PointPattern reduced_palm_sample(const Point& x, RngStream& rng) const override;

  bool has_product_density2() const override {
    for (const auto* c : components_) {
      if (!c->has_product_density2()) return false;
    }
    return true;
  }

  double product_density2(const Point& x, const Point& y) const override {
    require_pair(x, y);
    double total = 0;
    for (const auto* c : components_) total += c->product_density2(x, y);
    for (std::size_t j = 0; j < components_.size(); ++j) {
      for (std::size_t l = 0; l < components_.size(); ++l) {
        if (j != l) total += components_[j]->intensity(x) * components_[l]->intensity(y);
      }
    }
    return total;
  }

  bool has_reduced_palm2() const override {
    if (components_.size() != 2) return false;
    for (const auto* c : components_) {
      if (!c->has_analytic_palm() || !c->has_product_density2() || !c->has_reduced_palm2()) return false;
    }
    return true;
  }

  PointPattern reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const override;

 private:
  std::vector<const ProcessModel*> components_;
};

// weight_j = m_j(x) / sum_l m_l(x) over the given components.
inline MixtureWeights mixture_weights(std::span<const ProcessModel* const> components, const Point& x) {
  if (components.empty()) throw EmptyInput("mixture weights need at least one component");
  std::vector<double> m(components.size());
  double total = 0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    m[j] = components[j]->intensity(x);
    total += m[j];
  }
  if (total <= 0) throw ZeroIntensityAtPoint("total intensity vanishes at the conditioning point");
  for (double& v : m) v /= total;
  detail::check_normalized(m);
  return MixtureWeights{std::move(m)};
}

inline MixtureWeights mixture_weights(const SuperposedModel& model, const Point& x) {
  return mixture_weights(std::span<const ProcessModel* const>(model.components()), x);
}

// Leaf components of a superposition tree in left-to-right order; nested
// superpositions are expanded. Weight accumulation order depends only on
// the leaf sequence, so every association of the same leaves produces
// bitwise-identical weights.
inline void collect_leaves(const ProcessModel& model, std::vector<const ProcessModel*>& out) {
  if (const auto* sup = dynamic_cast<const SuperposedModel*>(&model)) {
    for (const auto* c : sup->components()) collect_leaves(*c, out);
  } else {
    out.push_back(&model);
  }
}

inline MixtureWeights flattened_mixture_weights(const ProcessModel& model, const Point& x) {
  std::vector<const ProcessModel*> leaves;
  collect_leaves(model, leaves);
  return mixture_weights(std::span<const ProcessModel* const>(leaves), x);
}

// Mixture-form Palm sampler: one component, chosen by mixture_weights with a
// single uniform, contributes its Palm draw; the rest contribute independent
// ordinary samples. Parts are generated and concatenated in component order.
inline PointPattern palm_sample_superposition(const SuperposedModel& model, const Point& x, RngStream& rng) {
  if (!model.window().contains(x)) throw OutOfWindow("conditioning point outside the window");
  const MixtureWeights w = mixture_weights(model, x);
  const std::size_t chosen = rng.categorical(w.weights);
  std::vector<Point> pts;
  for (std::size_t j = 0; j < model.components().size(); ++j) {
    PointPattern part = j == chosen ? model.components()[j]->palm_sample(x, rng) : model.components()[j]->sample(rng);
    pts.insert(pts.end(), part.points().begin(), part.points().end());
  }
  return PointPattern(std::move(pts), model.window());
}

// Reduced form of the above: the chosen component contributes its reduced
// Palm draw directly, rather than removing the atom afterwards.
inline PointPattern reduced_palm_sample_superposition(const SuperposedModel& model, const Point& x, RngStream& rng) {
  if (!model.window().contains(x)) throw OutOfWindow("conditioning point outside the window");
  const MixtureWeights w = mixture_weights(model, x);
  const std::size_t chosen = rng.categorical(w.weights);
  std::vector<Point> pts;
  for (std::size_t j = 0; j < model.components().size(); ++j) {
    PointPattern part =
        j == chosen ? model.components()[j]->reduced_palm_sample(x, rng) : model.components()[j]->sample(rng);
    pts.insert(pts.end(), part.points().begin(), part.points().end());
  }
  return PointPattern(std::move(pts), model.window());
}

namespace detail {

inline void require_two_components(const SuperposedModel& model) {
  if (model.components().size() != 2) throw InvalidModel("two-point operations require exactly two components");
}

inline void require_pair_in(const Window& w, const Point& x, const Point& y) {
  if (!w.contains(x) || !w.contains(y)) throw OutOfWindow("conditioning point outside the window");
  if (x == y) throw DegenerateConditioning("two-point conditioning requires distinct points");
}

}  // namespace detail

// Four-branch weights for two-point Palm conditioning. Unnormalized:
// u = ( rho_1(x,y), m_1(x) m_2(y), m_1(y) m_2(x), rho_2(x,y) ). All four
// share one denominator, the superposition's rho2(x,y), stored as
// `normalizer`.
inline TwoPointWeights two_point_weights(const SuperposedModel& model, const Point& x, const Point& y) {
  detail::require_two_components(model);
  detail::require_pair_in(model.window(), x, y);
  const ProcessModel& c1 = *model.components()[0];
  const ProcessModel& c2 = *model.components()[1];
  const std::array<double, 4> u = {
      c1.product_density2(x, y),
      c1.intensity(x) * c2.intensity(y),
      c1.intensity(y) * c2.intensity(x),
      c2.product_density2(x, y),
  };
  const double total = ((u[0] + u[1]) + u[2]) + u[3];
  if (total <= 0) throw DegenerateConditioning("two-point weights vanish at this point pair");
  TwoPointWeights w;
  w.w11 = u[0] / total;
  w.w12 = u[1] / total;
  w.w21 = u[2] / total;
  w.w22 = u[3] / total;
  w.normalizer = total;
  const std::array<double, 4> probs = {w.w11, w.w12, w.w21, w.w22};
  detail::check_normalized(probs);
  return w;
}

namespace detail {

// Branch realizations shared by the direct and the chained sampler.
// Branch indices follow TwoPointWeights field order. Parts are drawn in
// component order; both draws are sequenced explicitly.
inline PointPattern realize_two_point_branch(const SuperposedModel& model, std::size_t branch, const Point& x,
                                             const Point& y, RngStream& rng) {
  const ProcessModel& c1 = *model.components()[0];
  const ProcessModel& c2 = *model.components()[1];
  switch (branch) {
    case 0: {
      PointPattern a = c1.reduced_palm2_sample(x, y, rng);
      PointPattern b = c2.sample(rng);
      return superpose(a, b);
    }
    case 1: {
      PointPattern a = c1.reduced_palm_sample(x, rng);
      PointPattern b = c2.reduced_palm_sample(y, rng);
      return superpose(a, b);
    }
    case 2: {
      PointPattern a = c1.reduced_palm_sample(y, rng);
      PointPattern b = c2.reduced_palm_sample(x, rng);
      return superpose(a, b);
    }
    default: {
      PointPattern a = c1.sample(rng);
      PointPattern b = c2.reduced_palm2_sample(x, y, rng);
      return superpose(a, b);
    }
  }
}

}  // namespace detail

// Direct two-point reduced Palm draw: one branch chosen by two_point_weights
// with a single uniform, then independent draws per component. The output
// carries no forced atoms.
inline PointPattern two_point_reduced_palm_sample(const SuperposedModel& model, const Point& x, const Point& y,
                                                  RngStream& rng) {
  const TwoPointWeights w = two_point_weights(model, x, y);
  const std::array<double, 4> probs = {w.w11, w.w12, w.w21, w.w22};
  const std::size_t branch = rng.categorical(probs);
  return detail::realize_two_point_branch(model, branch, x, y, rng);
}

namespace detail {

// Joint branch law of the sequential construction, as a 2x2 table indexed
// by (a, b): a is the component hosting x, b == 0 means y joins that same
// component, b == 1 means y joins the other one. Conditioning at y scales
// row a by that row's conditional total intensity at y, so the joint equals
// m_a(x) * d_ab with d_a0 = rho_a(x,y)/m_a(x) (intensity of the reduced
// component at y) and d_a1 = m_other(y). The products telescope to the
// direct four-branch weights.
inline std::array<std::array<double, 2>, 2> chained_joint_table(const SuperposedModel& model, const Point& x,
                                                                const Point& y) {
  require_two_components(model);
  require_pair_in(model.window(), x, y);
  const ProcessModel& c1 = *model.components()[0];
  const ProcessModel& c2 = *model.components()[1];
  const std::array<const ProcessModel*, 2> comp = {&c1, &c2};
  const std::array<double, 2> mx = {c1.intensity(x), c2.intensity(x)};
  if (mx[0] + mx[1] <= 0) throw ZeroIntensityAtPoint("total intensity vanishes at the first conditioning point");
  std::array<std::array<double, 2>, 2> joint = {{{0, 0}, {0, 0}}};
  for (std::size_t a = 0; a < 2; ++a) {
    if (mx[a] <= 0) continue;
    const double reduced_intensity_at_y = comp[a]->product_density2(x, y) / mx[a];
    const double other_intensity_at_y = comp[1 - a]->intensity(y);
    joint[a][0] = mx[a] * reduced_intensity_at_y;
    joint[a][1] = mx[a] * other_intensity_at_y;
  }
  return joint;
}

}  // namespace detail

// The sequential branch law flattened to the four-branch form, for exact
// comparison against two_point_weights.
inline TwoPointWeights chained_two_point_weights(const SuperposedModel& model, const Point& x, const Point& y) {
  const auto joint = detail::chained_joint_table(model, x, y);
  const double total = ((joint[0][0] + joint[0][1]) + joint[1][1]) + joint[1][0];
  if (total <= 0) throw DegenerateConditioning("two-point weights vanish at this point pair");
  TwoPointWeights w;
  w.w11 = joint[0][0] / total;
  w.w12 = joint[0][1] / total;
  w.w21 = joint[1][1] / total;
  w.w22 = joint[1][0] / total;
  w.normalizer = total;
  return w;
}

// Sequential two-point reduced Palm draw: stage 1 picks the component
// hosting x (its mixture weight rescaled by the conditional total intensity
// at y, which is how Palm conditioning acts on a mixture law), stage 2 picks
// where y goes within the chosen conditional superposition. Two uniforms,
// then the same branch realizations as the direct sampler.
inline PointPattern chained_reduced_palm_sample(const SuperposedModel& model, const Point& x, const Point& y,
                                                RngStream& rng) {
  const auto joint = detail::chained_joint_table(model, x, y);
  const std::array<double, 2> row_sums = {joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]};
  const double total = row_sums[0] + row_sums[1];
  if (total <= 0) throw DegenerateConditioning("two-point weights vanish at this point pair");
  const std::array<double, 2> stage1 = {row_sums[0] / total, row_sums[1] / total};
  const std::size_t a = rng.categorical(stage1);
  const std::array<double, 2> stage2 = {joint[a][0] / row_sums[a], joint[a][1] / row_sums[a]};
  const std::size_t b = rng.categorical(stage2);
  // (a, b) -> branch index in TwoPointWeights order.
  const std::size_t branch = a == 0 ? (b == 0 ? 0 : 1) : (b == 0 ? 3 : 2);
  return detail::realize_two_point_branch(model, branch, x, y, rng);
}

inline PointPattern SuperposedModel::palm_sample(const Point& x, RngStream& rng) const {
  return palm_sample_superposition(*this, x, rng);
}

inline PointPattern SuperposedModel::reduced_palm_sample(const Point& x, RngStream& rng) const {
  return reduced_palm_sample_superposition(*this, x, rng);
}

inline PointPattern SuperposedModel::reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const {
  return two_point_reduced_palm_sample(*this, x, y, rng);
}

}  // namespace palmix
