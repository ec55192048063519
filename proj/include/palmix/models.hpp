// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/pattern.hpp"
#include "palmix/rng.hpp"

namespace palmix {

namespace detail {

// Draws a Poisson pattern with intensity rate(x), realized as a homogeneous
// proposal at rate_max thinned by rate(x)/rate_max. Each proposal consumes
// dim coordinates, then one thinning uniform in the inhomogeneous case, so
// stream consumption is a fixed function of the proposal count.
inline PointPattern poisson_points(const Window& w, bool homogeneous, double rate,
                                   const IntensityFn& rate_fn, double rate_max, RngStream& rng) {
  const double proposal_rate = homogeneous ? rate : rate_max;
  const std::uint64_t n = rng.poisson(proposal_rate * w.volume());
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Point p = rng.uniform_in(w);
    if (homogeneous) {
      pts.push_back(p);
      continue;
    }
    const double r = rate_fn(p);
    if (!(r >= 0) || !std::isfinite(r)) throw InvalidModel("intensity function must be finite and >= 0");
    if (r > rate_max) throw InvalidModel("intensity function exceeds its stated bound");
    if (rng.uniform() * rate_max < r) pts.push_back(p);
  }
  return PointPattern(std::move(pts), w);
}

}  // namespace detail

// Poisson process, homogeneous or inhomogeneous via thinning against a
// user-supplied bound. Its reduced Palm version is the process itself, so
// both Palm samplers and the two-point reduced Palm are exact.
class PoissonModel : public ProcessModel {
 public:
  PoissonModel(Window window, double rate) : window_(std::move(window)), homogeneous_(true), rate_(rate) {
    if (!(rate >= 0) || !std::isfinite(rate)) throw InvalidModel("Poisson rate must be finite and >= 0");
  }

  PoissonModel(Window window, IntensityFn rate_fn, double rate_max)
      : window_(std::move(window)), homogeneous_(false), rate_fn_(std::move(rate_fn)), rate_max_(rate_max) {
    if (!rate_fn_) throw InvalidModel("Poisson intensity function must be callable");
    if (!(rate_max >= 0) || !std::isfinite(rate_max)) throw InvalidModel("Poisson rate bound must be finite and >= 0");
  }

  const Window& window() const override { return window_; }

  PointPattern sample(RngStream& rng) const override {
    return detail::poisson_points(window_, homogeneous_, rate_, rate_fn_, rate_max_, rng);
  }

  double intensity(const Point& x) const override {
    require_in_window(x);
    return rate_at(x);
  }

  bool has_analytic_palm() const override { return true; }

  PointPattern palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    return add_atom(sample(rng), x);
  }

  PointPattern reduced_palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    return sample(rng);
  }

  bool has_product_density2() const override { return true; }

  double product_density2(const Point& x, const Point& y) const override {
    require_pair(x, y);
    return rate_at(x) * rate_at(y);
  }

  bool has_reduced_palm2() const override { return true; }

  PointPattern reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const override {
    require_pair(x, y);
    return sample(rng);
  }

 private:
  double rate_at(const Point& x) const {
    if (homogeneous_) return rate_;
    const double r = rate_fn_(x);
    if (!(r >= 0) || !std::isfinite(r)) throw InvalidModel("intensity function must be finite and >= 0");
    if (r > rate_max_) throw InvalidModel("intensity function exceeds its stated bound");
    return r;
  }

  Window window_;
  bool homogeneous_;
  double rate_ = 0;
  IntensityFn rate_fn_;
  double rate_max_ = 0;
};

// Fixed-count process of n i.i.d. points with density f (uniform default).
// Because the points are exchangeable and independent, its reduced Palm at
// one (resp. two) conditioning points is the same process with n-1 (resp.
// n-2) points.
class BinomialModel : public ProcessModel {
 public:
  BinomialModel(Window window, std::uint64_t n)
      : window_(std::move(window)), n_(n), uniform_(true), uniform_density_(1.0 / window_.volume()) {}

  BinomialModel(Window window, std::uint64_t n, DensityFn density, double density_max)
      : window_(std::move(window)),
        n_(n),
        uniform_(false),
        uniform_density_(1.0 / window_.volume()),
        density_fn_(std::move(density)),
        density_max_(density_max) {
    if (!density_fn_) throw InvalidModel("Binomial density function must be callable");
    if (!(density_max > 0) || !std::isfinite(density_max)) throw InvalidModel("Binomial density bound must be finite and > 0");
  }

  const Window& window() const override { return window_; }

  std::uint64_t n() const { return n_; }

  double density(const Point& x) const {
    require_in_window(x);
    return density_at(x);
  }

  PointPattern sample(RngStream& rng) const override { return sample_k(n_, rng); }

  // k i.i.d. points from f; rejection against the uniform proposal in the
  // non-uniform case. One coordinate block per proposal, plus one acceptance
  // uniform when rejecting.
  PointPattern sample_k(std::uint64_t k, RngStream& rng) const {
    std::vector<Point> pts;
    pts.reserve(k);
    while (pts.size() < k) {
      Point p = rng.uniform_in(window_);
      if (uniform_) {
        pts.push_back(p);
        continue;
      }
      const double f = density_at(p);
      if (rng.uniform() * density_max_ < f) pts.push_back(p);
    }
    return PointPattern(std::move(pts), window_);
  }

  double intensity(const Point& x) const override {
    require_in_window(x);
    return static_cast<double>(n_) * density_at(x);
  }

  bool has_analytic_palm() const override { return true; }

  PointPattern palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    if (n_ == 0) throw ZeroIntensityAtPoint("Palm conditioning of an empty Binomial process");
    return add_atom(sample_k(n_ - 1, rng), x);
  }

  PointPattern reduced_palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    if (n_ == 0) throw ZeroIntensityAtPoint("Palm conditioning of an empty Binomial process");
    return sample_k(n_ - 1, rng);
  }

  bool has_product_density2() const override { return true; }

  double product_density2(const Point& x, const Point& y) const override {
    require_pair(x, y);
    return static_cast<double>(n_) * static_cast<double>(n_ > 0 ? n_ - 1 : 0) * density_at(x) * density_at(y);
  }

  bool has_reduced_palm2() const override { return true; }

  PointPattern reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const override {
    require_pair(x, y);
    if (n_ < 2) throw DegenerateConditioning("two-point Palm conditioning requires n >= 2");
    return sample_k(n_ - 2, rng);
  }

 private:
  double density_at(const Point& x) const {
    if (uniform_) return uniform_density_;
    const double f = density_fn_(x);
    if (!(f >= 0) || !std::isfinite(f)) throw InvalidModel("density function must be finite and >= 0");
    if (f > density_max_) throw InvalidModel("density function exceeds its stated bound");
    return f;
  }

  Window window_;
  std::uint64_t n_;
  bool uniform_;
  double uniform_density_;
  DensityFn density_fn_;
  double density_max_ = 0;
};

// One atom of the finite mixing law of a mixed Poisson process: the base
// intensity is scaled by rate_factor with probability prob.
struct MixingAtom {
  double rate_factor = 0;
  double prob = 0;
};

// Cox process whose random intensity is rate_factor * base(x), with the
// factor drawn from a finite discrete law. Palm conditioning size-biases
// the mixing law; two-point conditioning tilts it by the squared factor.
// Both tilted laws are precomputed exactly.
class MixedPoissonModel : public ProcessModel {
 public:
  MixedPoissonModel(Window window, double base_rate, std::vector<MixingAtom> mixing)
      : window_(std::move(window)), homogeneous_(true), base_rate_(base_rate), mixing_(std::move(mixing)) {
    if (!(base_rate >= 0) || !std::isfinite(base_rate)) throw InvalidModel("base rate must be finite and >= 0");
    init_mixing();
  }

  MixedPoissonModel(Window window, IntensityFn base_fn, double base_max, std::vector<MixingAtom> mixing)
      : window_(std::move(window)),
        homogeneous_(false),
        base_fn_(std::move(base_fn)),
        base_max_(base_max),
        mixing_(std::move(mixing)) {
    if (!base_fn_) throw InvalidModel("base intensity function must be callable");
    if (!(base_max >= 0) || !std::isfinite(base_max)) throw InvalidModel("base rate bound must be finite and >= 0");
    init_mixing();
  }

  const Window& window() const override { return window_; }

  const std::vector<MixingAtom>& mixing() const { return mixing_; }
  double mean_mixing() const { return mean_mixing_; }
  double second_moment_mixing() const { return second_moment_mixing_; }
  const std::vector<double>& size_biased_probs() const { return size_biased_probs_; }
  const std::vector<double>& pair_tilted_probs() const { return pair_tilted_probs_; }

  PointPattern sample(RngStream& rng) const override {
    const std::size_t i = rng.categorical(mixing_probs_);
    return scaled_poisson(mixing_[i].rate_factor, rng);
  }

  double intensity(const Point& x) const override {
    require_in_window(x);
    return mean_mixing_ * base_at(x);
  }

  bool has_analytic_palm() const override { return true; }

  PointPattern palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    if (mean_mixing_ <= 0) throw ZeroIntensityAtPoint("Palm conditioning of an a.s. empty mixed Poisson process");
    const std::size_t i = rng.categorical(size_biased_probs_);
    return add_atom(scaled_poisson(mixing_[i].rate_factor, rng), x);
  }

  PointPattern reduced_palm_sample(const Point& x, RngStream& rng) const override {
    require_in_window(x);
    if (mean_mixing_ <= 0) throw ZeroIntensityAtPoint("Palm conditioning of an a.s. empty mixed Poisson process");
    const std::size_t i = rng.categorical(size_biased_probs_);
    return scaled_poisson(mixing_[i].rate_factor, rng);
  }

  bool has_product_density2() const override { return true; }

  double product_density2(const Point& x, const Point& y) const override {
    require_pair(x, y);
    return second_moment_mixing_ * base_at(x) * base_at(y);
  }

  bool has_reduced_palm2() const override { return true; }

  PointPattern reduced_palm2_sample(const Point& x, const Point& y, RngStream& rng) const override {
    require_pair(x, y);
    if (second_moment_mixing_ <= 0) throw DegenerateConditioning("two-point Palm conditioning of an a.s. empty mixed Poisson process");
    const std::size_t i = rng.categorical(pair_tilted_probs_);
    return scaled_poisson(mixing_[i].rate_factor, rng);
  }

 private:
  void init_mixing() {
    if (mixing_.empty()) throw InvalidModel("mixing law needs at least one atom");
    double total = 0;
    for (const auto& atom : mixing_) {
      if (!(atom.rate_factor >= 0) || !std::isfinite(atom.rate_factor)) throw InvalidModel("mixing rate factor must be finite and >= 0");
      if (!(atom.prob >= 0) || !std::isfinite(atom.prob)) throw InvalidModel("mixing probability must be finite and >= 0");
      total += atom.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidModel("mixing probabilities must sum to 1");
    mixing_probs_.reserve(mixing_.size());
    for (const auto& atom : mixing_) {
      mixing_probs_.push_back(atom.prob);
      mean_mixing_ += atom.rate_factor * atom.prob;
      second_moment_mixing_ += atom.rate_factor * atom.rate_factor * atom.prob;
    }
    if (mean_mixing_ > 0) {
      for (const auto& atom : mixing_) size_biased_probs_.push_back(atom.rate_factor * atom.prob / mean_mixing_);
    }
    if (second_moment_mixing_ > 0) {
      for (const auto& atom : mixing_) pair_tilted_probs_.push_back(atom.rate_factor * atom.rate_factor * atom.prob / second_moment_mixing_);
    }
  }

  double base_at(const Point& x) const {
    if (homogeneous_) return base_rate_;
    const double r = base_fn_(x);
    if (!(r >= 0) || !std::isfinite(r)) throw InvalidModel("base intensity function must be finite and >= 0");
    if (r > base_max_) throw InvalidModel("base intensity function exceeds its stated bound");
    return r;
  }

  PointPattern scaled_poisson(double factor, RngStream& rng) const {
    if (factor == 0) return PointPattern({}, window_);
    return detail::poisson_points(window_, homogeneous_, factor * base_rate_, base_fn_, factor * base_max_, rng);
  }

  Window window_;
  bool homogeneous_;
  double base_rate_ = 0;
  IntensityFn base_fn_;
  double base_max_ = 0;
  std::vector<MixingAtom> mixing_;
  std::vector<double> mixing_probs_;
  std::vector<double> size_biased_probs_;
  std::vector<double> pair_tilted_probs_;
  double mean_mixing_ = 0;
  double second_moment_mixing_ = 0;
};

// Thomas cluster process: Poisson parents at rate parent_rate, each with a
// Poisson(mean_offspring) number of children displaced by isotropic Gaussian
// noise of scale sigma. Parents live on the window dilated by 4*sigma per
// side and children are clipped to the window, which keeps edge bias below
// Monte Carlo noise at the shipped parameter scales. No closed-form Palm or
// second product density is exposed; Palm draws for this model come from the
// empirical oracle or from superposition mixtures.
class ThomasClusterModel : public ProcessModel {
 public:
  ThomasClusterModel(Window window, double parent_rate, double mean_offspring, double sigma)
      : window_(std::move(window)),
        parent_rate_(checked_positive(parent_rate, "parent rate")),
        mean_offspring_(checked_positive(mean_offspring, "mean offspring")),
        sigma_(checked_positive(sigma, "offspring scale")),
        extended_(make_extended(window_, sigma_)) {}

  const Window& window() const override { return window_; }
  double parent_rate() const { return parent_rate_; }
  double mean_offspring() const { return mean_offspring_; }
  double sigma() const { return sigma_; }
  // Per-side enlargement of the parent window, in units of sigma.
  static constexpr double dilation_factor() { return 4.0; }

  PointPattern sample(RngStream& rng) const override {
    const std::uint64_t parents = rng.poisson(parent_rate_ * extended_.volume());
    std::vector<Point> pts;
    for (std::uint64_t i = 0; i < parents; ++i) {
      const Point parent = rng.uniform_in(extended_);
      const std::uint64_t kids = rng.poisson(mean_offspring_);
      for (std::uint64_t j = 0; j < kids; ++j) {
        std::array<double, 3> c{};
        for (int a = 0; a < window_.dim(); ++a) c[static_cast<std::size_t>(a)] = parent[a] + sigma_ * rng.normal();
        Point child(std::span<const double>(c.data(), static_cast<std::size_t>(window_.dim())));
        if (window_.contains(child)) pts.push_back(child);
      }
    }
    return PointPattern(std::move(pts), window_);
  }

  double intensity(const Point& x) const override {
    require_in_window(x);
    return parent_rate_ * mean_offspring_;
  }

  bool has_analytic_palm() const override { return false; }
  bool has_product_density2() const override { return false; }

 private:
  static double checked_positive(double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw InvalidModel(std::string(what) + " must be finite and > 0");
    return v;
  }

  static Window make_extended(const Window& w, double sigma) {
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    const double pad = dilation_factor() * sigma;
    for (int i = 0; i < w.dim(); ++i) {
      lo[static_cast<std::size_t>(i)] = w.lower()[i] - pad;
      hi[static_cast<std::size_t>(i)] = w.upper()[i] + pad;
    }
    const auto d = static_cast<std::size_t>(w.dim());
    return Window(Point(std::span<const double>(lo.data(), d)), Point(std::span<const double>(hi.data(), d)));
  }

  Window window_;
  double parent_rate_;
  double mean_offspring_;
  double sigma_;
  Window extended_;
};

}  // namespace palmix
