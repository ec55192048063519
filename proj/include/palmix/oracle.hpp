// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/parallel.hpp"
#include "palmix/pattern.hpp"
#include "palmix/pmf.hpp"
#include "palmix/rng.hpp"

namespace palmix {

using CountStatistic = std::function<std::uint32_t(const PointPattern&)>;

inline CountStatistic count_in_statistic(const Region& region) {
  return [region](const PointPattern& p) { return static_cast<std::uint32_t>(count_in(p, region)); };
}

// Empirical Campbell measure at desk scale: plain samples of the process
// paired with their conditioning weights.
struct WeightedEnsemble {
  std::vector<std::pair<PointPattern, double>> entries;
  double total_weight = 0;
};

struct OracleOptions {
  std::size_t n_reps = 100000;
  unsigned threads = 1;
  // Reduced variant: the statistic sees the pattern with the conditioning
  // point(s) removed (the in-ball point nearest each ball center).
  bool reduced = false;
};

struct OracleResult {
  CountPmf pmf;
  double total_weight = 0;
  std::size_t positive_replicates = 0;
};

namespace detail {

// Index of the in-ball point nearest to the center; first such index wins
// ties. The caller guarantees the ball is nonempty.
inline std::size_t nearest_in_ball(const PointPattern& pattern, const Point& center, double epsilon) {
  std::size_t best = pattern.points().size();
  double best_d2 = 0;
  const double eps2 = epsilon * epsilon;
  for (std::size_t i = 0; i < pattern.points().size(); ++i) {
    const double d2 = squared_distance(pattern.points()[i], center);
    if (d2 <= eps2 && (best == pattern.points().size() || d2 < best_d2)) {
      best = i;
      best_d2 = d2;
    }
  }
  if (best == pattern.points().size()) throw AtomNotFound("no point inside the weighting ball");
  return best;
}

inline void require_ball_in_window(const Window& w, const Point& x, double epsilon) {
  if (!(epsilon > 0)) throw PalmixError("epsilon must be > 0");
  if (!Region::ball(x, epsilon).inside(w)) throw OutOfWindow("weighting ball leaves the window");
}

inline OracleResult merge_weighted_draws(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& draws) {
  std::vector<std::uint32_t> values(draws.size());
  std::vector<double> weights(draws.size());
  double total = 0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    values[i] = draws[i].first;
    weights[i] = static_cast<double>(draws[i].second);
    total += weights[i];
    if (draws[i].second > 0) ++positive;
  }
  return OracleResult{CountPmf::from_weighted_counts(values, weights), total, positive};
}

}  // namespace detail

// Local Palm estimator by Campbell weighting: each plain sample of the
// process is weighted by its point count inside ball(x, epsilon), and the
// weighted law of the statistic estimates the statistic's law under the
// Palm version at x, averaged over the ball. No Palm sampler is consulted;
// this is the model-agnostic ground truth the analytic samplers are tested
// against. Replicate i uses rng.substream(i).
inline OracleResult palm_weighting_oracle(const ProcessModel& model, const Point& x, double epsilon,
                                          const CountStatistic& statistic, const OracleOptions& opts,
                                          const RngStream& rng) {
  detail::require_ball_in_window(model.window(), x, epsilon);
  if (opts.n_reps < 1) throw EmptyInput("oracle needs at least one replicate");
  const Region ball = Region::ball(x, epsilon);
  auto draws = replicate_map<std::pair<std::uint32_t, std::uint32_t>>(
      opts.n_reps, opts.threads, rng, [&](RngStream& stream, std::size_t) {
        PointPattern pat = model.sample(stream);
        const std::uint64_t w = count_in(pat, ball);
        if (w == 0) return std::pair<std::uint32_t, std::uint32_t>{0u, 0u};
        std::uint32_t value;
        if (opts.reduced) {
          value = statistic(remove_index(pat, detail::nearest_in_ball(pat, x, epsilon)));
        } else {
          value = statistic(pat);
        }
        return std::pair<std::uint32_t, std::uint32_t>{value, static_cast<std::uint32_t>(w)};
      });
  return detail::merge_weighted_draws(draws);
}

// Second-order variant: weights are factorial pair counts across two
// disjoint balls, estimating the two-point Palm law at (x, y). The reduced
// variant removes the point nearest each center, one per ball.
inline OracleResult two_point_weighting_oracle(const ProcessModel& model, const Point& x, const Point& y,
                                               double epsilon, const CountStatistic& statistic,
                                               const OracleOptions& opts, const RngStream& rng) {
  detail::require_ball_in_window(model.window(), x, epsilon);
  detail::require_ball_in_window(model.window(), y, epsilon);
  if (squared_distance(x, y) <= 4 * epsilon * epsilon)
    throw DegenerateConditioning("weighting balls must be disjoint");
  if (opts.n_reps < 1) throw EmptyInput("oracle needs at least one replicate");
  const Region ball_x = Region::ball(x, epsilon);
  const Region ball_y = Region::ball(y, epsilon);
  auto draws = replicate_map<std::pair<std::uint32_t, std::uint32_t>>(
      opts.n_reps, opts.threads, rng, [&](RngStream& stream, std::size_t) {
        PointPattern pat = model.sample(stream);
        const std::uint64_t w = factorial_power_count(pat, {ball_x, ball_y});
        if (w == 0) return std::pair<std::uint32_t, std::uint32_t>{0u, 0u};
        std::uint32_t value;
        if (opts.reduced) {
          std::size_t ix = detail::nearest_in_ball(pat, x, epsilon);
          std::size_t iy = detail::nearest_in_ball(pat, y, epsilon);
          if (ix < iy) std::swap(ix, iy);
          value = statistic(remove_index(remove_index(pat, ix), iy));
        } else {
          value = statistic(pat);
        }
        return std::pair<std::uint32_t, std::uint32_t>{value, static_cast<std::uint32_t>(w)};
      });
  return detail::merge_weighted_draws(draws);
}

// Materialized form of the oracle's weighted ensemble, for small runs.
inline WeightedEnsemble collect_weighted_ensemble(const ProcessModel& model, const Point& x, double epsilon,
                                                  const OracleOptions& opts, const RngStream& rng) {
  detail::require_ball_in_window(model.window(), x, epsilon);
  if (opts.n_reps < 1) throw EmptyInput("oracle needs at least one replicate");
  const Region ball = Region::ball(x, epsilon);
  auto entries = replicate_map<std::pair<PointPattern, double>>(
      opts.n_reps, opts.threads, rng, [&](RngStream& stream, std::size_t) {
        PointPattern pat = model.sample(stream);
        const double w = static_cast<double>(count_in(pat, ball));
        return std::pair<PointPattern, double>{std::move(pat), w};
      });
  WeightedEnsemble ensemble;
  for (auto& e : entries) ensemble.total_weight += e.second;
  if (ensemble.total_weight <= 0) throw ZeroTotalWeight("all ensemble weights are zero");
  ensemble.entries = std::move(entries);
  return ensemble;
}

// Empirical law of a count statistic under any sampler closure. Replicate i
// uses rng.substream(i); sampler(stream) must return a full pattern.
template <typename Sampler>
std::vector<std::uint32_t> sampler_counts(std::size_t n_reps, unsigned threads, const RngStream& rng,
                                          const CountStatistic& statistic, Sampler&& sampler) {
  if (n_reps < 1) throw EmptyInput("sampler law needs at least one replicate");
  return replicate_map<std::uint32_t>(n_reps, threads, rng, [&](RngStream& stream, std::size_t) {
    return statistic(sampler(stream));
  });
}

template <typename Sampler>
CountPmf sampler_pmf(std::size_t n_reps, unsigned threads, const RngStream& rng, const CountStatistic& statistic,
                     Sampler&& sampler) {
  const auto counts = sampler_counts(n_reps, threads, rng, statistic, sampler);
  return CountPmf::from_counts(counts);
}

}  // namespace palmix
