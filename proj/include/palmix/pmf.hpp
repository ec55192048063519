// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"

namespace palmix {

// Probability mass function on nonnegative integer counts, dense from 0 to
// its support bound. Probabilities sum to 1 up to accumulation error.
class CountPmf {
 public:
  // Weighted empirical pmf: mass of count k is the total weight of entries
  // with value k, normalized. Accumulation runs in entry order.
  static CountPmf from_weighted_counts(std::span<const std::uint32_t> counts, std::span<const double> weights) {
    if (counts.size() != weights.size()) throw EmptyInput("counts and weights must have equal length");
    if (counts.empty()) throw EmptyInput("empirical pmf needs at least one entry");
    std::uint32_t max_count = 0;
    for (std::uint32_t c : counts) max_count = c > max_count ? c : max_count;
    std::vector<double> mass(static_cast<std::size_t>(max_count) + 1, 0.0);
    double total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (!(weights[i] >= 0)) throw PalmixError("pmf weights must be >= 0");
      mass[counts[i]] += weights[i];
      total += weights[i];
    }
    if (total <= 0) throw ZeroTotalWeight("all pmf weights are zero");
    for (double& m : mass) m /= total;
    return CountPmf(std::move(mass));
  }

  static CountPmf from_counts(std::span<const std::uint32_t> counts) {
    std::vector<double> ones(counts.size(), 1.0);
    return from_weighted_counts(counts, ones);
  }

  // Poisson pmf truncated at the 1 - 1e-9 quantile, tail mass folded into
  // the last bucket. Terms are computed in log space, so large means stay
  // finite.
  static CountPmf poisson(double mean) {
    if (!(mean >= 0) || !std::isfinite(mean)) throw PalmixError("Poisson pmf mean must be finite and >= 0");
    if (mean == 0) return CountPmf({1.0});
    const double log_mean = std::log(mean);
    std::vector<double> mass;
    double cum = 0;
    for (std::size_t k = 0;; ++k) {
      const double p = std::exp(static_cast<double>(k) * log_mean - mean - std::lgamma(static_cast<double>(k) + 1));
      mass.push_back(p);
      cum += p;
      if (cum >= 1.0 - 1e-9) break;
      if (k > 100000000) throw PalmixError("Poisson pmf truncation did not converge");
    }
    const double tail = 1.0 - cum;
    if (tail > 0) mass.back() += tail;
    return CountPmf(std::move(mass));
  }

  double prob(std::size_t k) const { return k < probs_.size() ? probs_[k] : 0.0; }
  std::size_t support_bound() const { return probs_.size() - 1; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  explicit CountPmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw EmptyInput("pmf must have nonempty support");
  }

  std::vector<double> probs_;
};

// Half the L1 distance over the union support.
inline double tv_distance(const CountPmf& p, const CountPmf& q) {
  const std::size_t bound = p.support_bound() > q.support_bound() ? p.support_bound() : q.support_bound();
  double l1 = 0;
  for (std::size_t k = 0; k <= bound; ++k) l1 += std::abs(p.prob(k) - q.prob(k));
  return 0.5 * l1;
}

}  // namespace palmix
