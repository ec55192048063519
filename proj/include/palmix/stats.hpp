// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "palmix/errors.hpp"

namespace palmix {

struct MeanSe {
  double mean = 0;
  double se = 0;
};

// Sample mean and its standard error (two-pass variance, n - 1 denominator).
inline MeanSe mean_and_se(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInput("mean of an empty sample");
  const double n = static_cast<double>(xs.size());
  double sum = 0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

struct KsResult {
  double statistic = 0;
  double p_value = 0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. The
// supremum is taken after consuming every sample tied at a given value, so
// heavily tied integer data is handled correctly (the test is then
// conservative, which suits a same-law check).
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptyInput("KS test needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0;
  while (i < sa.size() || j < sb.size()) {
    double v;
    if (i < sa.size() && j < sb.size()) {
      v = sa[i] < sb[j] ? sa[i] : sb[j];
    } else if (i < sa.size()) {
      v = sa[i];
    } else {
      v = sb[j];
    }
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    const double gap = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    d = gap > d ? gap : d;
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // Alternating tail series; when it fails to converge (lambda near 0) the
  // limit is 1.
  const double a2 = -2.0 * lambda * lambda;
  double p = 1.0;
  double fac = 2.0;
  double sum = 0.0;
  double term_before = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = fac * std::exp(a2 * static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) <= 0.001 * term_before || std::abs(term) <= 1e-10 * std::abs(sum)) {
      p = sum;
      break;
    }
    fac = -fac;
    term_before = std::abs(term);
  }
  p = p < 0 ? 0.0 : (p > 1 ? 1.0 : p);
  return {d, p};
}

// Two-sided z-comparison of two estimates with independent errors.
struct CheckReport {
  double lhs = 0;
  double rhs = 0;
  double se_lhs = 0;
  double se_rhs = 0;
  double z_score = 0;
  bool pass = false;

  static CheckReport from(double lhs, double se_lhs, double rhs, double se_rhs, double z_crit) {
    CheckReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.se_lhs = se_lhs;
    r.se_rhs = se_rhs;
    const double denom = std::hypot(se_lhs, se_rhs);
    const double diff = lhs - rhs;
    if (denom == 0) {
      r.z_score = diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      r.z_score = diff / denom;
    }
    r.pass = std::abs(diff) <= z_crit * denom || diff == 0;
    return r;
  }
};

}  // namespace palmix
