// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/parallel.hpp"
#include "palmix/pattern.hpp"
#include "palmix/rng.hpp"
#include "palmix/stats.hpp"

namespace palmix {

using PointFn = std::function<double(const Point&)>;
using PatternFn = std::function<double(const PointPattern&)>;

// Tensor midpoint grid over a box. Node order is row-major with the last
// axis fastest; quadrature sums run in node order, so results are
// reproducible bit for bit.
struct QuadratureGrid {
  std::vector<Point> nodes;
  double cell_volume = 0;
};

inline QuadratureGrid midpoint_grid(const Window& box, std::size_t node_budget) {
  if (node_budget < 1) throw EmptyInput("quadrature needs a positive node budget");
  const int d = box.dim();
  std::size_t per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(node_budget), 1.0 / d)));
  if (per_axis < 1) per_axis = 1;
  if (per_axis > 64) per_axis = 64;
  QuadratureGrid grid;
  grid.cell_volume = box.volume();
  std::array<std::size_t, 3> idx{};
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    grid.cell_volume /= static_cast<double>(per_axis);
    total *= per_axis;
  }
  grid.nodes.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int a = d - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = rest % per_axis;
      rest /= per_axis;
    }
    std::array<double, 3> c{};
    for (int a = 0; a < d; ++a) {
      const double h = box.extent(a) / static_cast<double>(per_axis);
      c[static_cast<std::size_t>(a)] = box.lower()[a] + (static_cast<double>(idx[static_cast<std::size_t>(a)]) + 0.5) * h;
    }
    grid.nodes.emplace_back(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
  }
  return grid;
}

// Integral of the intensity over a region by midpoint quadrature. Boxes use
// a tensor grid; balls use the centroid rule (one evaluation at the center),
// which is exact whenever the intensity is affine.
inline double integral_of_intensity(const ProcessModel& model, const Region& region, std::size_t node_budget = 4096) {
  if (!region.inside(model.window())) throw OutOfWindow("integration region leaves the window");
  if (region.is_ball()) return model.intensity(region.center()) * region.volume();
  const QuadratureGrid grid = midpoint_grid(Window(region.lower(), region.upper()), node_budget);
  double total = 0;
  for (const Point& node : grid.nodes) total += model.intensity(node);
  return total * grid.cell_volume;
}

// Integral of the second product density over box x box. Diagonal node
// pairs are evaluated at an offset of 1e-9 of the box extent on axis 0;
// the densities here extend continuously to the diagonal, so the error is
// negligible against Monte Carlo noise. Ball regions are not supported.
inline double integral_of_product_density2(const ProcessModel& model, const Region& region,
                                           std::size_t node_budget = 1u << 20) {
  if (region.is_ball()) throw PalmixError("pair integrals support box regions only");
  if (!region.inside(model.window())) throw OutOfWindow("integration region leaves the window");
  const Window box(region.lower(), region.upper());
  std::size_t per_factor_budget = 1;
  {
    const double root = std::sqrt(static_cast<double>(node_budget));
    per_factor_budget = static_cast<std::size_t>(std::floor(root));
    if (per_factor_budget < 1) per_factor_budget = 1;
  }
  std::size_t per_axis = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(per_factor_budget), 1.0 / box.dim())));
  if (per_axis < 1) per_axis = 1;
  if (per_axis > 32) per_axis = 32;
  std::size_t total_nodes = 1;
  for (int a = 0; a < box.dim(); ++a) total_nodes *= per_axis;
  const QuadratureGrid grid = midpoint_grid(box, total_nodes);
  const double delta = 1e-9 * box.extent(0);
  double total = 0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
      if (i == j) {
        const Point& x = grid.nodes[i];
        std::array<double, 3> c{};
        for (int a = 0; a < box.dim(); ++a) c[static_cast<std::size_t>(a)] = x[a];
        c[0] = x[0] + delta <= box.upper()[0] ? x[0] + delta : x[0] - delta;
        const Point shifted(std::span<const double>(c.data(), static_cast<std::size_t>(box.dim())));
        total += model.product_density2(x, shifted);
      } else {
        total += model.product_density2(grid.nodes[i], grid.nodes[j]);
      }
    }
  }
  return total * grid.cell_volume * grid.cell_volume;
}

struct FunctionalCheckOptions {
  std::size_t n_reps = 100000;
  std::size_t palm_reps_per_node = 100;
  std::size_t node_budget = 4096;
  double t_step = 1e-3;
  double z_crit = 4;
  unsigned threads = 1;
};

namespace detail {

inline double pattern_sum(const PointPattern& pattern, const PointFn& f) {
  double s = 0;
  for (const Point& p : pattern.points()) s += f(p);
  return s;
}

// Per-node Palm estimate of a pattern functional: mean and se over
// palm_reps draws of h(Palm version at the node). Node k uses
// rng.substream(k), replicate r within it uses substream(r).
inline std::vector<MeanSe> palm_node_estimates(const ProcessModel& model, const QuadratureGrid& grid,
                                               const PatternFn& h, std::size_t palm_reps, unsigned threads,
                                               const RngStream& rng) {
  return replicate_map<MeanSe>(grid.nodes.size(), threads, rng, [&](RngStream& node_stream, std::size_t k) {
    std::vector<double> values(palm_reps);
    for (std::size_t r = 0; r < palm_reps; ++r) {
      RngStream rep = node_stream.substream(r);
      values[r] = h(model.palm_sample(grid.nodes[k], rep));
    }
    return mean_and_se(values);
  });
}

}  // namespace detail

// Two-sided check of the identity
//   E[sum_{X in Phi} g(X) h(Phi)] = integral of g(x) E[h(Phi_x)] m(x) dx.
// The left side is a plain Monte Carlo mean; the right side pairs midpoint
// quadrature with per-node Palm estimates of E[h(Phi_x)]. Substream layout:
// 0 -> left replicates, 1 -> quadrature nodes.
inline CheckReport campbell_check(const ProcessModel& model, const PointFn& g, const PatternFn& h,
                                  const FunctionalCheckOptions& opts, const RngStream& rng) {
  if (!model.has_analytic_palm()) throw NoAnalyticPalm("the right side needs an analytic Palm sampler");
  if (opts.n_reps < 1 || opts.palm_reps_per_node < 1) throw EmptyInput("check needs at least one replicate");
  const auto lhs_values = replicate_map<double>(opts.n_reps, opts.threads, rng.substream(0),
                                                [&](RngStream& stream, std::size_t) {
                                                  const PointPattern pat = model.sample(stream);
                                                  return detail::pattern_sum(pat, g) * h(pat);
                                                });
  const MeanSe lhs = mean_and_se(lhs_values);

  const QuadratureGrid grid = midpoint_grid(model.window(), opts.node_budget);
  const auto node_means =
      detail::palm_node_estimates(model, grid, h, opts.palm_reps_per_node, opts.threads, rng.substream(1));
  double rhs = 0;
  double rhs_var = 0;
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const double factor = g(grid.nodes[k]) * model.intensity(grid.nodes[k]) * grid.cell_volume;
    rhs += factor * node_means[k].mean;
    rhs_var += factor * factor * node_means[k].se * node_means[k].se;
  }
  return CheckReport::from(lhs.mean, lhs.se, rhs, std::sqrt(rhs_var), opts.z_crit);
}

// Monte Carlo Laplace functional estimate: mean of exp(-Phi(f)).
inline MeanSe laplace_estimate(const ProcessModel& model, const PointFn& f, std::size_t n_reps, unsigned threads,
                               const RngStream& rng) {
  if (n_reps < 1) throw EmptyInput("estimate needs at least one replicate");
  const auto values = replicate_map<double>(n_reps, threads, rng, [&](RngStream& stream, std::size_t) {
    return std::exp(-detail::pattern_sum(model.sample(stream), f));
  });
  return mean_and_se(values);
}

// Two-sided check of the derivative characterization
//   d/dt L(f + t g) at t = 0  =  - integral of g(x) L_x(f) m(x) dx,
// where L_x is the Laplace functional of the Palm version at x. The left
// side is a central difference sharing one pattern per replicate across
// both evaluations (common random numbers); the right side mirrors
// campbell_check with h = exp(-Phi(f)).
inline CheckReport laplace_derivative_check(const ProcessModel& model, const PointFn& f, const PointFn& g,
                                            const FunctionalCheckOptions& opts, const RngStream& rng) {
  if (!model.has_analytic_palm()) throw NoAnalyticPalm("the right side needs an analytic Palm sampler");
  if (opts.n_reps < 1 || opts.palm_reps_per_node < 1) throw EmptyInput("check needs at least one replicate");
  if (!(opts.t_step > 0)) throw PalmixError("t_step must be > 0");
  const double t = opts.t_step;
  const auto lhs_values =
      replicate_map<double>(opts.n_reps, opts.threads, rng.substream(0), [&](RngStream& stream, std::size_t) {
        const PointPattern pat = model.sample(stream);
        const double sf = detail::pattern_sum(pat, f);
        const double sg = detail::pattern_sum(pat, g);
        return (std::exp(-(sf + t * sg)) - std::exp(-(sf - t * sg))) / (2 * t);
      });
  const MeanSe lhs = mean_and_se(lhs_values);

  const QuadratureGrid grid = midpoint_grid(model.window(), opts.node_budget);
  const PatternFn laplace_of_f = [&f](const PointPattern& pat) { return std::exp(-detail::pattern_sum(pat, f)); };
  const auto node_means =
      detail::palm_node_estimates(model, grid, laplace_of_f, opts.palm_reps_per_node, opts.threads, rng.substream(1));
  double rhs = 0;
  double rhs_var = 0;
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const double factor = -g(grid.nodes[k]) * model.intensity(grid.nodes[k]) * grid.cell_volume;
    rhs += factor * node_means[k].mean;
    rhs_var += factor * factor * node_means[k].se * node_means[k].se;
  }
  return CheckReport::from(lhs.mean, lhs.se, rhs, std::sqrt(rhs_var), opts.z_crit);
}

// E[Phi(B)] against the intensity integral.
inline CheckReport first_moment_check(const ProcessModel& model, const Region& region, std::size_t n_reps,
                                      double z_crit, unsigned threads, const RngStream& rng) {
  if (n_reps < 1) throw EmptyInput("check needs at least one replicate");
  const auto values = replicate_map<double>(n_reps, threads, rng, [&](RngStream& stream, std::size_t) {
    return static_cast<double>(count_in(model.sample(stream), region));
  });
  const MeanSe lhs = mean_and_se(values);
  return CheckReport::from(lhs.mean, lhs.se, integral_of_intensity(model, region), 0.0, z_crit);
}

// E[ordered distinct pairs in B x B] against the pair-density integral.
inline CheckReport second_moment_check(const ProcessModel& model, const Region& region, std::size_t n_reps,
                                       double z_crit, unsigned threads, const RngStream& rng) {
  if (!model.has_product_density2()) throw NoProductDensity("second moment check needs a pair density");
  if (n_reps < 1) throw EmptyInput("check needs at least one replicate");
  const auto values = replicate_map<double>(n_reps, threads, rng, [&](RngStream& stream, std::size_t) {
    return static_cast<double>(factorial_power_count(model.sample(stream), {region, region}));
  });
  const MeanSe lhs = mean_and_se(values);
  return CheckReport::from(lhs.mean, lhs.se, integral_of_product_density2(model, region), 0.0, z_crit);
}

// Number of sampled patterns violating n^2 = n(n-1) + n for the count in
// the region, with the square and the falling factorial computed by the
// tuple counters. Always zero; a nonzero value indicts the counters.
inline std::size_t factorial_identity_violations(const ProcessModel& model, const Region& region,
                                                 std::size_t n_patterns, unsigned threads, const RngStream& rng) {
  if (n_patterns < 1) throw EmptyInput("check needs at least one pattern");
  const auto flags = replicate_map<std::uint8_t>(n_patterns, threads, rng, [&](RngStream& stream, std::size_t) {
    const PointPattern pat = model.sample(stream);
    const std::uint64_t n = count_in(pat, region);
    const std::uint64_t square = power_count(pat, {region, region});
    const std::uint64_t falling = factorial_power_count(pat, {region, region});
    return static_cast<std::uint8_t>(square != falling + n);
  });
  std::size_t violations = 0;
  for (std::uint8_t f : flags) violations += f;
  return violations;
}

}  // namespace palmix
