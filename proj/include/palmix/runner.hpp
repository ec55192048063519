// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "palmix/config.hpp"
#include "palmix/errors.hpp"
#include "palmix/functional.hpp"
#include "palmix/oracle.hpp"
#include "palmix/pmf.hpp"
#include "palmix/rng.hpp"
#include "palmix/stats.hpp"
#include "palmix/superposition.hpp"

namespace palmix {

// One CSV line. Pass direction depends on the check: TV, z and exactness
// checks pass when |statistic| <= threshold; KS p-value checks pass when
// statistic >= threshold. seconds is 0 unless timing is enabled, keeping
// the CSV byte-identical across runs.
struct ResultRow {
  std::string experiment;
  std::string check;
  double lhs = 0;
  double rhs = 0;
  double statistic = 0;
  double threshold = 0;
  bool pass = false;
  std::uint64_t replicates = 0;
  double seconds = 0;
  std::uint64_t seed = 0;
  std::string error;
};

namespace detail {

inline double pmf_mean(const CountPmf& pmf) {
  double m = 0;
  for (std::size_t k = 0; k <= pmf.support_bound(); ++k) m += static_cast<double>(k) * pmf.prob(k);
  return m;
}

inline ResultRow tv_row(const std::string& experiment, const std::string& check, const CountPmf& a, const CountPmf& b,
                        double threshold, std::uint64_t replicates) {
  ResultRow row;
  row.experiment = experiment;
  row.check = check;
  row.lhs = pmf_mean(a);
  row.rhs = pmf_mean(b);
  row.statistic = tv_distance(a, b);
  row.threshold = threshold;
  row.pass = row.statistic <= threshold;
  row.replicates = replicates;
  return row;
}

inline ResultRow ks_row(const std::string& experiment, const std::string& check, std::span<const std::uint32_t> a,
                        std::span<const std::uint32_t> b, double p_min) {
  std::vector<double> da(a.begin(), a.end());
  std::vector<double> db(b.begin(), b.end());
  const KsResult ks = ks_two_sample(da, db);
  const MeanSe ma = mean_and_se(da);
  const MeanSe mb = mean_and_se(db);
  ResultRow row;
  row.experiment = experiment;
  row.check = check;
  row.lhs = ma.mean;
  row.rhs = mb.mean;
  row.statistic = ks.p_value;
  row.threshold = p_min;
  row.pass = ks.p_value >= p_min;
  row.replicates = a.size() + b.size();
  return row;
}

inline ResultRow report_row(const std::string& experiment, const std::string& check, const CheckReport& report,
                            double z_crit, std::uint64_t replicates) {
  ResultRow row;
  row.experiment = experiment;
  row.check = check;
  row.lhs = report.lhs;
  row.rhs = report.rhs;
  row.statistic = report.z_score;
  row.threshold = z_crit;
  row.pass = report.pass;
  row.replicates = replicates;
  return row;
}

inline ResultRow exact_row(const std::string& experiment, const std::string& check, double lhs, double rhs,
                           double statistic, double threshold, std::uint64_t replicates = 0) {
  ResultRow row;
  row.experiment = experiment;
  row.check = check;
  row.lhs = lhs;
  row.rhs = rhs;
  row.statistic = statistic;
  row.threshold = threshold;
  row.pass = statistic <= threshold;
  row.replicates = replicates;
  return row;
}

inline const SuperposedModel& as_superposition(const ProcessModel& model) {
  const auto* sup = dynamic_cast<const SuperposedModel*>(&model);
  if (sup == nullptr) throw InvalidModel("this experiment kind needs a superposition model");
  return *sup;
}

inline void run_palm_vs_oracle(const ExperimentConfig& config, const ExperimentSpec& e, const ProcessModel& model,
                               const Window& window, unsigned threads, const RngStream& base,
                               std::vector<ResultRow>& rows) {
  const Point x(std::span<const double>(e.x.data(), e.x.size()));
  const double eps = e.epsilon.value_or(config.epsilon);
  const CountStatistic stat = count_in_statistic(build_region(e.statistic_region, window));
  OracleOptions oracle_opts;
  oracle_opts.n_reps = e.oracle_reps;
  oracle_opts.threads = threads;
  oracle_opts.reduced = e.reduced;
  const OracleResult oracle = palm_weighting_oracle(model, x, eps, stat, oracle_opts, base.substream(1));

  if (model.has_analytic_palm()) {
    const CountPmf sampler = sampler_pmf(e.sampler_reps, threads, base.substream(0), stat, [&](RngStream& stream) {
      return e.reduced ? model.reduced_palm_sample(x, stream) : model.palm_sample(x, stream);
    });
    rows.push_back(
        tv_row(e.name, "tv_sampler_vs_oracle", sampler, oracle.pmf, e.tv_threshold, e.sampler_reps + e.oracle_reps));
  }
  if (e.reference) {
    rows.push_back(tv_row(e.name, "tv_oracle_vs_reference", oracle.pmf, CountPmf::poisson(e.reference->second),
                          e.tv_threshold, e.oracle_reps));
  }
  if (e.ks_reduced) {
    const auto composed = sampler_counts(e.sampler_reps, threads, base.substream(2), stat, [&](RngStream& stream) {
      return remove_atom(model.palm_sample(x, stream), x);
    });
    const auto direct = sampler_counts(e.sampler_reps, threads, base.substream(3), stat, [&](RngStream& stream) {
      return model.reduced_palm_sample(x, stream);
    });
    rows.push_back(ks_row(e.name, "ks_reduced_consistency", composed, direct, e.ks_p_min));
  }
}

inline void run_two_point_vs_oracle(const ExperimentConfig& config, const ExperimentSpec& e, const ProcessModel& model,
                                    const Window& window, unsigned threads, const RngStream& base,
                                    std::vector<ResultRow>& rows) {
  const SuperposedModel& sup = as_superposition(model);
  const Point x(std::span<const double>(e.x.data(), e.x.size()));
  const Point y(std::span<const double>(e.y.data(), e.y.size()));
  const double eps = e.epsilon.value_or(config.epsilon);
  const CountStatistic stat = count_in_statistic(build_region(e.statistic_region, window));

  const auto direct = sampler_counts(e.sampler_reps, threads, base.substream(0), stat, [&](RngStream& stream) {
    return two_point_reduced_palm_sample(sup, x, y, stream);
  });
  OracleOptions oracle_opts;
  oracle_opts.n_reps = e.oracle_reps;
  oracle_opts.threads = threads;
  oracle_opts.reduced = true;
  const OracleResult oracle = two_point_weighting_oracle(sup, x, y, eps, stat, oracle_opts, base.substream(1));
  rows.push_back(tv_row(e.name, "tv_sampler_vs_oracle", CountPmf::from_counts(direct), oracle.pmf, e.tv_threshold,
                        e.sampler_reps + e.oracle_reps));

  const auto chained = sampler_counts(e.sampler_reps, threads, base.substream(2), stat, [&](RngStream& stream) {
    return chained_reduced_palm_sample(sup, x, y, stream);
  });
  rows.push_back(ks_row(e.name, "ks_chained_vs_direct", chained, direct, e.ks_p_min));
}

inline void run_campbell(const ExperimentConfig& config, const ExperimentSpec& e, const ProcessModel& model,
                         const Window& window, unsigned threads, const RngStream& base, std::vector<ResultRow>& rows) {
  FunctionalCheckOptions opts;
  opts.n_reps = e.reps;
  opts.palm_reps_per_node = e.palm_reps_per_node;
  opts.node_budget = e.node_budget;
  opts.z_crit = e.z_crit.value_or(config.z_crit);
  opts.threads = threads;
  const CheckReport report =
      campbell_check(model, build_point_fn(e.g, window), build_pattern_fn(e.h, window), opts, base);
  rows.push_back(report_row(e.name, "campbell_z", report, opts.z_crit, e.reps));
}

inline void run_laplace_derivative(const ExperimentConfig& config, const ExperimentSpec& e, const ProcessModel& model,
                                   const Window& window, unsigned threads, const RngStream& base,
                                   std::vector<ResultRow>& rows) {
  FunctionalCheckOptions opts;
  opts.n_reps = e.reps;
  opts.palm_reps_per_node = e.palm_reps_per_node;
  opts.node_budget = e.node_budget;
  opts.t_step = e.t_step.value_or(config.t_step);
  opts.z_crit = e.z_crit.value_or(config.z_crit);
  opts.threads = threads;
  const CheckReport report =
      laplace_derivative_check(model, build_point_fn(e.f, window), build_point_fn(e.g, window), opts, base);
  rows.push_back(report_row(e.name, "laplace_derivative_z", report, opts.z_crit, e.reps));
  if (e.reference) {
    const double ref = e.reference->second;
    const double rel = std::abs(report.lhs / ref - 1.0);
    rows.push_back(exact_row(e.name, "laplace_derivative_ref", report.lhs, ref, rel, e.rel_tol, e.reps));
  }
}

inline void run_weights_exact(const ExperimentConfig&, const ExperimentSpec& e, const ProcessModel& model,
                              const Window& window, unsigned threads, const RngStream& base,
                              std::vector<ResultRow>& rows) {
  (void)threads;
  const SuperposedModel& sup = as_superposition(model);
  const Point x(std::span<const double>(e.x.data(), e.x.size()));
  const MixtureWeights w = mixture_weights(sup, x);
  if (!e.expected.empty()) {
    if (e.expected.size() != w.weights.size())
      throw ValidationError({"[experiment " + e.name + "] expected has " + std::to_string(e.expected.size()) +
                             " weights but the model has " + std::to_string(w.weights.size()) + " components"});
    for (std::size_t j = 0; j < w.weights.size(); ++j) {
      rows.push_back(exact_row(e.name, "weight_" + std::to_string(j + 1), w.weights[j], e.expected[j],
                               std::abs(w.weights[j] - e.expected[j]), e.weight_tol));
    }
  }
  double sum = 0;
  for (double v : w.weights) sum += v;
  rows.push_back(exact_row(e.name, "weights_sum", sum, 1.0, std::abs(sum - 1.0), e.weight_tol));

  if (!e.y.empty()) {
    const Point y(std::span<const double>(e.y.data(), e.y.size()));
    const TwoPointWeights tw = two_point_weights(sup, x, y);
    if (!e.expected2.empty()) {
      const double tv[4] = {tw.w11, tw.w12, tw.w21, tw.w22};
      const char* names[4] = {"two_point_weight_11", "two_point_weight_12", "two_point_weight_21",
                              "two_point_weight_22"};
      for (int j = 0; j < 4; ++j) {
        rows.push_back(exact_row(e.name, names[j], tv[j], e.expected2[static_cast<std::size_t>(j)],
                                 std::abs(tv[j] - e.expected2[static_cast<std::size_t>(j)]), e.weight_tol));
      }
    }
    const double rho = sup.product_density2(x, y);
    rows.push_back(exact_row(e.name, "normalizer_identity", tw.normalizer, rho,
                             std::abs(tw.normalizer / rho - 1.0), e.weight_tol));
    const TwoPointWeights cw = chained_two_point_weights(sup, x, y);
    double max_diff = std::abs(cw.w11 - tw.w11);
    max_diff = std::max(max_diff, std::abs(cw.w12 - tw.w12));
    max_diff = std::max(max_diff, std::abs(cw.w21 - tw.w21));
    max_diff = std::max(max_diff, std::abs(cw.w22 - tw.w22));
    rows.push_back(exact_row(e.name, "chained_consistency", cw.w11, tw.w11, max_diff, e.weight_tol));
  }

  if (e.associativity) {
    if (sup.components().size() != 3)
      throw InvalidModel("the associativity check needs exactly three components");
    const ProcessModel& c0 = *sup.components()[0];
    const ProcessModel& c1 = *sup.components()[1];
    const ProcessModel& c2 = *sup.components()[2];
    const SuperposedModel left_inner({&c0, &c1});
    const SuperposedModel left({&left_inner, &c2});
    const SuperposedModel right_inner({&c1, &c2});
    const SuperposedModel right({&c0, &right_inner});
    RngStream points = base.substream(0);
    double max_diff = 0;
    for (std::size_t i = 0; i < e.associativity_points; ++i) {
      const Point p = points.uniform_in(window);
      const MixtureWeights wf = flattened_mixture_weights(sup, p);
      const MixtureWeights wl = flattened_mixture_weights(left, p);
      const MixtureWeights wr = flattened_mixture_weights(right, p);
      for (std::size_t j = 0; j < wf.weights.size(); ++j) {
        max_diff = std::max(max_diff, std::abs(wl.weights[j] - wf.weights[j]));
        max_diff = std::max(max_diff, std::abs(wr.weights[j] - wf.weights[j]));
      }
    }
    rows.push_back(exact_row(e.name, "associativity_exact", 0.0, 0.0, max_diff, 0.0, e.associativity_points));
  }
}

inline void run_moment_consistency(const ExperimentConfig& config, const ExperimentSpec& e, const ProcessModel& model,
                                   const Window& window, unsigned threads, const RngStream& base,
                                   std::vector<ResultRow>& rows) {
  const double z_crit = e.z_crit.value_or(config.z_crit);
  for (std::size_t i = 0; i < e.regions.size(); ++i) {
    const Region region = build_region(e.regions[i], window);
    const std::string suffix = "_region_" + std::to_string(i + 1);
    const CheckReport first =
        first_moment_check(model, region, e.reps, z_crit, threads, base.substream(3 * i));
    rows.push_back(report_row(e.name, "first_moment" + suffix, first, z_crit, e.reps));
    if (model.has_product_density2() && !region.is_ball()) {
      const CheckReport second =
          second_moment_check(model, region, e.reps, z_crit, threads, base.substream(3 * i + 1));
      rows.push_back(report_row(e.name, "second_moment" + suffix, second, z_crit, e.reps));
    }
  }
  const Region identity_region = build_region(e.regions[0], window);
  const std::size_t violations =
      factorial_identity_violations(model, identity_region, e.identity_patterns, threads, base.substream(997));
  rows.push_back(exact_row(e.name, "factorial_identity", static_cast<double>(violations), 0.0,
                           static_cast<double>(violations), 0.0, e.identity_patterns));
}

}  // namespace detail

// Executes every experiment in declared order. Failures never abort the
// batch: a throwing experiment contributes one failed row carrying the
// error text. Replicates parallelize over derived streams, so the rows are
// identical for every thread count.
inline std::vector<ResultRow> run(const ExperimentConfig& config, unsigned threads = 1) {
  const BuiltModels built(config);
  const Window& window = built.window();
  const RngStream master(config.seed);
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < config.experiments.size(); ++i) {
    const ExperimentSpec& e = config.experiments[i];
    const RngStream base = master.substream(i);
    const std::size_t first_row = rows.size();
    const auto start = std::chrono::steady_clock::now();
    try {
      const ProcessModel& model = built.get(e.model);
      if (e.kind == "palm_vs_oracle") {
        detail::run_palm_vs_oracle(config, e, model, window, threads, base, rows);
      } else if (e.kind == "two_point_vs_oracle") {
        detail::run_two_point_vs_oracle(config, e, model, window, threads, base, rows);
      } else if (e.kind == "campbell") {
        detail::run_campbell(config, e, model, window, threads, base, rows);
      } else if (e.kind == "laplace_derivative") {
        detail::run_laplace_derivative(config, e, model, window, threads, base, rows);
      } else if (e.kind == "weights_exact") {
        detail::run_weights_exact(config, e, model, window, threads, base, rows);
      } else if (e.kind == "moment_consistency") {
        detail::run_moment_consistency(config, e, model, window, threads, base, rows);
      } else {
        throw ValidationError({"unknown experiment kind '" + e.kind + "'"});
      }
    } catch (const std::exception& err) {
      ResultRow row;
      row.experiment = e.name;
      row.check = "error";
      row.pass = false;
      row.error = err.what();
      rows.push_back(row);
    }
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = config.timing ? std::chrono::duration<double>(stop - start).count() : 0.0;
    for (std::size_t r = first_row; r < rows.size(); ++r) {
      rows[r].seconds = seconds;
      rows[r].seed = config.seed;
    }
  }
  return rows;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,check,lhs,rhs,statistic,threshold,pass,replicates,seconds,seed,error\n";
  for (const ResultRow& row : rows) {
    out += detail::csv_escape(row.experiment);
    out += ',';
    out += detail::csv_escape(row.check);
    out += ',';
    out += cfg::fmt(row.lhs);
    out += ',';
    out += cfg::fmt(row.rhs);
    out += ',';
    out += cfg::fmt(row.statistic);
    out += ',';
    out += cfg::fmt(row.threshold);
    out += ',';
    out += row.pass ? '1' : '0';
    out += ',';
    out += std::to_string(row.replicates);
    out += ',';
    out += cfg::fmt(row.seconds);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += detail::csv_escape(row.error);
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  const std::string text = to_csv(rows);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("failed writing '" + path + "'");
}

// Runs the batch and writes the CSV. Exit contract: 0 all rows pass, 1 any
// row failed. (Config errors are the caller's to map to exit code 2.)
inline int run_to_csv(const ExperimentConfig& config, unsigned threads = 1) {
  const std::vector<ResultRow> rows = run(config, threads);
  write_csv(rows, config.out);
  for (const ResultRow& row : rows) {
    if (!row.pass) return 1;
  }
  return 0;
}

}  // namespace palmix
