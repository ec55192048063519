// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "palmix/errors.hpp"
#include "palmix/functional.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/models.hpp"
#include "palmix/pattern.hpp"
#include "palmix/superposition.hpp"

namespace palmix {

struct WindowSpec {
  int dim = 2;
  std::vector<double> lower = {0, 0};
  std::vector<double> upper = {1, 1};
};

// kind: window | box | ball.
struct RegionSpec {
  std::string kind = "window";
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> center;
  double radius = 0;
};

// Point function: const VALUE | indicator REGION.
struct FnSpec {
  std::string kind = "const";
  double value = 0;
  RegionSpec region;
};

// Bounded pattern functional: one | count_le BOUND.
struct PatternFnSpec {
  std::string kind = "one";
  double bound = 0;
};

// kind: poisson | binomial | mixed_poisson | thomas | superposition.
// Poisson rate is either a constant or affine in the coordinates,
// rate(x) = affine[0] + sum_i affine[i+1] * x_i.
struct ModelSpec {
  std::string name;
  std::string kind;
  bool affine = false;
  double rate = 0;
  std::vector<double> affine_coeffs;
  std::uint64_t n = 0;
  double base_rate = 0;
  std::vector<MixingAtom> mixing;
  double parent_rate = 0;
  double mean_offspring = 0;
  double sigma = 0;
  std::vector<std::string> components;
};

// kind: palm_vs_oracle | two_point_vs_oracle | campbell | laplace_derivative
//       | weights_exact | moment_consistency.
struct ExperimentSpec {
  std::string name;
  std::string kind;
  std::string model;
  std::vector<double> x;
  std::vector<double> y;
  RegionSpec statistic_region;
  std::vector<RegionSpec> regions;
  std::size_t sampler_reps = 100000;
  std::size_t oracle_reps = 1000000;
  std::size_t reps = 100000;
  std::size_t palm_reps_per_node = 100;
  std::size_t node_budget = 4096;
  std::size_t identity_patterns = 1000;
  std::size_t associativity_points = 100;
  double tv_threshold = 0.05;
  double ks_p_min = 1e-4;
  double weight_tol = 1e-12;
  double rel_tol = 0.02;
  bool reduced = false;
  bool ks_reduced = false;
  bool associativity = false;
  std::optional<double> epsilon;
  std::optional<double> t_step;
  std::optional<double> z_crit;
  // Closed-form comparison target: ("poisson", mean) compares the oracle pmf
  // against a Poisson pmf; ("value", v) compares a scalar estimate against v.
  std::optional<std::pair<std::string, double>> reference;
  std::vector<double> expected;
  std::vector<double> expected2;
  FnSpec f;
  FnSpec g;
  PatternFnSpec h;
};

struct ExperimentConfig {
  std::uint64_t seed = 12345;
  double epsilon = 0.02;
  double t_step = 1e-3;
  double z_crit = 4;
  bool timing = false;
  std::string out = "results.csv";
  WindowSpec window;
  std::vector<ModelSpec> models;
  std::vector<ExperimentSpec> experiments;
};

namespace cfg {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(const std::vector<double>& vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ' ';
    out += fmt(v);
  }
  return out;
}

struct LineError {
  std::size_t line;
  std::string message;
};

class Problems {
 public:
  void parse_error(std::size_t line, std::string msg) {
    parse_.push_back("line " + std::to_string(line) + ": " + std::move(msg));
  }
  void semantic(std::string msg) { semantic_.push_back(std::move(msg)); }
  void semantic(std::size_t line, std::string msg) {
    semantic_.push_back("line " + std::to_string(line) + ": " + std::move(msg));
  }

  // Malformed text dominates: semantic checks on a half-parsed config would
  // mostly be noise, but everything found is still reported together.
  void raise_if_any() const {
    if (!parse_.empty()) {
      std::vector<std::string> all = parse_;
      all.insert(all.end(), semantic_.begin(), semantic_.end());
      throw ParseError(all);
    }
    if (!semantic_.empty()) throw ValidationError(semantic_);
  }

 private:
  std::vector<std::string> parse_;
  std::vector<std::string> semantic_;
};

inline std::optional<double> to_double(const std::string& tok) {
  double v = 0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_u64(const std::string& tok) {
  std::uint64_t v = 0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

inline std::optional<std::vector<double>> to_doubles(const std::vector<std::string>& toks) {
  std::vector<double> out;
  out.reserve(toks.size());
  for (const auto& t : toks) {
    auto v = to_double(t);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

inline std::optional<bool> to_flag(const std::string& tok) {
  if (tok == "on") return true;
  if (tok == "off") return false;
  return std::nullopt;
}

// REGION := window | box L... U... | ball C... R
inline std::optional<RegionSpec> to_region(const std::vector<std::string>& toks) {
  if (toks.empty()) return std::nullopt;
  RegionSpec r;
  r.kind = toks[0];
  if (r.kind == "window") {
    if (toks.size() != 1) return std::nullopt;
    return r;
  }
  if (r.kind == "box") {
    const std::size_t n = toks.size() - 1;
    if (n < 2 || n % 2 != 0) return std::nullopt;
    auto vals = to_doubles({toks.begin() + 1, toks.end()});
    if (!vals) return std::nullopt;
    const std::size_t d = n / 2;
    r.lower.assign(vals->begin(), vals->begin() + static_cast<std::ptrdiff_t>(d));
    r.upper.assign(vals->begin() + static_cast<std::ptrdiff_t>(d), vals->end());
    return r;
  }
  if (r.kind == "ball") {
    if (toks.size() < 3) return std::nullopt;
    auto vals = to_doubles({toks.begin() + 1, toks.end()});
    if (!vals) return std::nullopt;
    r.center.assign(vals->begin(), vals->end() - 1);
    r.radius = vals->back();
    return r;
  }
  return std::nullopt;
}

inline std::optional<FnSpec> to_point_fn(const std::vector<std::string>& toks) {
  if (toks.empty()) return std::nullopt;
  FnSpec f;
  f.kind = toks[0];
  if (f.kind == "const") {
    if (toks.size() != 2) return std::nullopt;
    auto v = to_double(toks[1]);
    if (!v) return std::nullopt;
    f.value = *v;
    return f;
  }
  if (f.kind == "indicator") {
    auto r = to_region({toks.begin() + 1, toks.end()});
    if (!r) return std::nullopt;
    f.region = *r;
    return f;
  }
  return std::nullopt;
}

inline std::optional<PatternFnSpec> to_pattern_fn(const std::vector<std::string>& toks) {
  if (toks.empty()) return std::nullopt;
  PatternFnSpec h;
  h.kind = toks[0];
  if (h.kind == "one") return toks.size() == 1 ? std::optional(h) : std::nullopt;
  if (h.kind == "count_le") {
    if (toks.size() != 2) return std::nullopt;
    auto v = to_double(toks[1]);
    if (!v) return std::nullopt;
    h.bound = *v;
    return h;
  }
  return std::nullopt;
}

inline std::string region_str(const RegionSpec& r) {
  if (r.kind == "window") return "window";
  if (r.kind == "box") return "box " + fmt(r.lower) + " " + fmt(r.upper);
  return "ball " + fmt(r.center) + " " + fmt(r.radius);
}

inline std::string point_fn_str(const FnSpec& f) {
  if (f.kind == "const") return "const " + fmt(f.value);
  return "indicator " + region_str(f.region);
}

inline std::string pattern_fn_str(const PatternFnSpec& h) {
  if (h.kind == "one") return "one";
  return "count_le " + fmt(h.bound);
}

}  // namespace cfg

inline void validate_config(const ExperimentConfig& config, cfg::Problems& problems);

// Parses the key-value experiment format. Every problem found is collected;
// malformed syntax raises ParseError, semantic violations raise
// ValidationError, both carrying the full list.
inline ExperimentConfig parse_config(std::string_view text) {
  using namespace cfg;
  ExperimentConfig config;
  Problems problems;

  enum class Section { kTop, kWindow, kModel, kExperiment };
  Section section = Section::kTop;
  bool window_seen = false;
  std::size_t line_no = 0;

  // Window defaults count as explicit only when the section appears.
  config.window.lower.clear();
  config.window.upper.clear();

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.parse_error(line_no, "section header missing closing bracket");
        continue;
      }
      const auto head = tokens(line.substr(1, line.size() - 2));
      if (head.size() == 1 && head[0] == "window") {
        if (window_seen) problems.semantic(line_no, "duplicate [window] section");
        window_seen = true;
        section = Section::kWindow;
      } else if (head.size() == 2 && head[0] == "model") {
        config.models.push_back(ModelSpec{});
        config.models.back().name = head[1];
        section = Section::kModel;
      } else if (head.size() == 2 && head[0] == "experiment") {
        config.experiments.push_back(ExperimentSpec{});
        config.experiments.back().name = head[1];
        section = Section::kExperiment;
      } else {
        problems.parse_error(line_no, "unknown section header '" + std::string(line) + "'");
        section = Section::kTop;
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.parse_error(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    const auto toks = tokens(value);
    if (key.empty()) {
      problems.parse_error(line_no, "empty key");
      continue;
    }
    if (toks.empty()) {
      problems.parse_error(line_no, "empty value for key '" + key + "'");
      continue;
    }

    auto need_double = [&](double& slot) {
      auto v = toks.size() == 1 ? to_double(toks[0]) : std::optional<double>{};
      if (!v) {
        problems.parse_error(line_no, "key '" + key + "' needs one number");
        return;
      }
      slot = *v;
    };
    auto need_u64 = [&](auto& slot) {
      auto v = toks.size() == 1 ? to_u64(toks[0]) : std::optional<std::uint64_t>{};
      if (!v) {
        problems.parse_error(line_no, "key '" + key + "' needs one nonnegative integer");
        return;
      }
      slot = static_cast<std::remove_reference_t<decltype(slot)>>(*v);
    };
    auto need_flag = [&](bool& slot) {
      auto v = toks.size() == 1 ? to_flag(toks[0]) : std::optional<bool>{};
      if (!v) {
        problems.parse_error(line_no, "key '" + key + "' needs 'on' or 'off'");
        return;
      }
      slot = *v;
    };
    auto need_coords = [&](std::vector<double>& slot) {
      auto v = to_doubles(toks);
      if (!v || v->empty()) {
        problems.parse_error(line_no, "key '" + key + "' needs coordinates");
        return;
      }
      slot = *v;
    };
    auto need_region = [&](RegionSpec& slot) {
      auto r = to_region(toks);
      if (!r) {
        problems.parse_error(line_no, "key '" + key + "' needs 'window', 'box L.. U..' or 'ball C.. R'");
        return;
      }
      slot = *r;
    };
    auto need_point_fn = [&](FnSpec& slot) {
      auto f = to_point_fn(toks);
      if (!f) {
        problems.parse_error(line_no, "key '" + key + "' needs 'const V' or 'indicator REGION'");
        return;
      }
      slot = *f;
    };

    if (section == Section::kTop) {
      if (key == "seed") {
        need_u64(config.seed);
      } else if (key == "epsilon") {
        need_double(config.epsilon);
      } else if (key == "t_step") {
        need_double(config.t_step);
      } else if (key == "z_crit") {
        need_double(config.z_crit);
      } else if (key == "timing") {
        need_flag(config.timing);
      } else if (key == "out") {
        config.out = value;
      } else {
        problems.semantic(line_no, "unknown top-level key '" + key + "'");
      }
      continue;
    }

    if (section == Section::kWindow) {
      if (key == "dim") {
        need_u64(config.window.dim);
      } else if (key == "lower") {
        need_coords(config.window.lower);
      } else if (key == "upper") {
        need_coords(config.window.upper);
      } else {
        problems.semantic(line_no, "unknown [window] key '" + key + "'");
      }
      continue;
    }

    if (section == Section::kModel) {
      ModelSpec& m = config.models.back();
      if (key == "kind") {
        if (toks.size() != 1) {
          problems.parse_error(line_no, "key 'kind' needs one word");
        } else {
          m.kind = toks[0];
        }
      } else if (key == "rate") {
        if (toks.size() >= 2 && toks[0] == "affine") {
          auto coeffs = to_doubles({toks.begin() + 1, toks.end()});
          if (!coeffs) {
            problems.parse_error(line_no, "key 'rate' affine coefficients must be numbers");
          } else {
            m.affine = true;
            m.affine_coeffs = *coeffs;
          }
        } else {
          need_double(m.rate);
        }
      } else if (key == "n") {
        need_u64(m.n);
      } else if (key == "base_rate") {
        need_double(m.base_rate);
      } else if (key == "mixing") {
        m.mixing.clear();
        bool ok = true;
        for (const auto& t : toks) {
          const std::size_t colon = t.find(':');
          if (colon == std::string::npos) {
            ok = false;
            break;
          }
          auto rf = to_double(t.substr(0, colon));
          auto pr = to_double(t.substr(colon + 1));
          if (!rf || !pr) {
            ok = false;
            break;
          }
          m.mixing.push_back(MixingAtom{*rf, *pr});
        }
        if (!ok) {
          m.mixing.clear();
          problems.parse_error(line_no, "key 'mixing' needs 'FACTOR:PROB' pairs");
        }
      } else if (key == "parent_rate") {
        need_double(m.parent_rate);
      } else if (key == "mean_offspring") {
        need_double(m.mean_offspring);
      } else if (key == "sigma") {
        need_double(m.sigma);
      } else if (key == "components") {
        m.components = toks;
      } else {
        problems.semantic(line_no, "unknown [model] key '" + key + "'");
      }
      continue;
    }

    ExperimentSpec& e = config.experiments.back();
    if (key == "kind") {
      if (toks.size() != 1) {
        problems.parse_error(line_no, "key 'kind' needs one word");
      } else {
        e.kind = toks[0];
      }
    } else if (key == "model") {
      if (toks.size() != 1) {
        problems.parse_error(line_no, "key 'model' needs one name");
      } else {
        e.model = toks[0];
      }
    } else if (key == "x") {
      need_coords(e.x);
    } else if (key == "y") {
      need_coords(e.y);
    } else if (key == "statistic_region") {
      need_region(e.statistic_region);
    } else if (key == "region1" || key == "region2" || key == "region3") {
      const std::size_t idx = static_cast<std::size_t>(key.back() - '1');
      if (e.regions.size() < idx + 1) e.regions.resize(idx + 1);
      need_region(e.regions[idx]);
    } else if (key == "sampler_reps") {
      need_u64(e.sampler_reps);
    } else if (key == "oracle_reps") {
      need_u64(e.oracle_reps);
    } else if (key == "reps") {
      need_u64(e.reps);
    } else if (key == "palm_reps_per_node") {
      need_u64(e.palm_reps_per_node);
    } else if (key == "node_budget") {
      need_u64(e.node_budget);
    } else if (key == "identity_patterns") {
      need_u64(e.identity_patterns);
    } else if (key == "associativity_points") {
      need_u64(e.associativity_points);
    } else if (key == "tv_threshold") {
      need_double(e.tv_threshold);
    } else if (key == "ks_p_min") {
      need_double(e.ks_p_min);
    } else if (key == "weight_tol") {
      need_double(e.weight_tol);
    } else if (key == "rel_tol") {
      need_double(e.rel_tol);
    } else if (key == "reduced") {
      need_flag(e.reduced);
    } else if (key == "ks_reduced") {
      need_flag(e.ks_reduced);
    } else if (key == "associativity") {
      need_flag(e.associativity);
    } else if (key == "epsilon") {
      double v = 0;
      need_double(v);
      e.epsilon = v;
    } else if (key == "t_step") {
      double v = 0;
      need_double(v);
      e.t_step = v;
    } else if (key == "z_crit") {
      double v = 0;
      need_double(v);
      e.z_crit = v;
    } else if (key == "reference") {
      if (toks.size() == 2 && (toks[0] == "poisson" || toks[0] == "value")) {
        auto v = to_double(toks[1]);
        if (!v) {
          problems.parse_error(line_no, "key 'reference' needs a numeric parameter");
        } else {
          e.reference = std::make_pair(toks[0], *v);
        }
      } else {
        problems.parse_error(line_no, "key 'reference' needs 'poisson MEAN' or 'value V'");
      }
    } else if (key == "expected") {
      need_coords(e.expected);
    } else if (key == "expected2") {
      need_coords(e.expected2);
    } else if (key == "f") {
      need_point_fn(e.f);
    } else if (key == "g") {
      need_point_fn(e.g);
    } else if (key == "h") {
      auto h = to_pattern_fn(toks);
      if (!h) {
        problems.parse_error(line_no, "key 'h' needs 'one' or 'count_le BOUND'");
      } else {
        e.h = *h;
      }
    } else {
      problems.semantic(line_no, "unknown [experiment] key '" + key + "'");
    }
  }

  // Window defaults: the unit square unless a [window] section was given.
  if (!window_seen) {
    config.window.dim = 2;
    config.window.lower = {0, 0};
    config.window.upper = {1, 1};
  }

  validate_config(config, problems);
  problems.raise_if_any();
  return config;
}

namespace cfg {

inline bool region_inside_window(const RegionSpec& r, const WindowSpec& w) {
  const auto d = static_cast<std::size_t>(w.dim);
  if (r.kind == "window") return true;
  if (r.kind == "box") {
    if (r.lower.size() != d || r.upper.size() != d) return false;
    for (std::size_t i = 0; i < d; ++i) {
      if (r.lower[i] < w.lower[i] || r.upper[i] > w.upper[i] || !(r.lower[i] < r.upper[i])) return false;
    }
    return true;
  }
  if (r.center.size() != d || !(r.radius >= 0)) return false;
  for (std::size_t i = 0; i < d; ++i) {
    if (r.center[i] - r.radius < w.lower[i] || r.center[i] + r.radius > w.upper[i]) return false;
  }
  return true;
}

inline bool point_in_window(const std::vector<double>& x, const WindowSpec& w) {
  if (x.size() != static_cast<std::size_t>(w.dim)) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < w.lower[i] || x[i] > w.upper[i]) return false;
  }
  return true;
}

inline bool ball_fits(const std::vector<double>& x, double eps, const WindowSpec& w) {
  if (x.size() != static_cast<std::size_t>(w.dim)) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] - eps < w.lower[i] || x[i] + eps > w.upper[i]) return false;
  }
  return true;
}

}  // namespace cfg

inline void validate_config(const ExperimentConfig& config, cfg::Problems& problems) {
  using namespace cfg;
  const WindowSpec& w = config.window;
  bool window_ok = true;
  if (w.dim < 1 || w.dim > 3) {
    problems.semantic("[window] dim must be 1, 2 or 3");
    window_ok = false;
  }
  if (w.lower.size() != static_cast<std::size_t>(w.dim) || w.upper.size() != static_cast<std::size_t>(w.dim)) {
    problems.semantic("[window] lower/upper must have 'dim' coordinates");
    window_ok = false;
  } else {
    for (std::size_t i = 0; i < w.lower.size(); ++i) {
      if (!(w.lower[i] < w.upper[i])) {
        problems.semantic("[window] requires lower < upper on every axis");
        window_ok = false;
        break;
      }
    }
  }
  if (!(config.epsilon > 0)) problems.semantic("epsilon must be > 0");
  if (!(config.t_step > 0)) problems.semantic("t_step must be > 0");
  if (!(config.z_crit > 0)) problems.semantic("z_crit must be > 0");
  if (config.out.empty()) problems.semantic("out must be a nonempty path");

  const std::set<std::string> model_kinds = {"poisson", "binomial", "mixed_poisson", "thomas", "superposition"};
  std::set<std::string> defined;
  for (const auto& m : config.models) {
    const std::string where = "[model " + m.name + "]";
    if (m.name.empty()) problems.semantic("model with empty name");
    if (defined.count(m.name)) problems.semantic("duplicate model name '" + m.name + "'");
    if (!model_kinds.count(m.kind)) {
      problems.semantic(where + " has unknown kind '" + m.kind + "'");
      defined.insert(m.name);
      continue;
    }
    if (m.kind == "poisson") {
      if (m.affine) {
        if (m.affine_coeffs.size() != static_cast<std::size_t>(w.dim) + 1) {
          problems.semantic(where + " affine rate needs dim+1 coefficients");
        } else if (window_ok) {
          // Affine minimum over the window sits at a corner.
          double lo = m.affine_coeffs[0];
          for (std::size_t i = 0; i < static_cast<std::size_t>(w.dim); ++i) {
            const double c = m.affine_coeffs[i + 1];
            lo += c * (c >= 0 ? w.lower[i] : w.upper[i]);
          }
          if (lo < 0) problems.semantic(where + " affine rate is negative somewhere on the window");
        }
      } else if (!(m.rate >= 0)) {
        problems.semantic(where + " rate must be >= 0");
      }
    } else if (m.kind == "binomial") {
      // n = 0 is legal; Palm conditioning of that model errors at run time.
    } else if (m.kind == "mixed_poisson") {
      if (!(m.base_rate >= 0)) problems.semantic(where + " base_rate must be >= 0");
      if (m.mixing.empty()) {
        problems.semantic(where + " needs a 'mixing' law");
      } else {
        double total = 0;
        for (const auto& atom : m.mixing) {
          if (!(atom.rate_factor >= 0)) problems.semantic(where + " mixing factors must be >= 0");
          if (!(atom.prob >= 0)) problems.semantic(where + " mixing probabilities must be >= 0");
          total += atom.prob;
        }
        if (std::abs(total - 1.0) > 1e-9) problems.semantic(where + " mixing probabilities must sum to 1");
      }
    } else if (m.kind == "thomas") {
      if (!(m.parent_rate > 0)) problems.semantic(where + " parent_rate must be > 0");
      if (!(m.mean_offspring > 0)) problems.semantic(where + " mean_offspring must be > 0");
      if (!(m.sigma > 0)) problems.semantic(where + " sigma must be > 0");
    } else if (m.kind == "superposition") {
      if (m.components.size() < 2) problems.semantic(where + " needs at least two components");
      for (const auto& c : m.components) {
        if (!defined.count(c)) {
          problems.semantic(where + " references model '" + c +
                            "' which is not defined above it (components must be declared before use)");
        }
      }
    }
    defined.insert(m.name);
  }

  const std::set<std::string> experiment_kinds = {"palm_vs_oracle",    "two_point_vs_oracle", "campbell",
                                                  "laplace_derivative", "weights_exact",       "moment_consistency"};
  std::set<std::string> experiment_names;
  for (const auto& e : config.experiments) {
    const std::string where = "[experiment " + e.name + "]";
    if (e.name.empty()) problems.semantic("experiment with empty name");
    if (experiment_names.count(e.name)) problems.semantic("duplicate experiment name '" + e.name + "'");
    experiment_names.insert(e.name);
    if (!experiment_kinds.count(e.kind)) {
      problems.semantic(where + " has unknown kind '" + e.kind + "'");
      continue;
    }
    if (!defined.count(e.model)) {
      problems.semantic(where + " references undefined model '" + e.model + "'");
      continue;
    }
    if (!window_ok) continue;
    const double eps = e.epsilon.value_or(config.epsilon);
    if (!(eps > 0)) problems.semantic(where + " epsilon must be > 0");

    auto check_point = [&](const std::vector<double>& p, const char* what, bool needs_ball) {
      if (!point_in_window(p, w)) {
        problems.semantic(where + " " + what + " must lie in the window with dim coordinates");
      } else if (needs_ball && !ball_fits(p, eps, w)) {
        problems.semantic(where + " epsilon is too large: ball(" + std::string(what) + ", epsilon) leaves the window");
      }
    };

    if (e.kind == "palm_vs_oracle") {
      check_point(e.x, "x", true);
      if (e.sampler_reps < 1 || e.oracle_reps < 1) problems.semantic(where + " replicate counts must be >= 1");
      if (!(e.tv_threshold > 0)) problems.semantic(where + " tv_threshold must be > 0");
      if (!region_inside_window(e.statistic_region, w)) problems.semantic(where + " statistic_region leaves the window");
      if (e.reference && e.reference->first != "poisson") problems.semantic(where + " reference must be 'poisson MEAN'");
    } else if (e.kind == "two_point_vs_oracle") {
      check_point(e.x, "x", true);
      check_point(e.y, "y", true);
      if (point_in_window(e.x, w) && point_in_window(e.y, w)) {
        double d2 = 0;
        for (std::size_t i = 0; i < e.x.size(); ++i) d2 += (e.x[i] - e.y[i]) * (e.x[i] - e.y[i]);
        if (d2 <= 4 * eps * eps) problems.semantic(where + " epsilon is too large: the two weighting balls overlap");
      }
      if (e.sampler_reps < 1 || e.oracle_reps < 1) problems.semantic(where + " replicate counts must be >= 1");
      if (!(e.tv_threshold > 0)) problems.semantic(where + " tv_threshold must be > 0");
      if (!region_inside_window(e.statistic_region, w)) problems.semantic(where + " statistic_region leaves the window");
    } else if (e.kind == "campbell" || e.kind == "laplace_derivative") {
      if (e.reps < 1 || e.palm_reps_per_node < 1) problems.semantic(where + " replicate counts must be >= 1");
      if (e.node_budget < 1) problems.semantic(where + " node_budget must be >= 1");
      if (e.t_step && !(*e.t_step > 0)) problems.semantic(where + " t_step must be > 0");
      if (e.z_crit && !(*e.z_crit > 0)) problems.semantic(where + " z_crit must be > 0");
      if (e.g.kind == "indicator" && !region_inside_window(e.g.region, w))
        problems.semantic(where + " g indicator region leaves the window");
      if (e.f.kind == "indicator" && !region_inside_window(e.f.region, w))
        problems.semantic(where + " f indicator region leaves the window");
      if (e.kind == "laplace_derivative" && e.reference && e.reference->first != "value")
        problems.semantic(where + " reference must be 'value V'");
      if (!(e.rel_tol > 0)) problems.semantic(where + " rel_tol must be > 0");
    } else if (e.kind == "weights_exact") {
      check_point(e.x, "x", false);
      if (!e.y.empty()) check_point(e.y, "y", false);
      if (!(e.weight_tol >= 0)) problems.semantic(where + " weight_tol must be >= 0");
      if (!e.expected2.empty() && e.expected2.size() != 4)
        problems.semantic(where + " expected2 needs exactly four weights");
      if (!e.expected2.empty() && e.y.empty()) problems.semantic(where + " expected2 needs a second point y");
      if (e.associativity && e.associativity_points < 1)
        problems.semantic(where + " associativity_points must be >= 1");
    } else if (e.kind == "moment_consistency") {
      if (e.regions.empty()) problems.semantic(where + " needs at least one region (region1..region3)");
      for (const auto& r : e.regions) {
        if (!region_inside_window(r, w)) problems.semantic(where + " region leaves the window");
      }
      if (e.reps < 1 || e.identity_patterns < 1) problems.semantic(where + " replicate counts must be >= 1");
    }
  }
}

// Canonical text form; parse(serialize(c)) round-trips to the same bytes.
inline std::string serialize_config(const ExperimentConfig& config) {
  using namespace cfg;
  std::string out;
  auto kv = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  kv("seed", std::to_string(config.seed));
  kv("epsilon", fmt(config.epsilon));
  kv("t_step", fmt(config.t_step));
  kv("z_crit", fmt(config.z_crit));
  kv("timing", config.timing ? "on" : "off");
  kv("out", config.out);
  out += "\n[window]\n";
  kv("dim", std::to_string(config.window.dim));
  kv("lower", fmt(config.window.lower));
  kv("upper", fmt(config.window.upper));
  for (const auto& m : config.models) {
    out += "\n[model " + m.name + "]\n";
    kv("kind", m.kind);
    if (m.kind == "poisson") {
      if (m.affine) {
        kv("rate", "affine " + fmt(m.affine_coeffs));
      } else {
        kv("rate", fmt(m.rate));
      }
    } else if (m.kind == "binomial") {
      kv("n", std::to_string(m.n));
    } else if (m.kind == "mixed_poisson") {
      kv("base_rate", fmt(m.base_rate));
      std::string mix;
      for (const auto& atom : m.mixing) {
        if (!mix.empty()) mix += ' ';
        mix += fmt(atom.rate_factor) + ":" + fmt(atom.prob);
      }
      kv("mixing", mix);
    } else if (m.kind == "thomas") {
      kv("parent_rate", fmt(m.parent_rate));
      kv("mean_offspring", fmt(m.mean_offspring));
      kv("sigma", fmt(m.sigma));
    } else if (m.kind == "superposition") {
      std::string comps;
      for (const auto& c : m.components) {
        if (!comps.empty()) comps += ' ';
        comps += c;
      }
      kv("components", comps);
    }
  }
  for (const auto& e : config.experiments) {
    out += "\n[experiment " + e.name + "]\n";
    kv("kind", e.kind);
    kv("model", e.model);
    if (!e.x.empty()) kv("x", fmt(e.x));
    if (!e.y.empty()) kv("y", fmt(e.y));
    if (e.kind == "palm_vs_oracle" || e.kind == "two_point_vs_oracle") {
      kv("statistic_region", region_str(e.statistic_region));
      kv("sampler_reps", std::to_string(e.sampler_reps));
      kv("oracle_reps", std::to_string(e.oracle_reps));
      kv("tv_threshold", fmt(e.tv_threshold));
      kv("ks_p_min", fmt(e.ks_p_min));
      if (e.kind == "palm_vs_oracle") {
        kv("reduced", e.reduced ? "on" : "off");
        kv("ks_reduced", e.ks_reduced ? "on" : "off");
      }
      if (e.reference) kv("reference", e.reference->first + " " + fmt(e.reference->second));
    } else if (e.kind == "campbell") {
      kv("g", point_fn_str(e.g));
      kv("h", pattern_fn_str(e.h));
      kv("reps", std::to_string(e.reps));
      kv("palm_reps_per_node", std::to_string(e.palm_reps_per_node));
      kv("node_budget", std::to_string(e.node_budget));
    } else if (e.kind == "laplace_derivative") {
      kv("f", point_fn_str(e.f));
      kv("g", point_fn_str(e.g));
      kv("reps", std::to_string(e.reps));
      kv("palm_reps_per_node", std::to_string(e.palm_reps_per_node));
      kv("node_budget", std::to_string(e.node_budget));
      if (e.reference) kv("reference", e.reference->first + " " + fmt(e.reference->second));
      kv("rel_tol", fmt(e.rel_tol));
    } else if (e.kind == "weights_exact") {
      if (!e.expected.empty()) kv("expected", fmt(e.expected));
      if (!e.expected2.empty()) kv("expected2", fmt(e.expected2));
      kv("weight_tol", fmt(e.weight_tol));
      kv("associativity", e.associativity ? "on" : "off");
      if (e.associativity) kv("associativity_points", std::to_string(e.associativity_points));
    } else if (e.kind == "moment_consistency") {
      for (std::size_t i = 0; i < e.regions.size(); ++i) {
        kv("region" + std::to_string(i + 1), region_str(e.regions[i]));
      }
      kv("reps", std::to_string(e.reps));
      kv("identity_patterns", std::to_string(e.identity_patterns));
    }
    if (e.epsilon) kv("epsilon", fmt(*e.epsilon));
    if (e.t_step) kv("t_step", fmt(*e.t_step));
    if (e.z_crit) kv("z_crit", fmt(*e.z_crit));
  }
  return out;
}

inline Window build_window(const WindowSpec& spec) {
  const auto d = static_cast<std::size_t>(spec.dim);
  return Window(Point(std::span<const double>(spec.lower.data(), d)),
                Point(std::span<const double>(spec.upper.data(), d)));
}

inline Region build_region(const RegionSpec& spec, const Window& window) {
  if (spec.kind == "window") return Region::whole(window);
  if (spec.kind == "box") {
    return Region::box(Point(std::span<const double>(spec.lower.data(), spec.lower.size())),
                       Point(std::span<const double>(spec.upper.data(), spec.upper.size())));
  }
  return Region::ball(Point(std::span<const double>(spec.center.data(), spec.center.size())), spec.radius);
}

inline PointFn build_point_fn(const FnSpec& spec, const Window& window) {
  if (spec.kind == "const") {
    const double v = spec.value;
    return [v](const Point&) { return v; };
  }
  const Region region = build_region(spec.region, window);
  return [region](const Point& p) { return region.contains(p) ? 1.0 : 0.0; };
}

inline PatternFn build_pattern_fn(const PatternFnSpec& spec, const Window& window) {
  if (spec.kind == "one") return [](const PointPattern&) { return 1.0; };
  const Region whole = Region::whole(window);
  const double bound = spec.bound;
  return [whole, bound](const PointPattern& pat) {
    return static_cast<double>(count_in(pat, whole)) <= bound ? 1.0 : 0.0;
  };
}

// Owns every model named in the config; superpositions hold pointers to the
// earlier entries they compose.
class BuiltModels {
 public:
  explicit BuiltModels(const ExperimentConfig& config) : window_(build_window(config.window)) {
    for (const auto& spec : config.models) add(spec);
  }

  const ProcessModel& get(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError({"undefined model '" + name + "'"});
    return *owned_[it->second];
  }

  const Window& window() const { return window_; }

 private:
  void add(const ModelSpec& spec) {
    std::unique_ptr<ProcessModel> model;
    if (spec.kind == "poisson") {
      if (spec.affine) {
        const std::vector<double> coeffs = spec.affine_coeffs;
        IntensityFn fn = [coeffs](const Point& p) {
          double v = coeffs[0];
          for (int i = 0; i < p.dim(); ++i) v += coeffs[static_cast<std::size_t>(i) + 1] * p[i];
          return v;
        };
        // An affine function attains its extremes at window corners.
        double hi = coeffs[0];
        for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) {
          const double c = coeffs[i + 1];
          hi += c * (c >= 0 ? window_.upper()[static_cast<int>(i)] : window_.lower()[static_cast<int>(i)]);
        }
        model = std::make_unique<PoissonModel>(window_, std::move(fn), hi);
      } else {
        model = std::make_unique<PoissonModel>(window_, spec.rate);
      }
    } else if (spec.kind == "binomial") {
      model = std::make_unique<BinomialModel>(window_, spec.n);
    } else if (spec.kind == "mixed_poisson") {
      model = std::make_unique<MixedPoissonModel>(window_, spec.base_rate, spec.mixing);
    } else if (spec.kind == "thomas") {
      model = std::make_unique<ThomasClusterModel>(window_, spec.parent_rate, spec.mean_offspring, spec.sigma);
    } else if (spec.kind == "superposition") {
      std::vector<const ProcessModel*> comps;
      comps.reserve(spec.components.size());
      for (const auto& c : spec.components) comps.push_back(&get(c));
      model = std::make_unique<SuperposedModel>(std::move(comps));
    } else {
      throw ValidationError({"[model " + spec.name + "] has unknown kind '" + spec.kind + "'"});
    }
    index_[spec.name] = owned_.size();
    owned_.push_back(std::move(model));
  }

  Window window_;
  std::vector<std::unique_ptr<ProcessModel>> owned_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace palmix
