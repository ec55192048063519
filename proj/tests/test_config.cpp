// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "palmix/config.hpp"
#include "palmix/errors.hpp"

using namespace palmix;

namespace {

const char* kMinimal = R"(
seed = 7
[model phi1]
kind = poisson
rate = 2

[model phi2]
kind = poisson
rate = 3

[model pair]
kind = superposition
components = phi1 phi2

[experiment w]
kind = weights_exact
model = pair
x = 0.5 0.5
expected = 0.4 0.6
)";

std::string message_of(const char* text) {
  try {
    parse_config(text);
  } catch (const std::exception& err) {
    return err.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a minimal config parses and round-trips through serialization") {
  const ExperimentConfig config = parse_config(kMinimal);
  CHECK(config.seed == 7);
  CHECK(config.window.dim == 2);
  REQUIRE(config.models.size() == 3);
  CHECK(config.models[2].components == std::vector<std::string>{"phi1", "phi2"});
  REQUIRE(config.experiments.size() == 1);
  CHECK(config.experiments[0].kind == "weights_exact");
  CHECK(config.experiments[0].expected == std::vector<double>{0.4, 0.6});

  const std::string once = serialize_config(config);
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
}

TEST_CASE("defaults fill in without a window section") {
  const ExperimentConfig config = parse_config("");
  CHECK(config.seed == 12345);
  CHECK(config.epsilon == 0.02);
  CHECK(config.out == "results.csv");
  CHECK(config.window.lower == std::vector<double>{0.0, 0.0});
  CHECK(config.window.upper == std::vector<double>{1.0, 1.0});
}

TEST_CASE("malformed lines raise ParseError with the line number") {
  const std::string msg = message_of("[model a]\nkind = poisson\nrate = 2\nthis is not a key value line\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK_THROWS_AS(parse_config("x ="), ParseError);
  CHECK_THROWS_AS(parse_config("[model oops"), ParseError);
}

TEST_CASE("semantic validation collects every problem at once") {
  const char* text = R"(
[model a]
kind = poisson
rate = -2

[model thom]
kind = thomas
parent_rate = 0
mean_offspring = 4
sigma = 0.05

[experiment e]
kind = palm_vs_oracle
model = phi3
x = 0.5 0.5
)";
  try {
    parse_config(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("[model a] rate must be >= 0") != std::string::npos);
    CHECK(msg.find("[model thom] parent_rate must be > 0") != std::string::npos);
    CHECK(msg.find("references undefined model 'phi3'") != std::string::npos);
  }
}

TEST_CASE("component order matters for superpositions") {
  const char* text = R"(
[model pair]
kind = superposition
components = phi1 phi2

[model phi1]
kind = poisson
rate = 1

[model phi2]
kind = poisson
rate = 1
)";
  const std::string msg = message_of(text);
  CHECK(msg.find("components must be declared before use") != std::string::npos);
}

TEST_CASE("an oversized conditioning ball is called out") {
  const char* text = R"(
[model phi1]
kind = poisson
rate = 2

[model phi2]
kind = poisson
rate = 3

[model pair]
kind = superposition
components = phi1 phi2

[experiment e]
kind = palm_vs_oracle
model = pair
x = 0.99 0.5
statistic_region = window
epsilon = 0.05
)";
  const std::string msg = message_of(text);
  CHECK(msg.find("epsilon is too large") != std::string::npos);
}

TEST_CASE("unknown keys and kinds are named") {
  CHECK(message_of("[model m]\nkind = gamma\nrate = 1\n").find("unknown kind 'gamma'") != std::string::npos);
  CHECK(message_of("[model m]\nkind = poisson\nrate = 1\nwat = 3\n").find("unknown [model] key 'wat'") !=
        std::string::npos);
  CHECK(message_of("volume = 3\n").find("unknown top-level key 'volume'") != std::string::npos);
}

TEST_CASE("duplicate names are rejected") {
  const std::string msg =
      message_of("[model m]\nkind = poisson\nrate = 1\n\n[model m]\nkind = poisson\nrate = 2\n");
  CHECK(msg.find("duplicate model name 'm'") != std::string::npos);
}

TEST_CASE("mixed Poisson mixing laws must be distributions") {
  const char* text = R"(
[model m]
kind = mixed_poisson
base_rate = 2
mixing = 1:0.4 3:0.4
)";
  CHECK(message_of(text).find("mixing probabilities must sum to 1") != std::string::npos);
}

TEST_CASE("two-point weight vectors need a partner point") {
  const char* text = R"(
[model phi1]
kind = poisson
rate = 2

[model phi2]
kind = poisson
rate = 3

[model pair]
kind = superposition
components = phi1 phi2

[experiment e]
kind = weights_exact
model = pair
x = 0.5 0.5
expected2 = 0.16 0.24 0.24 0.36
)";
  CHECK(message_of(text).find("expected2 needs a second point y") != std::string::npos);
}

TEST_CASE("serialized numbers survive a parse round trip") {
  ExperimentConfig config = parse_config(kMinimal);
  config.epsilon = 1.0 / 3.0;
  config.t_step = 1e-9;
  const ExperimentConfig back = parse_config(serialize_config(config));
  CHECK(back.epsilon == 1.0 / 3.0);
  CHECK(back.t_step == 1e-9);
}

TEST_CASE("built models realize the declared structure") {
  const char* text = R"(
[window]
dim = 2
lower = 0 0
upper = 2 1

[model grad]
kind = poisson
rate = affine 0.5 1 0

[model flat]
kind = binomial
n = 6

[model pair]
kind = superposition
components = grad flat

[experiment w]
kind = weights_exact
model = pair
x = 1 0.5
)";
  const ExperimentConfig config = parse_config(text);
  const BuiltModels built(config);
  CHECK(built.window().volume() == 2.0);
  const ProcessModel& grad = built.get("grad");
  CHECK(grad.intensity(Point{1.0, 0.5}) == 1.5);
  const ProcessModel& flat = built.get("flat");
  CHECK(flat.intensity(Point{1.0, 0.5}) == 3.0);
  const ProcessModel& pair = built.get("pair");
  CHECK(pair.intensity(Point{1.0, 0.5}) == 4.5);
  CHECK_THROWS_AS(built.get("nosuch"), ValidationError);
}

TEST_CASE("point and pattern functions build from their specs") {
  const Window w = build_window(parse_config(kMinimal).window);
  FnSpec ind;
  ind.kind = "indicator";
  ind.region.kind = "ball";
  ind.region.center = {0.5, 0.5};
  ind.region.radius = 0.25;
  const PointFn g = build_point_fn(ind, w);
  CHECK(g(Point{0.5, 0.6}) == 1.0);
  CHECK(g(Point{0.5, 0.9}) == 0.0);

  PatternFnSpec cap;
  cap.kind = "count_le";
  cap.bound = 2;
  const PatternFn h = build_pattern_fn(cap, w);
  CHECK(h(PointPattern({Point{0.1, 0.1}}, w)) == 1.0);
  CHECK(h(PointPattern({Point{0.1, 0.1}, Point{0.2, 0.2}, Point{0.3, 0.3}}, w)) == 0.0);
}

TEST_CASE("negative affine intensity anywhere on the window is rejected") {
  const char* text = R"(
[model grad]
kind = poisson
rate = affine 0.1 -1 0
)";
  CHECK(message_of(text).find("affine rate is negative somewhere on the window") != std::string::npos);
}
