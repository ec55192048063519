// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0

// Batch experiment runner. Reads a config file, runs every experiment with
// a fixed master seed, writes one CSV, and exits 0 (all pass), 1 (any row
// failed), or 2 (config or I/O error).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "palmix/palmix.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw palmix::IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return *flag == 0 ? 1u : *flag;
  if (const char* env = std::getenv("PALM_THREADS")) {
    const unsigned long value = std::strtoul(env, nullptr, 10);
    if (value >= 1) return static_cast<unsigned>(value);
  }
  return 1u;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"palmrun: run Palm verification experiments from a config file"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "path to the experiment config")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out, "override the CSV output path");
  app.add_option("--threads", threads, "worker threads (default: PALM_THREADS or 1)");
  CLI11_PARSE(app, argc, argv);

  palmix::ExperimentConfig config;
  try {
    config = palmix::parse_config(read_file(config_path));
  } catch (const std::exception& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  }
  if (seed) config.seed = *seed;
  if (out) config.out = *out;

  try {
    const auto rows = palmix::run(config, resolve_threads(threads));
    palmix::write_csv(rows, config.out);
    bool all_pass = true;
    for (const auto& row : rows) {
      std::cout << (row.pass ? "pass" : "FAIL") << "  " << row.experiment << "  " << row.check;
      if (!row.error.empty()) std::cout << "  (" << row.error << ")";
      std::cout << "\n";
      all_pass = all_pass && row.pass;
    }
    std::cout << "wrote " << config.out << " (" << rows.size() << " rows)\n";
    return all_pass ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
