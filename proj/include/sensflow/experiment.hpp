#pragma once

#include <cstdint>
#include <string>

#include "sensflow/json_io.hpp"

namespace sensflow {

// One experiment = one config document:
//   {"kind": "...", "seed": <u64>, "params": {...}}
// Identical config + seed reproduce all numeric outputs byte for byte.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  Json params;
  std::string out_dir = ".";
};

// Known kinds: linear-classify, linear-simulate, rotary, fpcs-sensitivity,
// books-solve, books-grad, books-spiral, books-pwl, spread, discretize, sweep.
bool is_known_kind(const std::string& kind);

// Validates the document (unknown kind and out-of-range numeric parameters
// are rejected with the offending field path).
ExperimentConfig parse_config(const Json& doc, const std::string& out_dir);
ExperimentConfig load_config_file(const std::string& path, const std::string& out_dir);

// Runs the experiment, writing report.json, any trajectory CSVs, and
// manifest.json under config.out_dir. Returns the report.
Json run_experiment(const ExperimentConfig& config);

// Same, but maps errors to exit codes (0 ok, 2 config error, 1 module error)
// and writes error.json instead of throwing.
int run_experiment_guarded(const ExperimentConfig& config);

}  // namespace sensflow
