#pragma once

// Run configuration: a JSON file plus CLI flag overrides. Unknown keys are
// rejected so typos fail loudly instead of silently running defaults.

#include <cstdint>
#include <optional>
#include <string>

#include "das/dpo.hpp"
#include "das/metrics.hpp"
#include "das/remote.hpp"
#include "das/world.hpp"

namespace das {

enum class BackendKind { Simulated, Remote };

struct ReportVariant {
  std::string name;
  std::string report_path;  // a report.json produced by cmd_diagnose
};

struct ReportConfig {
  int max_rounds = 4;           // budget sweep upper bound (inclusive)
  int episodes_per_round = 1000;
  std::vector<ReportVariant> variants;
};

struct RunConfig {
  uint64_t seed = 0;
  std::string out_dir = "out";
  int parallelism = 0;  // 0 = all available threads, 1 = serial
  int budget = 4;
  int topk = 3;
  std::string world_path;      // empty: <out_dir>/world.json
  std::string corpus_path;     // remote runs retrieve from this corpus
  std::string questions_path;  // remote runs take questions from here
  AccMode acc_mode = AccMode::ExactMatch;

  WorldGenParams world_gen;
  BackendKind backend_kind = BackendKind::Simulated;
  PolicyParams backend_weights;
  RemoteConfig remote;
  UtilityModel utility;
  AlignmentConfig alignment;
  SimTimeModel sim_time;
  ReportConfig report;

  std::string resolved_world_path() const {
    return world_path.empty() ? out_dir + "/world.json" : world_path;
  }
};

/// Parse a config file. Missing file, bad JSON, unknown keys, or out-of-range
/// values all raise ConfigError. When world.seed / alignment.seed are absent
/// they inherit the top-level seed.
RunConfig load_config(const std::string& path);

/// Flag overrides, applied on top of whatever the file said.
struct ConfigOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> parallelism;
  std::optional<int> budget;
  std::optional<int> topk;
  std::optional<std::string> corpus_path;
};

void apply_overrides(RunConfig& cfg, const ConfigOverrides& o);

}  // namespace das
