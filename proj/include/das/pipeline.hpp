#pragma once

// The six pipeline stages behind the CLI subcommands, callable as library
// functions so tests can drive them end to end. Each returns 0 on success
// and reports problems by throwing das::Error; the CLI maps codes to exit
// status.

#include <memory>

#include "das/config.hpp"
#include "das/intervention.hpp"
#include "das/preference.hpp"

namespace das::cli {

/// Generate the synthetic world described by the config and write it to the
/// world path.
int cmd_genworld(const RunConfig& cfg);

/// Roll out one episode per question and write <out_dir>/trajectories.jsonl.
int cmd_run(const RunConfig& cfg);

/// Diagnose every decision point of a trajectory log. Writes
/// diagnoses.jsonl, report.json, stepwise.csv, strata_*.csv and entropy ROC
/// CSVs into out_dir. Empty trajectory_log uses the run default.
int cmd_diagnose(const RunConfig& cfg, const std::string& trajectory_log = "");

/// Build the preference dataset from a diagnosis log. Writes prefs.jsonl
/// (or prefs_over/prefs_under with a narrower filter).
int cmd_build_prefs(const RunConfig& cfg, const std::string& diagnosis_log = "",
                    PairFilter filter = PairFilter::All);

/// DPO-align the policy on a dataset; writes aligned_params.json and
/// loss_trace.csv.
int cmd_align(const RunConfig& cfg, const std::string& dataset_path = "");

/// Consolidate artifacts in out_dir into consolidated.json plus the budget
/// sweep and variant comparison CSVs.
int cmd_report(const RunConfig& cfg);

/// Dataset path cmd_build_prefs writes for a filter.
std::string dataset_path_for(const RunConfig& cfg, PairFilter filter);

// ---- shared plumbing, exposed for tests ----

struct RunContext {
  WorldSpec world;  // populated for the simulated backend only
  Index index;
  std::unique_ptr<Policy> policy;
  std::vector<QuestionSpec> questions;
  bool simulated = true;
};

std::unique_ptr<RunContext> make_context(const RunConfig& cfg);

std::vector<Trajectory> run_cohort(const RunConfig& cfg, RunContext& ctx);

}  // namespace das::cli
