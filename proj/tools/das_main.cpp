#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "das/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  das::ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.overrides.seed, "override the run seed");
  cmd->add_option("--out", flags.overrides.out_dir, "override the output directory");
  cmd->add_option("--parallelism", flags.overrides.parallelism,
                  "worker threads (0 = all cores, 1 = serial)");
  cmd->add_option("--budget", flags.overrides.budget,
                  "max searches per episode");
  cmd->add_option("--topk", flags.overrides.topk, "retrieval depth");
  cmd->add_option("--corpus", flags.overrides.corpus_path,
                  "override the retrieval corpus path");
}

das::RunConfig resolve_config(const CommonFlags& flags) {
  das::RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = das::load_config(flags.config_path);
  }
  das::apply_overrides(cfg, flags.overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "diagnose search/answer decision boundaries, build preference data, "
      "and align the decision policy"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string trajectory_log;
  std::string diagnosis_log;
  std::string dataset_path;
  std::string filter_name = "all";

  CLI::App* genworld =
      app.add_subcommand("genworld", "generate a synthetic knowledge world");
  add_common(genworld, flags);

  CLI::App* run =
      app.add_subcommand("run", "roll out episodes over the question set");
  add_common(run, flags);

  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "counterfactually diagnose every decision point");
  add_common(diagnose, flags);
  diagnose->add_option("trajectories", trajectory_log,
                       "trajectory log (default <out>/trajectories.jsonl)");

  CLI::App* build_prefs = app.add_subcommand(
      "build-prefs", "construct preference pairs from diagnoses");
  add_common(build_prefs, flags);
  build_prefs->add_option("diagnoses", diagnosis_log,
                          "diagnosis log (default <out>/diagnoses.jsonl)");
  build_prefs->add_option("--filter", filter_name,
                          "pair filter: all, over, or under");

  CLI::App* align_cmd =
      app.add_subcommand("align", "DPO-align the policy on a dataset");
  add_common(align_cmd, flags);
  align_cmd->add_option("dataset", dataset_path,
                        "preference dataset (default <out>/prefs.jsonl)");

  CLI::App* report =
      app.add_subcommand("report", "consolidate run artifacts into a report");
  add_common(report, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are config errors
  }

  try {
    das::RunConfig cfg = resolve_config(flags);
    if (genworld->parsed()) return das::cli::cmd_genworld(cfg);
    if (run->parsed()) return das::cli::cmd_run(cfg);
    if (diagnose->parsed()) return das::cli::cmd_diagnose(cfg, trajectory_log);
    if (build_prefs->parsed()) {
      return das::cli::cmd_build_prefs(cfg, diagnosis_log,
                                       das::pair_filter_from_name(filter_name));
    }
    if (align_cmd->parsed()) return das::cli::cmd_align(cfg, dataset_path);
    if (report->parsed()) return das::cli::cmd_report(cfg);
  } catch (const das::Error& e) {
    std::cerr << "error (" << das::error_code_name(e.code()) << "): "
              << e.what() << "\n";
    return das::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
