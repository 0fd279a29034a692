#include "das/pipeline.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "das/config.hpp"
#include "das/dpo.hpp"
#include "das/error.hpp"

namespace das {
namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const std::string& name) {
  std::string dir = testing::TempDir() + "/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a das::Error";
  return ErrorCode::IoFailure;
}

// ---- config file parsing ----

TEST(LoadConfig, ParsesEveryField) {
  std::string path = fresh_dir("cfg_full") + "/cfg.json";
  write_file(path, R"({
    "seed": 7,
    "out_dir": "somewhere",
    "parallelism": 2,
    "budget": 5,
    "topk": 4,
    "acc_mode": "containment",
    "world": {
      "n_questions": 24,
      "retrieval_success_prob": 0.8,
      "answer_noise": 0.1,
      "comparison_share": 0.25,
      "difficulty_mix": [0.5, 0.25, 0.25],
      "supporting_facts_mix": {"2": 1.0},
      "internal_rate_comparison": 0.6,
      "internal_rate_bridge": 0.2,
      "fully_internal_share": 0.05,
      "distractor_facts": 10,
      "tokens_per_fact": 3
    },
    "backend": {
      "kind": "remote",
      "weights": [1.0, 2.0, 3.0],
      "remote": {
        "url": "http://127.0.0.1:9999",
        "temperature": 0.5,
        "max_tokens": 128,
        "request_logprobs": true,
        "answer_retries": 1,
        "timeout_s": 7
      }
    },
    "utility": {"r_correct": 2.0, "r_incorrect": -2.0,
                "c_search": 0.2, "r_info": 0.5},
    "alignment": {"beta": 0.2, "epochs": 4, "learning_rate": 0.05,
                  "batch_size": 16, "seed": 99},
    "sim_time": {"per_step_s": 0.01, "per_search_s": 0.02},
    "report": {"max_rounds": 2, "episodes_per_round": 10,
               "variants": [{"name": "base", "report_path": "r.json"}]}
  })");

  RunConfig cfg = load_config(path);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.out_dir, "somewhere");
  EXPECT_EQ(cfg.parallelism, 2);
  EXPECT_EQ(cfg.budget, 5);
  EXPECT_EQ(cfg.topk, 4);
  EXPECT_EQ(cfg.acc_mode, AccMode::Containment);
  EXPECT_EQ(cfg.world_gen.n_questions, 24);
  EXPECT_DOUBLE_EQ(cfg.world_gen.retrieval_success_prob, 0.8);
  EXPECT_DOUBLE_EQ(cfg.world_gen.answer_noise, 0.1);
  ASSERT_EQ(cfg.world_gen.supporting_facts_mix.size(), 1u);
  EXPECT_EQ(cfg.world_gen.supporting_facts_mix[0].first, 2);
  EXPECT_EQ(cfg.backend_kind, BackendKind::Remote);
  EXPECT_DOUBLE_EQ(cfg.backend_weights.weights[2], 3.0);
  EXPECT_EQ(cfg.remote.url, "http://127.0.0.1:9999");
  EXPECT_EQ(cfg.remote.max_tokens, 128);
  EXPECT_TRUE(cfg.remote.request_logprobs);
  EXPECT_DOUBLE_EQ(cfg.utility.r_correct, 2.0);
  EXPECT_EQ(cfg.alignment.epochs, 4);
  EXPECT_EQ(cfg.alignment.seed, 99u);
  EXPECT_DOUBLE_EQ(cfg.sim_time.per_search_s, 0.02);
  EXPECT_EQ(cfg.report.max_rounds, 2);
  ASSERT_EQ(cfg.report.variants.size(), 1u);
  EXPECT_EQ(cfg.report.variants[0].name, "base");
}

TEST(LoadConfig, DefaultsWhenFileIsMinimal) {
  std::string path = fresh_dir("cfg_min") + "/cfg.json";
  write_file(path, "{}");
  RunConfig cfg = load_config(path);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_EQ(cfg.budget, 4);
  EXPECT_EQ(cfg.topk, 3);
  EXPECT_EQ(cfg.backend_kind, BackendKind::Simulated);
  EXPECT_EQ(cfg.acc_mode, AccMode::ExactMatch);
  EXPECT_EQ(cfg.resolved_world_path(), "out/world.json");
}

TEST(LoadConfig, DerivedSeedsInheritTopLevelSeed) {
  std::string path = fresh_dir("cfg_seed") + "/cfg.json";
  write_file(path, R"({"seed": 42, "world": {"n_questions": 5},
                       "alignment": {"epochs": 1}})");
  RunConfig cfg = load_config(path);
  EXPECT_EQ(cfg.world_gen.seed, 42u);
  EXPECT_EQ(cfg.alignment.seed, 42u);

  write_file(path, R"({"seed": 42, "world": {"seed": 1},
                       "alignment": {"seed": 2}})");
  cfg = load_config(path);
  EXPECT_EQ(cfg.world_gen.seed, 1u);
  EXPECT_EQ(cfg.alignment.seed, 2u);
}

TEST(LoadConfig, RejectsBadInput) {
  std::string dir = fresh_dir("cfg_bad");
  auto expect_config_error = [&](const std::string& body) {
    std::string path = dir + "/cfg.json";
    write_file(path, body);
    EXPECT_EQ(code_of([&] { load_config(path); }), ErrorCode::ConfigError)
        << body;
  };

  EXPECT_EQ(code_of([&] { load_config(dir + "/absent.json"); }),
            ErrorCode::ConfigError);
  expect_config_error("{ not json");
  expect_config_error(R"({"sead": 1})");
  expect_config_error(R"({"world": {"questions": 5}})");
  expect_config_error(R"({"budget": "four"})");
  expect_config_error(R"({"budget": -1})");
  expect_config_error(R"({"topk": 0})");
  expect_config_error(R"({"parallelism": -2})");
  expect_config_error(R"({"acc_mode": "fuzzy"})");
  expect_config_error(R"({"backend": {"kind": "oracle"}})");
  expect_config_error(R"({"backend": {"weights": [1, 2]}})");
  expect_config_error(R"({"world": {"difficulty_mix": [0.5, 0.5]}})");
  expect_config_error(R"({"world": {"supporting_facts_mix": {"two": 1.0}}})");
  // Utility orderings are validated at load time.
  expect_config_error(R"({"utility": {"r_correct": -5.0}})");
}

TEST(LoadConfig, UnknownKeyErrorNamesTheKey) {
  std::string path = fresh_dir("cfg_name") + "/cfg.json";
  write_file(path, R"({"alignment": {"learning_rte": 0.1}})");
  try {
    load_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rte"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("alignment"), std::string::npos);
  }
}

TEST(ApplyOverrides, SeedOverrideReseedsDerivedDefaults) {
  std::string path = fresh_dir("cfg_ovr") + "/cfg.json";
  write_file(path, R"({"seed": 10})");
  RunConfig cfg = load_config(path);
  ConfigOverrides o;
  o.seed = 77;
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.world_gen.seed, 77u);
  EXPECT_EQ(cfg.alignment.seed, 77u);

  // Seeds the file pinned separately stay pinned.
  write_file(path, R"({"seed": 10, "world": {"seed": 3},
                       "alignment": {"seed": 4}})");
  cfg = load_config(path);
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.world_gen.seed, 3u);
  EXPECT_EQ(cfg.alignment.seed, 4u);
}

TEST(ApplyOverrides, FlagsLandAndAreRangeChecked) {
  RunConfig cfg;
  ConfigOverrides o;
  o.out_dir = "elsewhere";
  o.parallelism = 3;
  o.budget = 6;
  o.topk = 2;
  o.corpus_path = "c.jsonl";
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.out_dir, "elsewhere");
  EXPECT_EQ(cfg.parallelism, 3);
  EXPECT_EQ(cfg.budget, 6);
  EXPECT_EQ(cfg.topk, 2);
  EXPECT_EQ(cfg.corpus_path, "c.jsonl");

  ConfigOverrides bad;
  bad.topk = 0;
  EXPECT_EQ(code_of([&] { apply_overrides(cfg, bad); }),
            ErrorCode::ConfigError);
}

TEST(ExitCodes, GroupedByFailureClass) {
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::BackendUnavailable), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::NotSimulated), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::NoAnswerProduced), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::IoFailure), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::MalformedTags), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::MissingArtifacts), 4);
}

// ---- stage plumbing ----

RunConfig pipeline_config(const std::string& out_dir) {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.out_dir = out_dir;
  cfg.parallelism = 1;
  cfg.budget = 4;
  cfg.topk = 3;
  cfg.world_gen.n_questions = 48;
  cfg.world_gen.seed = 11;
  cfg.world_gen.retrieval_success_prob = 0.9;
  cfg.backend_weights.weights = {2.0, 1.0, -1.5};
  cfg.alignment.epochs = 2;
  cfg.alignment.batch_size = 8;
  cfg.alignment.seed = 11;
  cfg.report.max_rounds = 2;
  cfg.report.episodes_per_round = 20;
  return cfg;
}

void run_full_pipeline(const RunConfig& cfg) {
  ASSERT_EQ(cli::cmd_genworld(cfg), 0);
  ASSERT_EQ(cli::cmd_run(cfg), 0);
  ASSERT_EQ(cli::cmd_diagnose(cfg), 0);
  ASSERT_EQ(cli::cmd_build_prefs(cfg), 0);
  ASSERT_EQ(cli::cmd_align(cfg), 0);
  ASSERT_EQ(cli::cmd_report(cfg), 0);
}

TEST(Pipeline, EndToEndProducesEveryArtifact) {
  RunConfig cfg = pipeline_config(fresh_dir("pipe_e2e"));
  run_full_pipeline(cfg);

  for (const char* name :
       {"world.json", "trajectories.jsonl", "diagnoses.jsonl", "report.json",
        "stepwise.csv", "strata_difficulty.csv", "strata_category.csv",
        "strata_supporting_facts.csv", "roc_search.csv", "roc_answer.csv",
        "prefs.jsonl", "aligned_params.json", "loss_trace.csv",
        "budget_sweep.csv", "consolidated.json"}) {
    EXPECT_TRUE(fs::exists(cfg.out_dir + "/" + name)) << name;
  }

  WorldSpec world = read_world(cfg.resolved_world_path());
  EXPECT_EQ(world.questions.size(), 48u);

  auto trajs = read_trajectory_log(cfg.out_dir + "/trajectories.jsonl");
  ASSERT_EQ(trajs.size(), 48u);
  std::size_t n_points = 0;
  for (const Trajectory& t : trajs) {
    t.validate(cfg.budget);
    n_points += t.steps.size();
  }

  auto diags = read_diagnosis_log(cfg.out_dir + "/diagnoses.jsonl");
  EXPECT_EQ(diags.size(), n_points);

  // Both error modes show up under the mixed policy, so the dataset splits
  // into over and under pairs that together cover the full set.
  auto all = load_dataset(cfg.out_dir + "/prefs.jsonl");
  ASSERT_GT(all.size(), 0u);
  ASSERT_EQ(cli::cmd_build_prefs(cfg, "", PairFilter::OverOnly), 0);
  ASSERT_EQ(cli::cmd_build_prefs(cfg, "", PairFilter::UnderOnly), 0);
  auto over = load_dataset(cfg.out_dir + "/prefs_over.jsonl");
  auto under = load_dataset(cfg.out_dir + "/prefs_under.jsonl");
  EXPECT_GT(over.size(), 0u);
  EXPECT_GT(under.size(), 0u);
  EXPECT_EQ(over.size() + under.size(), all.size());
  for (const DatasetRecord& r : over) {
    EXPECT_NE(r.id.find(":over_search"), std::string::npos) << r.id;
  }
  for (const DatasetRecord& r : under) {
    EXPECT_NE(r.id.find(":under_search"), std::string::npos) << r.id;
  }

  PolicyParams aligned =
      read_aligned_params(cfg.out_dir + "/aligned_params.json");
  for (double w : aligned.weights) EXPECT_TRUE(std::isfinite(w));

  // The budget sweep covers rounds 0..max_rounds, one row per budget.
  std::istringstream sweep(read_file(cfg.out_dir + "/budget_sweep.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(sweep, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "max_rounds,em,f1,asq");
  EXPECT_EQ(lines[1].substr(0, 2), "0,");
  EXPECT_EQ(lines[3].substr(0, 2), "2,");

  nlohmann::json consolidated =
      nlohmann::json::parse(read_file(cfg.out_dir + "/consolidated.json"));
  ASSERT_TRUE(consolidated.contains("report"));
  EXPECT_TRUE(consolidated["report"].contains("em"));
  EXPECT_TRUE(consolidated["report"].contains("entropy_auc"));
  EXPECT_TRUE(consolidated.contains("stepwise"));
  EXPECT_TRUE(consolidated.contains("strata"));
  EXPECT_TRUE(consolidated.contains("budget_sweep"));
  EXPECT_EQ(consolidated["budget_sweep"].size(), 3u);
}

TEST(Pipeline, ArtifactsAreByteIdenticalAcrossThreadCounts) {
  RunConfig a = pipeline_config(fresh_dir("pipe_det_a"));
  RunConfig b = pipeline_config(fresh_dir("pipe_det_b"));
  b.parallelism = 2;
  run_full_pipeline(a);
  run_full_pipeline(b);
  for (const char* name :
       {"world.json", "trajectories.jsonl", "diagnoses.jsonl", "prefs.jsonl",
        "aligned_params.json", "loss_trace.csv", "report.json"}) {
    EXPECT_EQ(read_file(a.out_dir + "/" + name),
              read_file(b.out_dir + "/" + name))
        << name;
  }
}

TEST(Pipeline, DiagnoseAcceptsAnExplicitTrajectoryLog) {
  RunConfig src = pipeline_config(fresh_dir("pipe_src"));
  ASSERT_EQ(cli::cmd_genworld(src), 0);
  ASSERT_EQ(cli::cmd_run(src), 0);

  RunConfig dst = pipeline_config(fresh_dir("pipe_dst"));
  ASSERT_EQ(cli::cmd_genworld(dst), 0);
  ASSERT_EQ(cli::cmd_diagnose(dst, src.out_dir + "/trajectories.jsonl"), 0);
  EXPECT_TRUE(fs::exists(dst.out_dir + "/diagnoses.jsonl"));
}

TEST(Pipeline, ReportWithoutArtifactsIsMissingArtifacts) {
  RunConfig cfg = pipeline_config(fresh_dir("pipe_empty"));
  EXPECT_EQ(code_of([&] { cli::cmd_report(cfg); }),
            ErrorCode::MissingArtifacts);
}

TEST(Pipeline, ReportComparisonTableFromVariantReports) {
  RunConfig cfg = pipeline_config(fresh_dir("pipe_cmp"));
  run_full_pipeline(cfg);

  std::string other = fresh_dir("pipe_cmp_other");
  write_file(other + "/report.json",
             R"({"em": 0.5, "f1": 0.6, "acc": 0.5, "asq": 1.5,
                 "total_time_s": 9.0, "osr": 0.1, "usr": 0.2})");
  cfg.report.variants = {
      {"mine", cfg.out_dir + "/report.json"},
      {"other", other + "/report.json"},
      {"ghost", other + "/does_not_exist.json"},
  };
  ASSERT_EQ(cli::cmd_report(cfg), 0);

  std::istringstream csv(read_file(cfg.out_dir + "/comparison.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);  // the missing variant is skipped
  EXPECT_EQ(lines[0], "variant,em,f1,acc,asq,total_time_s,osr,usr");
  EXPECT_EQ(lines[1].substr(0, 5), "mine,");
  EXPECT_EQ(lines[2], "other,0.5,0.6,0.5,1.5,9.0,0.1,0.2");
}

TEST(Pipeline, RemoteContextDemandsItsInputs) {
  RunConfig cfg;
  cfg.backend_kind = BackendKind::Remote;
  EXPECT_EQ(code_of([&] { cli::make_context(cfg); }), ErrorCode::ConfigError);
  cfg.corpus_path = "corpus.jsonl";
  EXPECT_EQ(code_of([&] { cli::make_context(cfg); }), ErrorCode::ConfigError);
  cfg.questions_path = "questions.jsonl";
  EXPECT_EQ(code_of([&] { cli::make_context(cfg); }), ErrorCode::ConfigError);
}

TEST(Pipeline, AlignRequiresTheSimulatedBackend) {
  RunConfig cfg = pipeline_config(fresh_dir("pipe_remote_align"));
  cfg.backend_kind = BackendKind::Remote;
  EXPECT_EQ(code_of([&] { cli::cmd_align(cfg); }), ErrorCode::ConfigError);
}

TEST(Pipeline, MissingWorldSurfacesAsIoFailure) {
  RunConfig cfg = pipeline_config(fresh_dir("pipe_noworld"));
  EXPECT_EQ(code_of([&] { cli::cmd_run(cfg); }), ErrorCode::IoFailure);
}

TEST(Pipeline, DatasetPathTracksFilter) {
  RunConfig cfg;
  cfg.out_dir = "x";
  EXPECT_EQ(cli::dataset_path_for(cfg, PairFilter::All), "x/prefs.jsonl");
  EXPECT_EQ(cli::dataset_path_for(cfg, PairFilter::OverOnly),
            "x/prefs_over.jsonl");
  EXPECT_EQ(cli::dataset_path_for(cfg, PairFilter::UnderOnly),
            "x/prefs_under.jsonl");
}

}  // namespace
}  // namespace das
