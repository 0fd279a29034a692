#include "das/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "das/dpo.hpp"
#include "das/parallel.hpp"
#include "das/remote.hpp"

namespace das::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    fail(ErrorCode::IoFailure,
         "cannot create out dir '" + cfg.out_dir + "': " + ec.message());
  }
}

std::string traj_path(const RunConfig& cfg) {
  return cfg.out_dir + "/trajectories.jsonl";
}

std::string diag_path(const RunConfig& cfg) {
  return cfg.out_dir + "/diagnoses.jsonl";
}

std::vector<QuestionSpec> read_questions(const std::string& path) {
  std::vector<QuestionSpec> out;
  for (const auto& j : read_jsonl(path)) {
    QuestionSpec q;
    try {
      q.question_id = j.at("question_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
      if (j.contains("meta")) q.meta = meta_from_json(j["meta"]);
    } catch (const json::exception& e) {
      fail(ErrorCode::IoFailure, path + ": " + e.what());
    }
    if (q.gold_answers.empty()) {
      fail(ErrorCode::IoFailure,
           path + ": question '" + q.question_id + "' has no gold answers");
    }
    out.push_back(std::move(q));
  }
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoFailure, path + ": " + e.what());
  }
}

/// Entropy ROC inputs for one decision kind: scores are recorded decision
/// entropies, positives are the diagnosed boundary errors.
struct RocInputs {
  std::vector<double> scores;
  std::vector<int> labels;
};

RocInputs roc_inputs(const std::vector<Trajectory>& trajs,
                     const std::vector<DiagnosisRecord>& records,
                     ActionKind kind) {
  std::unordered_map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajs) by_id.emplace(t.question_id, &t);
  RocInputs in;
  for (const DiagnosisRecord& d : records) {
    if (d.factual_action.kind != kind) continue;
    auto it = by_id.find(d.question_id);
    if (it == by_id.end()) continue;
    const auto& steps = it->second->steps;
    if (d.step_index < 0 || d.step_index >= static_cast<int>(steps.size())) {
      continue;
    }
    const auto& entropy = steps[d.step_index].decision_entropy;
    if (!entropy) continue;
    bool positive = kind == ActionKind::Search
                        ? d.verdict == Verdict::OverSearch
                        : d.verdict == Verdict::UnderSearch;
    in.scores.push_back(*entropy);
    in.labels.push_back(positive ? 1 : 0);
  }
  return in;
}

bool has_both_classes(const RocInputs& in) {
  bool pos = false, neg = false;
  for (int l : in.labels) (l ? pos : neg) = true;
  return pos && neg;
}

json stepwise_to_json(const std::vector<StepRates>& rates) {
  json arr = json::array();
  for (const StepRates& r : rates) {
    arr.push_back({{"step", r.step_index},
                   {"n_search_decisions", r.n_search_decisions},
                   {"n_over_search", r.n_over_search},
                   {"osr", r.osr},
                   {"n_answer_decisions", r.n_answer_decisions},
                   {"n_under_search", r.n_under_search},
                   {"usr", r.usr}});
  }
  return arr;
}

json strata_to_json(
    const std::vector<std::pair<std::string, MetricsReport>>& strata) {
  json arr = json::array();
  for (const auto& [label, r] : strata) {
    json row = report_to_json(r);
    row["stratum"] = label;
    arr.push_back(std::move(row));
  }
  return arr;
}

bool all_have(const std::vector<Trajectory>& trajs, StratifyBy by) {
  for (const Trajectory& t : trajs) {
    switch (by) {
      case StratifyBy::Difficulty:
        if (!t.meta.difficulty) return false;
        break;
      case StratifyBy::Category:
        if (!t.meta.category) return false;
        break;
      case StratifyBy::SupportingFacts:
        if (!t.meta.n_supporting_facts) return false;
        break;
    }
  }
  return true;
}

/// Shared by diagnose and report: all the derived views of one
/// (trajectories, diagnoses) pair, written into out_dir.
json write_analysis(const RunConfig& cfg, const std::vector<Trajectory>& trajs,
                    const std::vector<DiagnosisRecord>& records) {
  MetricsReport report = compute_report(trajs, records, cfg.acc_mode);
  json report_json = report_to_json(report);

  auto steps = stepwise_rates(records);
  write_stepwise_csv(cfg.out_dir + "/stepwise.csv", steps);

  json strata_json = json::object();
  const std::pair<StratifyBy, const char*> dims[] = {
      {StratifyBy::Difficulty, "difficulty"},
      {StratifyBy::Category, "category"},
      {StratifyBy::SupportingFacts, "supporting_facts"}};
  for (const auto& [by, name] : dims) {
    if (!all_have(trajs, by)) {
      std::cerr << "note: some trajectories lack " << name
                << " metadata, skipping that breakdown\n";
      continue;
    }
    auto strata = stratified_report(trajs, records, by, cfg.acc_mode);
    write_strata_csv(cfg.out_dir + "/strata_" + name + ".csv", strata);
    strata_json[name] = strata_to_json(strata);
  }

  json roc_json = json::object();
  const std::pair<ActionKind, const char*> kinds[] = {
      {ActionKind::Search, "search"}, {ActionKind::Answer, "answer"}};
  for (const auto& [kind, name] : kinds) {
    RocInputs in = roc_inputs(trajs, records, kind);
    if (in.scores.empty() || !has_both_classes(in)) {
      std::cerr << "note: not enough labeled " << name
                << " decisions for an entropy ROC\n";
      continue;
    }
    RocCurve curve = roc_auc(in.scores, in.labels);
    write_roc_csv(cfg.out_dir + "/roc_" + name + ".csv", curve);
    roc_json[name] = curve.auc;
  }
  if (!roc_json.empty()) report_json["entropy_auc"] = roc_json;

  json out;
  out["report"] = report_json;
  out["stepwise"] = stepwise_to_json(steps);
  out["strata"] = strata_json;
  return out;
}

}  // namespace

std::unique_ptr<RunContext> make_context(const RunConfig& cfg) {
  auto ctx = std::make_unique<RunContext>();
  if (cfg.backend_kind == BackendKind::Simulated) {
    ctx->simulated = true;
    ctx->world = read_world(cfg.resolved_world_path());
    ctx->index = Index::build(world_corpus(ctx->world));
    SimulatedPolicyConfig pc;
    pc.params = cfg.backend_weights;
    pc.t_max = std::max(1, cfg.budget);
    ctx->policy = std::make_unique<SimulatedPolicy>(ctx->world, pc);
    ctx->questions.reserve(ctx->world.questions.size());
    for (const WorldQuestion& q : ctx->world.questions) {
      ctx->questions.push_back(question_spec(q));
    }
  } else {
    ctx->simulated = false;
    if (cfg.corpus_path.empty()) {
      fail(ErrorCode::ConfigError, "remote backend needs corpus_path");
    }
    if (cfg.questions_path.empty()) {
      fail(ErrorCode::ConfigError, "remote backend needs questions_path");
    }
    if (cfg.remote.url.empty()) {
      fail(ErrorCode::ConfigError, "remote backend needs backend.remote.url");
    }
    ctx->index = Index::build(read_corpus(cfg.corpus_path));
    ctx->policy = std::make_unique<RemotePolicy>(cfg.remote);
    ctx->questions = read_questions(cfg.questions_path);
  }
  return ctx;
}

std::vector<Trajectory> run_cohort(const RunConfig& cfg, RunContext& ctx) {
  RolloutConfig rc;
  rc.budget = cfg.budget;
  rc.topk = cfg.topk;
  rc.seed = cfg.seed;
  rc.sim_time = cfg.sim_time;
  rc.measure_wall_clock = !ctx.simulated;
  return par::map_indexed<Trajectory>(
      ctx.questions.size(), cfg.parallelism, [&](std::size_t i) {
        return rollout(*ctx.policy, ctx.index, ctx.questions[i], rc);
      });
}

int cmd_genworld(const RunConfig& cfg) {
  WorldSpec world = generate_world(cfg.world_gen);
  ensure_out_dir(cfg);
  std::string path = cfg.resolved_world_path();
  write_world(path, world);
  std::cout << "world: " << world.questions.size() << " questions, "
            << world.fact_texts.size() << " facts -> " << path << "\n";
  return 0;
}

int cmd_run(const RunConfig& cfg) {
  auto ctx = make_context(cfg);
  std::vector<Trajectory> trajs = run_cohort(cfg, *ctx);
  ensure_out_dir(cfg);
  write_trajectory_log(traj_path(cfg), trajs);
  MetricsReport r = compute_report(trajs, {}, cfg.acc_mode);
  std::cout << "run: " << r.n_questions << " episodes, em=" << r.em
            << " f1=" << r.f1 << " asq=" << r.asq
            << " time_s=" << r.total_time_s << " -> " << traj_path(cfg)
            << "\n";
  return 0;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& trajectory_log) {
  std::string source =
      trajectory_log.empty() ? traj_path(cfg) : trajectory_log;
  std::vector<Trajectory> trajs = read_trajectory_log(source);
  auto ctx = make_context(cfg);

  EngineConfig ec;
  ec.budget = cfg.budget;
  ec.topk = cfg.topk;
  ec.seed = cfg.seed;
  ec.sim_time = cfg.sim_time;
  InterventionEngine engine(*ctx->policy, ctx->index, ec);

  std::vector<Diagnosis> diags = engine.diagnose_all(trajs, cfg.parallelism);
  std::vector<DiagnosisRecord> records;
  records.reserve(diags.size());
  for (const Diagnosis& d : diags) records.push_back(to_record(d));

  ensure_out_dir(cfg);
  write_diagnosis_log(diag_path(cfg), records);
  json analysis = write_analysis(cfg, trajs, records);
  write_json_file(cfg.out_dir + "/report.json", analysis["report"]);

  const json& r = analysis["report"];
  std::cout << "diagnose: " << records.size() << " decision points, osr="
            << r["osr"].dump() << " usr=" << r["usr"].dump() << " -> "
            << diag_path(cfg) << "\n";
  return 0;
}

std::string dataset_path_for(const RunConfig& cfg, PairFilter filter) {
  switch (filter) {
    case PairFilter::All: return cfg.out_dir + "/prefs.jsonl";
    case PairFilter::OverOnly: return cfg.out_dir + "/prefs_over.jsonl";
    case PairFilter::UnderOnly: return cfg.out_dir + "/prefs_under.jsonl";
  }
  return cfg.out_dir + "/prefs.jsonl";
}

int cmd_build_prefs(const RunConfig& cfg, const std::string& diagnosis_log,
                    PairFilter filter) {
  std::string source = diagnosis_log.empty() ? diag_path(cfg) : diagnosis_log;
  std::vector<DiagnosisRecord> records = read_diagnosis_log(source);
  std::vector<Trajectory> trajs = read_trajectory_log(traj_path(cfg));

  std::vector<std::string> warnings;
  std::vector<PreferencePair> pairs = build_pairs(records, trajs, &warnings);
  for (const std::string& w : warnings) std::cerr << "note: " << w << "\n";

  ensure_out_dir(cfg);
  std::string out_path = dataset_path_for(cfg, filter);
  std::size_t written = emit_dataset(pairs, out_path, filter);

  std::size_t over = 0, under = 0;
  for (const PreferencePair& p : pairs) {
    (p.error_type == PrefErrorType::OverSearch ? over : under) += 1;
  }
  std::cout << "build-prefs: " << written << " pairs written (built over="
            << over << " under=" << under << ") -> " << out_path << "\n";
  if (written == 0) {
    std::cerr << "warning: empty preference dataset\n";
  }
  return 0;
}

int cmd_align(const RunConfig& cfg, const std::string& dataset_path) {
  if (cfg.backend_kind != BackendKind::Simulated) {
    fail(ErrorCode::ConfigError,
         "align scores continuations through the simulated world; backend "
         "must be simulated");
  }
  std::string source =
      dataset_path.empty() ? dataset_path_for(cfg, PairFilter::All)
                           : dataset_path;
  std::vector<DatasetRecord> records = load_dataset(source);
  std::vector<Trajectory> trajs = read_trajectory_log(traj_path(cfg));
  auto ctx = make_context(cfg);

  std::vector<PreferencePair> pairs = attach_states(records, trajs);
  SequenceScorer scorer(ctx->world, ctx->index, cfg.topk,
                        std::max(1, cfg.budget));
  AlignResult result = align(scorer, cfg.backend_weights, cfg.backend_weights,
                             pairs, cfg.alignment, cfg.parallelism);

  ensure_out_dir(cfg);
  write_aligned_params(cfg.out_dir + "/aligned_params.json", result.params,
                       cfg.alignment);
  write_loss_trace(cfg.out_dir + "/loss_trace.csv", result.epoch_loss);

  std::cout << "align: " << pairs.size() << " pairs, " << cfg.alignment.epochs
            << " epochs, final loss="
            << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back())
            << " weights=[" << result.params.weights[0] << ", "
            << result.params.weights[1] << ", " << result.params.weights[2]
            << "]\n";
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  std::vector<std::string> missing;
  for (const std::string& p : {traj_path(cfg), diag_path(cfg)}) {
    if (!fs::exists(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string what = "report needs artifacts that do not exist:";
    for (const std::string& p : missing) what += " " + p;
    fail(ErrorCode::MissingArtifacts, what);
  }

  std::vector<Trajectory> trajs = read_trajectory_log(traj_path(cfg));
  std::vector<DiagnosisRecord> records = read_diagnosis_log(diag_path(cfg));
  json consolidated = write_analysis(cfg, trajs, records);

  // Budget sweep: fresh Monte-Carlo cohorts at every search budget from 0 to
  // max_rounds, same policy, seeded per episode. Simulated backends only.
  if (cfg.backend_kind == BackendKind::Simulated &&
      fs::exists(cfg.resolved_world_path())) {
    auto ctx = make_context(cfg);
    json sweep = json::array();
    std::ofstream csv(cfg.out_dir + "/budget_sweep.csv",
                      std::ios::binary | std::ios::trunc);
    if (!csv) {
      fail(ErrorCode::IoFailure, "cannot open budget_sweep.csv for writing");
    }
    csv << "max_rounds,em,f1,asq\n";
    int episodes = std::max(1, cfg.report.episodes_per_round);
    for (int rounds = 0; rounds <= cfg.report.max_rounds; ++rounds) {
      RolloutConfig rc;
      rc.budget = rounds;
      rc.topk = cfg.topk;
      rc.seed = cfg.seed;
      rc.sim_time = cfg.sim_time;
      std::vector<Trajectory> cohort = par::map_indexed<Trajectory>(
          static_cast<std::size_t>(episodes), cfg.parallelism,
          [&](std::size_t e) {
            RolloutConfig rce = rc;
            rce.stream_salt = e;
            const QuestionSpec& q = ctx->questions[e % ctx->questions.size()];
            return rollout(*ctx->policy, ctx->index, q, rce);
          });
      MetricsReport r = compute_report(cohort, {}, cfg.acc_mode);
      csv << rounds << "," << json(r.em).dump() << "," << json(r.f1).dump()
          << "," << json(r.asq).dump() << "\n";
      sweep.push_back({{"max_rounds", rounds},
                       {"em", r.em},
                       {"f1", r.f1},
                       {"asq", r.asq}});
    }
    if (!csv) fail(ErrorCode::IoFailure, "write failed: budget_sweep.csv");
    consolidated["budget_sweep"] = std::move(sweep);
  } else if (cfg.backend_kind != BackendKind::Simulated) {
    std::cerr << "note: budget sweep needs the simulated backend, skipping\n";
  }

  // Variant comparison from previously produced report files.
  if (!cfg.report.variants.empty()) {
    json rows = json::array();
    std::ofstream csv(cfg.out_dir + "/comparison.csv",
                      std::ios::binary | std::ios::trunc);
    if (!csv) {
      fail(ErrorCode::IoFailure, "cannot open comparison.csv for writing");
    }
    csv << "variant,em,f1,acc,asq,total_time_s,osr,usr\n";
    for (const ReportVariant& v : cfg.report.variants) {
      if (!fs::exists(v.report_path)) {
        std::cerr << "note: variant '" << v.name << "' report missing at "
                  << v.report_path << ", skipping\n";
        continue;
      }
      json r = read_json_file(v.report_path);
      csv << v.name;
      for (const char* key :
           {"em", "f1", "acc", "asq", "total_time_s", "osr", "usr"}) {
        csv << "," << (r.contains(key) ? r[key].dump() : "");
      }
      csv << "\n";
      r["variant"] = v.name;
      rows.push_back(std::move(r));
    }
    if (!csv) fail(ErrorCode::IoFailure, "write failed: comparison.csv");
    consolidated["variants"] = std::move(rows);
  }

  write_json_file(cfg.out_dir + "/consolidated.json", consolidated);
  std::cout << "report: consolidated " << trajs.size() << " trajectories, "
            << records.size() << " diagnoses -> " << cfg.out_dir
            << "/consolidated.json\n";
  return 0;
}

}  // namespace das::cli
