#include "das/intervention.hpp"

#include "das/metrics.hpp"
#include "das/parallel.hpp"

namespace das {

const char* intervention_kind_name(InterventionKind k) {
  return k == InterventionKind::ForcedAnswer ? "forced_answer"
                                             : "forced_search";
}

InterventionKind intervention_kind_from_name(const std::string& name) {
  if (name == "forced_answer") return InterventionKind::ForcedAnswer;
  if (name == "forced_search") return InterventionKind::ForcedSearch;
  fail(ErrorCode::IoFailure, "unknown intervention kind '" + name + "'");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::OverSearch: return "OverSearch";
    case Verdict::EffectiveSearch: return "EffectiveSearch";
    case Verdict::UnderSearch: return "UnderSearch";
    case Verdict::CorrectAnswer: return "CorrectAnswer";
  }
  return "CorrectAnswer";
}

Verdict verdict_from_name(const std::string& name) {
  if (name == "OverSearch") return Verdict::OverSearch;
  if (name == "EffectiveSearch") return Verdict::EffectiveSearch;
  if (name == "UnderSearch") return Verdict::UnderSearch;
  if (name == "CorrectAnswer") return Verdict::CorrectAnswer;
  fail(ErrorCode::IoFailure, "unknown verdict '" + name + "'");
}

DiagnosisRecord to_record(const Diagnosis& d) {
  DiagnosisRecord r;
  r.question_id = d.point.question_id;
  r.step_index = d.point.step_index;
  r.factual_action = d.point.factual_action;
  r.verdict = d.verdict;
  r.inferred_k = d.inferred_k;
  r.counterfactual = d.evidence;
  return r;
}

InterventionEngine::InterventionEngine(Policy& policy, const Index& index,
                                       EngineConfig cfg)
    : policy_(&policy), index_(&index), cfg_(cfg) {
  if (cfg_.budget < 0) fail(ErrorCode::ConfigError, "engine: budget < 0");
  if (cfg_.topk < 1) fail(ErrorCode::ConfigError, "engine: topk < 1");
}

Rng InterventionEngine::stream_for(const DecisionPoint& p,
                                   const char* purpose) const {
  return derive_stream(cfg_.seed, p.question_id,
                       static_cast<uint64_t>(p.step_index), purpose);
}

InterventionResult InterventionEngine::intervene_answer(
    const DecisionState& state,
    const std::vector<std::string>& gold_answers) const {
  Rng rng = derive_stream(cfg_.seed, state.question_id, state.steps.size(),
                          "do_answer");
  InterventionResult r;
  r.kind = InterventionKind::ForcedAnswer;
  r.answer = policy_->forced_answer(state, rng);
  r.correct = exact_match(r.answer, gold_answers);
  return r;
}

InterventionResult InterventionEngine::intervene_search(
    const DecisionState& state, const std::vector<std::string>& gold_answers,
    int remaining_budget) const {
  if (remaining_budget < 1) {
    fail(ErrorCode::ConfigError,
         "intervene_search: remaining_budget must be >= 1");
  }
  Rng rng = derive_stream(cfg_.seed, state.question_id, state.steps.size(),
                          "do_search");
  DecisionState working = state;
  std::size_t suffix_from = working.steps.size();

  Step forced;
  forced.index = static_cast<int>(working.steps.size());
  forced.action = policy_->forced_search(working, rng);
  forced.evidence = index_->retrieve(forced.action.text, cfg_.topk);
  working.steps.push_back(std::move(forced));

  // Roll the policy forward freely; the forced search already spent one of
  // the remaining searches.
  RolloutConfig rc;
  rc.budget = remaining_budget;
  rc.topk = cfg_.topk;
  rc.sim_time = cfg_.sim_time;
  continue_episode(*policy_, *index_, working, 1, rc, rng);

  InterventionResult r;
  r.kind = InterventionKind::ForcedSearch;
  r.continuation.assign(working.steps.begin() + suffix_from,
                        working.steps.end());
  r.correct = exact_match(working.steps.back().action.text, gold_answers);
  return r;
}

Diagnosis InterventionEngine::diagnose(const DecisionPoint& point) const {
  Diagnosis d;
  d.point = point;
  if (point.factual_action.kind == ActionKind::Search) {
    InterventionResult res = intervene_answer(point.state, point.gold_answers);
    d.verdict = res.correct ? Verdict::OverSearch : Verdict::EffectiveSearch;
    d.inferred_k =
        res.correct ? KnowledgeLabel::Sufficient : KnowledgeLabel::Insufficient;
    d.evidence = std::move(res);
    return d;
  }

  if (exact_match(point.factual_action.text, point.gold_answers)) {
    d.verdict = Verdict::CorrectAnswer;
    d.inferred_k = KnowledgeLabel::Sufficient;
    return d;
  }

  d.verdict = Verdict::UnderSearch;
  d.inferred_k = KnowledgeLabel::Insufficient;
  int searches_taken = 0;
  for (const Step& s : point.state.steps) {
    if (s.action.kind == ActionKind::Search) ++searches_taken;
  }
  int remaining = cfg_.budget - searches_taken;
  if (remaining >= 1) {
    // Whether the corrective rollout rescues the answer or not, the verdict
    // stays UnderSearch; the evidence just records how it went.
    d.evidence =
        intervene_search(point.state, point.gold_answers, remaining);
  }
  return d;
}

std::vector<Diagnosis> InterventionEngine::diagnose_all(
    const std::vector<Trajectory>& trajectories, int threads) const {
  std::vector<DecisionPoint> points;
  for (const Trajectory& t : trajectories) {
    for (DecisionPoint& p : decision_points(t)) {
      points.push_back(std::move(p));
    }
  }
  std::vector<Diagnosis> out(points.size());
  par::for_each_index(points.size(), threads, [&](std::size_t i) {
    out[i] = diagnose(points[i]);
  });
  return out;
}

// ---- diagnosis log ----

nlohmann::json diagnosis_to_json(const DiagnosisRecord& d) {
  nlohmann::json j;
  j["question_id"] = d.question_id;
  j["step_index"] = d.step_index;
  j["factual_action"] = action_to_json(d.factual_action);
  j["verdict"] = verdict_name(d.verdict);
  j["inferred_k"] = knowledge_label_name(d.inferred_k);
  if (d.counterfactual) {
    nlohmann::json c;
    c["kind"] = intervention_kind_name(d.counterfactual->kind);
    c["correct"] = d.counterfactual->correct;
    c["n_steps"] = d.counterfactual->n_steps();
    if (d.counterfactual->kind == InterventionKind::ForcedAnswer) {
      c["answer"] = d.counterfactual->answer;
    } else {
      nlohmann::json steps = nlohmann::json::array();
      for (const Step& s : d.counterfactual->continuation) {
        steps.push_back(step_to_json(s));
      }
      c["steps"] = std::move(steps);
    }
    j["counterfactual"] = std::move(c);
  } else {
    j["counterfactual"] = nullptr;
  }
  return j;
}

DiagnosisRecord diagnosis_from_json(const nlohmann::json& j) {
  DiagnosisRecord d;
  try {
    d.question_id = j.at("question_id").get<std::string>();
    d.step_index = j.at("step_index").get<int>();
    d.factual_action = action_from_json(j.at("factual_action"));
    d.verdict = verdict_from_name(j.at("verdict").get<std::string>());
    d.inferred_k =
        knowledge_label_from_name(j.at("inferred_k").get<std::string>());
    if (j.contains("counterfactual") && !j["counterfactual"].is_null()) {
      const auto& c = j["counterfactual"];
      InterventionResult r;
      r.kind = intervention_kind_from_name(c.at("kind").get<std::string>());
      r.correct = c.at("correct").get<bool>();
      if (r.kind == InterventionKind::ForcedAnswer) {
        r.answer = c.at("answer").get<std::string>();
      } else {
        for (const auto& sj : c.at("steps")) {
          r.continuation.push_back(step_from_json(sj));
        }
      }
      d.counterfactual = std::move(r);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, std::string("diagnosis record: ") + e.what());
  }
  return d;
}

void write_diagnosis_log(const std::string& path,
                         const std::vector<DiagnosisRecord>& records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const DiagnosisRecord& d : records) {
    lines.push_back(diagnosis_to_json(d));
  }
  write_jsonl(path, lines);
}

std::vector<DiagnosisRecord> read_diagnosis_log(const std::string& path) {
  std::vector<DiagnosisRecord> out;
  for (const auto& j : read_jsonl(path)) {
    out.push_back(diagnosis_from_json(j));
  }
  return out;
}

}  // namespace das
