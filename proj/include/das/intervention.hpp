#pragma once

// Causal diagnosis of Search/Answer decisions. Each factual decision gets
// replayed under the opposite action:
//
//   factual Search  -> do(A := Answer). Counterfactual answer correct means
//                      the search was unnecessary (OverSearch, knowledge was
//                      Sufficient); wrong means it was earning its keep
//                      (EffectiveSearch, Insufficient).
//   factual Answer  -> correct answers need no probe (CorrectAnswer). A
//                      wrong answer is diagnosed UnderSearch and, budget
//                      permitting, do(A := Search) checks whether more
//                      searching would have rescued it.
//
// The inferred knowledge label always comes from the counterfactual outcome,
// never from peeking at the simulator's ground truth.

#include <cstdint>
#include <optional>
#include <vector>

#include "das/policy.hpp"

namespace das {

enum class InterventionKind { ForcedAnswer, ForcedSearch };
enum class Verdict { OverSearch, EffectiveSearch, UnderSearch, CorrectAnswer };

const char* intervention_kind_name(InterventionKind k);
InterventionKind intervention_kind_from_name(const std::string& name);
const char* verdict_name(Verdict v);
Verdict verdict_from_name(const std::string& name);

struct InterventionResult {
  InterventionKind kind = InterventionKind::ForcedAnswer;
  bool correct = false;
  std::string answer;          // ForcedAnswer: the counterfactual answer
  std::vector<Step> continuation;  // ForcedSearch: forced search + free suffix
  int n_steps() const {
    return kind == InterventionKind::ForcedAnswer
               ? 1
               : static_cast<int>(continuation.size());
  }
};

struct Diagnosis {
  DecisionPoint point;
  Verdict verdict;
  KnowledgeLabel inferred_k = KnowledgeLabel::Sufficient;
  std::optional<InterventionResult> evidence;  // absent for CorrectAnswer and
                                               // budget-starved UnderSearch
};

/// Flat, file-friendly form of a diagnosis. The counterfactual carries its
/// content (answer text / corrective steps) so downstream pair construction
/// can run from the log alone.
struct DiagnosisRecord {
  std::string question_id;
  int step_index = 0;
  Action factual_action;
  Verdict verdict = Verdict::CorrectAnswer;
  KnowledgeLabel inferred_k = KnowledgeLabel::Sufficient;
  std::optional<InterventionResult> counterfactual;
};

DiagnosisRecord to_record(const Diagnosis& d);

struct EngineConfig {
  int budget = 4;
  int topk = 3;
  uint64_t seed = 0;
  SimTimeModel sim_time;
};

class InterventionEngine {
 public:
  /// The policy must outlive the engine. The index is the same retrieval
  /// source the factual run used.
  InterventionEngine(Policy& policy, const Index& index, EngineConfig cfg);

  /// do(A := Answer) at the state. Never touches retrieval.
  InterventionResult intervene_answer(
      const DecisionState& state,
      const std::vector<std::string>& gold_answers) const;

  /// do(A := Search) at the state, then roll forward freely with
  /// remaining_budget searches allowed (the forced one included). Requires
  /// remaining_budget >= 1.
  InterventionResult intervene_search(
      const DecisionState& state, const std::vector<std::string>& gold_answers,
      int remaining_budget) const;

  Diagnosis diagnose(const DecisionPoint& point) const;

  /// Every decision point of every trajectory, in input order. Runs the
  /// points through the parallel layer; results are independent of thread
  /// count.
  std::vector<Diagnosis> diagnose_all(const std::vector<Trajectory>& trajectories,
                                      int threads = 1) const;

  const EngineConfig& config() const { return cfg_; }

 private:
  Rng stream_for(const DecisionPoint& p, const char* purpose) const;

  Policy* policy_;
  const Index* index_;
  EngineConfig cfg_;
};

// ---- diagnosis log (JSONL) ----

nlohmann::json diagnosis_to_json(const DiagnosisRecord& d);
DiagnosisRecord diagnosis_from_json(const nlohmann::json& j);
void write_diagnosis_log(const std::string& path,
                         const std::vector<DiagnosisRecord>& records);
std::vector<DiagnosisRecord> read_diagnosis_log(const std::string& path);

}  // namespace das
