#pragma once

// Evaluation over trajectory logs and diagnosis logs: answer quality (EM,
// F1, ACC), cost (average searches, time), boundary-error rates (OSR, USR),
// step-wise and stratified breakdowns, entropy ROC curves, and the two
// knowledge probes.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "das/intervention.hpp"
#include "das/policy.hpp"

namespace das {

/// SQuAD-style normalization: lowercase, strip punctuation, drop the
/// articles a/an/the, collapse whitespace.
std::string normalize_answer(const std::string& s);

/// Exact match after normalization, against any gold answer.
bool exact_match(const std::string& prediction,
                 const std::vector<std::string>& gold_answers);

/// Token-level F1 on normalized multisets; the multi-gold overload takes
/// the max over golds. An empty token multiset on either side scores 0.
double token_f1(const std::string& prediction, const std::string& gold);
double token_f1(const std::string& prediction,
                const std::vector<std::string>& gold_answers);

enum class AccMode {
  ExactMatch,   // ACC == EM
  Containment,  // normalized gold is a substring of normalized prediction
};

struct MetricsReport {
  std::size_t n_questions = 0;
  double em = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
  double asq = 0.0;          // average searches per question
  double total_time_s = 0.0;
  // Boundary-error rates over diagnosed decision points. Denominators are
  // max(1, count) so empty logs stay well-defined.
  std::size_t n_search_decisions = 0;
  std::size_t n_answer_decisions = 0;
  std::size_t n_over_search = 0;
  std::size_t n_under_search = 0;
  double osr = 0.0;
  double usr = 0.0;
};

/// Aggregate a run. Every diagnosis must reference a supplied trajectory
/// and a step inside it (DanglingDiagnosis otherwise). An empty diagnosis
/// list is fine: answer metrics still compute, rates read 0.
MetricsReport compute_report(const std::vector<Trajectory>& trajectories,
                             const std::vector<DiagnosisRecord>& diagnoses,
                             AccMode acc_mode = AccMode::ExactMatch);

struct StepRates {
  int step_index = 0;
  std::size_t n_search_decisions = 0;
  std::size_t n_over_search = 0;
  std::size_t n_answer_decisions = 0;
  std::size_t n_under_search = 0;
  double osr = 0.0;
  double usr = 0.0;
};

/// Rates bucketed by step index, ascending; indices nobody reached are
/// omitted rather than zero-filled.
std::vector<StepRates> stepwise_rates(
    const std::vector<DiagnosisRecord>& diagnoses);

enum class StratifyBy { Difficulty, Category, SupportingFacts };

/// Per-stratum reports in canonical order (Easy/Medium/Hard,
/// Comparison/Bridge, 2/3/4/>=5; supporting-fact counts below 2 fold into
/// the "2" bucket). Empty strata are omitted, so question counts sum to the
/// total. Throws MissingMeta when a trajectory lacks the field.
std::vector<std::pair<std::string, MetricsReport>> stratified_report(
    const std::vector<Trajectory>& trajectories,
    const std::vector<DiagnosisRecord>& diagnoses, StratifyBy by,
    AccMode acc_mode = AccMode::ExactMatch);

struct RocCurve {
  // Points ordered from threshold +inf down; (fpr, tpr) starts at (0, 0)
  // and ends at (1, 1). thresholds[i] is the score at which point i+1 was
  // reached (+inf for the origin).
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

/// Threshold-sweep ROC with trapezoidal AUC; tied scores collapse into one
/// sweep point, which makes the area equal the Mann-Whitney statistic with
/// the half-tie convention. labels are 1 for positive. Throws
/// DegenerateLabels unless both classes are present.
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels);

struct KnowledgeProbeResult {
  bool recall_correct = false;   // recall probe answered the question right
  bool claims_knowledge = false; // meta probe said Yes
};

/// Run both probes at a Search decision point (the query being the factual
/// search). Throws UnparsableProbe when the meta reply starts with neither
/// yes nor no, ConfigError when the point is not a Search decision.
KnowledgeProbeResult knowledge_probe(Policy& policy, const DecisionPoint& point,
                                     uint64_t seed);

// ---- emitters ----

nlohmann::json report_to_json(const MetricsReport& r);
void write_stepwise_csv(const std::string& path,
                        const std::vector<StepRates>& rates);
void write_strata_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, MetricsReport>>& strata);
void write_roc_csv(const std::string& path, const RocCurve& curve);

}  // namespace das
