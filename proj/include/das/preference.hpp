#pragma once

// Turning diagnoses into preference pairs. An over-search decision prefers
// the counterfactual immediate answer over the factual search-and-continue
// suffix; an under-search decision prefers the corrective search sequence
// over the factual premature answer, and is skipped when the corrective
// rollout did not actually fix the answer.

#include <optional>
#include <string>
#include <vector>

#include "das/intervention.hpp"

namespace das {

enum class PrefErrorType { OverSearch, UnderSearch };

const char* pref_error_type_name(PrefErrorType t);
PrefErrorType pref_error_type_from_name(const std::string& name);

struct PreferencePair {
  std::string question_id;
  int step_index = 0;
  DecisionState state;            // x: the context at the decision
  std::vector<Action> chosen;     // y_c
  std::vector<Action> rejected;   // y_r
  PrefErrorType error_type = PrefErrorType::OverSearch;

  bool operator==(const PreferencePair&) const = default;
};

/// Over-search pair: chosen = [counterfactual Answer], rejected = the
/// factual suffix from the diagnosed step onward. Requires verdict
/// OverSearch with forced-answer evidence (WrongVerdict otherwise) and the
/// matching source trajectory.
PreferencePair build_over_search_pair(const DiagnosisRecord& d,
                                      const Trajectory& source);

/// Under-search pair: chosen = the corrective continuation's actions,
/// rejected = [the factual premature Answer]. Requires verdict UnderSearch
/// (WrongVerdict otherwise). Returns nullopt when there is no corrective
/// evidence or it failed to produce a correct answer.
std::optional<PreferencePair> build_under_search_pair(
    const DiagnosisRecord& d, const Trajectory& source);

/// All pairs from a diagnosis log. Skips (with optional warnings)
/// under-search points without successful corrections; other verdicts
/// produce no pairs by design. Throws DanglingDiagnosis when a diagnosis
/// has no source trajectory.
std::vector<PreferencePair> build_pairs(
    const std::vector<DiagnosisRecord>& diagnoses,
    const std::vector<Trajectory>& trajectories,
    std::vector<std::string>* warnings = nullptr);

enum class PairFilter { All, OverOnly, UnderOnly };

PairFilter pair_filter_from_name(const std::string& name);

/// One dataset line: both continuations as tagged text, the state rendered
/// the same way the backend would see it.
struct DatasetRecord {
  std::string id;  // "<question_id>:<step_index>:<error_type>"
  std::string x;
  std::string chosen;
  std::string rejected;
  PrefErrorType error_type = PrefErrorType::OverSearch;
  std::string question_id;
  int step_index = 0;

  bool operator==(const DatasetRecord&) const = default;
};

DatasetRecord to_dataset_record(const PreferencePair& p);

/// Write pairs (after filtering) as JSONL. Duplicate (question_id,
/// step_index, error_type) keys keep the first occurrence. Returns the
/// number of records written.
std::size_t emit_dataset(const std::vector<PreferencePair>& pairs,
                         const std::string& path, PairFilter filter);

std::vector<DatasetRecord> load_dataset(const std::string& path);

/// Rebuild scoreable pairs from dataset records plus the source
/// trajectories: states come from truncating at the recorded step,
/// continuations from re-parsing the tagged text.
std::vector<PreferencePair> attach_states(
    const std::vector<DatasetRecord>& records,
    const std::vector<Trajectory>& trajectories);

}  // namespace das
