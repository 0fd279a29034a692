#include "das/preference.hpp"

#include <set>
#include <unordered_map>

namespace das {

const char* pref_error_type_name(PrefErrorType t) {
  return t == PrefErrorType::OverSearch ? "over_search" : "under_search";
}

PrefErrorType pref_error_type_from_name(const std::string& name) {
  if (name == "over_search") return PrefErrorType::OverSearch;
  if (name == "under_search") return PrefErrorType::UnderSearch;
  fail(ErrorCode::IoFailure, "unknown error_type '" + name + "'");
}

PairFilter pair_filter_from_name(const std::string& name) {
  if (name == "all") return PairFilter::All;
  if (name == "over") return PairFilter::OverOnly;
  if (name == "under") return PairFilter::UnderOnly;
  fail(ErrorCode::ConfigError,
       "unknown filter '" + name + "' (expected all, over, or under)");
}

namespace {

void check_source(const DiagnosisRecord& d, const Trajectory& source) {
  if (d.question_id != source.question_id) {
    fail(ErrorCode::DanglingDiagnosis,
         "diagnosis for '" + d.question_id + "' paired with trajectory '" +
             source.question_id + "'");
  }
  if (d.step_index < 0 ||
      d.step_index >= static_cast<int>(source.steps.size())) {
    fail(ErrorCode::DanglingDiagnosis,
         d.question_id + ": diagnosis step " + std::to_string(d.step_index) +
             " outside the trajectory");
  }
}

}  // namespace

PreferencePair build_over_search_pair(const DiagnosisRecord& d,
                                      const Trajectory& source) {
  if (d.verdict != Verdict::OverSearch || !d.counterfactual ||
      d.counterfactual->kind != InterventionKind::ForcedAnswer) {
    fail(ErrorCode::WrongVerdict,
         d.question_id + ": over-search pair needs an OverSearch diagnosis "
                         "with forced-answer evidence");
  }
  check_source(d, source);
  PreferencePair p;
  p.question_id = d.question_id;
  p.step_index = d.step_index;
  p.state = truncate_at(source, d.step_index);
  p.chosen = {Action::answer(d.counterfactual->answer)};
  for (std::size_t i = d.step_index; i < source.steps.size(); ++i) {
    p.rejected.push_back(source.steps[i].action);
  }
  p.error_type = PrefErrorType::OverSearch;
  return p;
}

std::optional<PreferencePair> build_under_search_pair(
    const DiagnosisRecord& d, const Trajectory& source) {
  if (d.verdict != Verdict::UnderSearch) {
    fail(ErrorCode::WrongVerdict,
         d.question_id + ": under-search pair needs an UnderSearch diagnosis");
  }
  check_source(d, source);
  // No corrective evidence (budget was gone) or a correction that still got
  // the answer wrong teaches nothing preferable; skip.
  if (!d.counterfactual ||
      d.counterfactual->kind != InterventionKind::ForcedSearch ||
      !d.counterfactual->correct) {
    return std::nullopt;
  }
  PreferencePair p;
  p.question_id = d.question_id;
  p.step_index = d.step_index;
  p.state = truncate_at(source, d.step_index);
  for (const Step& s : d.counterfactual->continuation) {
    p.chosen.push_back(s.action);
  }
  p.rejected = {d.factual_action};
  p.error_type = PrefErrorType::UnderSearch;
  return p;
}

std::vector<PreferencePair> build_pairs(
    const std::vector<DiagnosisRecord>& diagnoses,
    const std::vector<Trajectory>& trajectories,
    std::vector<std::string>* warnings) {
  std::unordered_map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id.emplace(t.question_id, &t);

  std::vector<PreferencePair> pairs;
  for (const DiagnosisRecord& d : diagnoses) {
    auto it = by_id.find(d.question_id);
    if (it == by_id.end()) {
      fail(ErrorCode::DanglingDiagnosis,
           "diagnosis for unknown question '" + d.question_id + "'");
    }
    switch (d.verdict) {
      case Verdict::OverSearch:
        pairs.push_back(build_over_search_pair(d, *it->second));
        break;
      case Verdict::UnderSearch: {
        auto p = build_under_search_pair(d, *it->second);
        if (p) {
          pairs.push_back(std::move(*p));
        } else if (warnings) {
          warnings->push_back(d.question_id + " step " +
                              std::to_string(d.step_index) +
                              ": under-search point skipped, no successful "
                              "correction");
        }
        break;
      }
      case Verdict::EffectiveSearch:
      case Verdict::CorrectAnswer:
        break;  // correct behaviour, nothing to prefer against
    }
  }
  return pairs;
}

DatasetRecord to_dataset_record(const PreferencePair& p) {
  DatasetRecord r;
  r.question_id = p.question_id;
  r.step_index = p.step_index;
  r.error_type = p.error_type;
  r.id = p.question_id + ":" + std::to_string(p.step_index) + ":" +
         pref_error_type_name(p.error_type);
  r.x = serialize_state(p.state);
  r.chosen = serialize_actions(p.chosen);
  r.rejected = serialize_actions(p.rejected);
  return r;
}

std::size_t emit_dataset(const std::vector<PreferencePair>& pairs,
                         const std::string& path, PairFilter filter) {
  std::vector<nlohmann::json> lines;
  std::set<std::string> seen;
  for (const PreferencePair& p : pairs) {
    if (filter == PairFilter::OverOnly &&
        p.error_type != PrefErrorType::OverSearch) {
      continue;
    }
    if (filter == PairFilter::UnderOnly &&
        p.error_type != PrefErrorType::UnderSearch) {
      continue;
    }
    DatasetRecord r = to_dataset_record(p);
    if (!seen.insert(r.id).second) continue;  // first occurrence wins
    lines.push_back({{"id", r.id},
                     {"x", r.x},
                     {"chosen", r.chosen},
                     {"rejected", r.rejected},
                     {"error_type", pref_error_type_name(r.error_type)},
                     {"question_id", r.question_id},
                     {"step_index", r.step_index}});
  }
  write_jsonl(path, lines);
  return lines.size();
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::vector<DatasetRecord> out;
  for (const auto& j : read_jsonl(path)) {
    DatasetRecord r;
    try {
      r.id = j.at("id").get<std::string>();
      r.x = j.at("x").get<std::string>();
      r.chosen = j.at("chosen").get<std::string>();
      r.rejected = j.at("rejected").get<std::string>();
      r.error_type =
          pref_error_type_from_name(j.at("error_type").get<std::string>());
      r.question_id = j.at("question_id").get<std::string>();
      r.step_index = j.at("step_index").get<int>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoFailure, path + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PreferencePair> attach_states(
    const std::vector<DatasetRecord>& records,
    const std::vector<Trajectory>& trajectories) {
  std::unordered_map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id.emplace(t.question_id, &t);
  std::vector<PreferencePair> pairs;
  pairs.reserve(records.size());
  for (const DatasetRecord& r : records) {
    auto it = by_id.find(r.question_id);
    if (it == by_id.end()) {
      fail(ErrorCode::DanglingDiagnosis,
           "dataset row '" + r.id + "' has no source trajectory");
    }
    if (r.step_index < 0 ||
        r.step_index > static_cast<int>(it->second->steps.size())) {
      fail(ErrorCode::DanglingDiagnosis,
           "dataset row '" + r.id + "' step outside the trajectory");
    }
    PreferencePair p;
    p.question_id = r.question_id;
    p.step_index = r.step_index;
    p.state = truncate_at(*it->second, r.step_index);
    p.chosen = parse_action_sequence(r.chosen);
    p.rejected = parse_action_sequence(r.rejected);
    p.error_type = r.error_type;
    if (p.chosen.empty() || p.rejected.empty()) {
      fail(ErrorCode::IoFailure,
           "dataset row '" + r.id + "' has an empty continuation");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace das
