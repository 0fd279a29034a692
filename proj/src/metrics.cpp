#include "das/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

namespace das {

namespace {

std::vector<std::string> normalized_tokens(const std::string& s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    cleaned += static_cast<char>(std::tolower(c));
  }
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : cleaned) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (auto& t : tokens) {
    if (t == "a" || t == "an" || t == "the") continue;
    kept.push_back(std::move(t));
  }
  return kept;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::string normalize_answer(const std::string& s) {
  return join_tokens(normalized_tokens(s));
}

bool exact_match(const std::string& prediction,
                 const std::vector<std::string>& gold_answers) {
  std::string p = normalize_answer(prediction);
  for (const std::string& g : gold_answers) {
    if (p == normalize_answer(g)) return true;
  }
  return false;
}

double token_f1(const std::string& prediction, const std::string& gold) {
  auto pt = normalized_tokens(prediction);
  auto gt = normalized_tokens(gold);
  if (pt.empty() || gt.empty()) return 0.0;
  std::unordered_map<std::string, int> gold_counts;
  for (const auto& t : gt) ++gold_counts[t];
  int common = 0;
  for (const auto& t : pt) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      ++common;
      --it->second;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(pt.size());
  double recall = static_cast<double>(common) / static_cast<double>(gt.size());
  return 2.0 * precision * recall / (precision + recall);
}

double token_f1(const std::string& prediction,
                const std::vector<std::string>& gold_answers) {
  double best = 0.0;
  for (const std::string& g : gold_answers) {
    best = std::max(best, token_f1(prediction, g));
  }
  return best;
}

namespace {

bool answer_contains_gold(const std::string& prediction,
                          const std::vector<std::string>& gold_answers) {
  std::string p = normalize_answer(prediction);
  for (const std::string& g : gold_answers) {
    std::string ng = normalize_answer(g);
    if (!ng.empty() && p.find(ng) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

MetricsReport compute_report(const std::vector<Trajectory>& trajectories,
                             const std::vector<DiagnosisRecord>& diagnoses,
                             AccMode acc_mode) {
  MetricsReport r;
  r.n_questions = trajectories.size();

  std::unordered_map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id.emplace(t.question_id, &t);

  double em_sum = 0.0, f1_sum = 0.0, acc_sum = 0.0, asq_sum = 0.0;
  for (const Trajectory& t : trajectories) {
    const Step* answer = t.final_answer_step();
    if (answer) {
      bool em = exact_match(answer->action.text, t.gold_answers);
      em_sum += em ? 1.0 : 0.0;
      f1_sum += token_f1(answer->action.text, t.gold_answers);
      bool acc = acc_mode == AccMode::ExactMatch
                     ? em
                     : answer_contains_gold(answer->action.text, t.gold_answers);
      acc_sum += acc ? 1.0 : 0.0;
    }
    asq_sum += static_cast<double>(t.search_count());
    r.total_time_s += t.wall_time_s;
  }
  if (r.n_questions > 0) {
    double n = static_cast<double>(r.n_questions);
    r.em = em_sum / n;
    r.f1 = f1_sum / n;
    r.acc = acc_sum / n;
    r.asq = asq_sum / n;
  }

  for (const DiagnosisRecord& d : diagnoses) {
    auto it = by_id.find(d.question_id);
    if (it == by_id.end()) {
      fail(ErrorCode::DanglingDiagnosis,
           "diagnosis for unknown question '" + d.question_id + "'");
    }
    if (d.step_index < 0 ||
        d.step_index >= static_cast<int>(it->second->steps.size())) {
      fail(ErrorCode::DanglingDiagnosis,
           d.question_id + ": diagnosis step " + std::to_string(d.step_index) +
               " outside the trajectory");
    }
    if (d.factual_action.kind == ActionKind::Search) {
      ++r.n_search_decisions;
      if (d.verdict == Verdict::OverSearch) ++r.n_over_search;
    } else {
      ++r.n_answer_decisions;
      if (d.verdict == Verdict::UnderSearch) ++r.n_under_search;
    }
  }
  r.osr = static_cast<double>(r.n_over_search) /
          static_cast<double>(std::max<std::size_t>(1, r.n_search_decisions));
  r.usr = static_cast<double>(r.n_under_search) /
          static_cast<double>(std::max<std::size_t>(1, r.n_answer_decisions));
  return r;
}

std::vector<StepRates> stepwise_rates(
    const std::vector<DiagnosisRecord>& diagnoses) {
  std::map<int, StepRates> buckets;
  for (const DiagnosisRecord& d : diagnoses) {
    StepRates& b = buckets[d.step_index];
    b.step_index = d.step_index;
    if (d.factual_action.kind == ActionKind::Search) {
      ++b.n_search_decisions;
      if (d.verdict == Verdict::OverSearch) ++b.n_over_search;
    } else {
      ++b.n_answer_decisions;
      if (d.verdict == Verdict::UnderSearch) ++b.n_under_search;
    }
  }
  std::vector<StepRates> out;
  out.reserve(buckets.size());
  for (auto& [step, b] : buckets) {
    (void)step;
    b.osr = static_cast<double>(b.n_over_search) /
            static_cast<double>(std::max<std::size_t>(1, b.n_search_decisions));
    b.usr = static_cast<double>(b.n_under_search) /
            static_cast<double>(std::max<std::size_t>(1, b.n_answer_decisions));
    out.push_back(b);
  }
  return out;
}

namespace {

std::string stratum_label(const Trajectory& t, StratifyBy by) {
  switch (by) {
    case StratifyBy::Difficulty:
      if (!t.meta.difficulty) {
        fail(ErrorCode::MissingMeta, t.question_id + ": no difficulty");
      }
      return difficulty_name(*t.meta.difficulty);
    case StratifyBy::Category:
      if (!t.meta.category) {
        fail(ErrorCode::MissingMeta, t.question_id + ": no category");
      }
      return category_name(*t.meta.category);
    case StratifyBy::SupportingFacts: {
      if (!t.meta.n_supporting_facts) {
        fail(ErrorCode::MissingMeta, t.question_id + ": no n_supporting_facts");
      }
      int n = *t.meta.n_supporting_facts;
      if (n <= 2) return "2";
      if (n == 3) return "3";
      if (n == 4) return "4";
      return ">=5";
    }
  }
  fail(ErrorCode::ConfigError, "bad StratifyBy");
}

std::vector<std::string> canonical_strata(StratifyBy by) {
  switch (by) {
    case StratifyBy::Difficulty: return {"Easy", "Medium", "Hard"};
    case StratifyBy::Category: return {"Comparison", "Bridge"};
    case StratifyBy::SupportingFacts: return {"2", "3", "4", ">=5"};
  }
  return {};
}

}  // namespace

std::vector<std::pair<std::string, MetricsReport>> stratified_report(
    const std::vector<Trajectory>& trajectories,
    const std::vector<DiagnosisRecord>& diagnoses, StratifyBy by,
    AccMode acc_mode) {
  std::map<std::string, std::vector<Trajectory>> trajs_by_stratum;
  std::unordered_map<std::string, std::string> stratum_of_question;
  for (const Trajectory& t : trajectories) {
    std::string label = stratum_label(t, by);
    stratum_of_question[t.question_id] = label;
    trajs_by_stratum[label].push_back(t);
  }
  std::map<std::string, std::vector<DiagnosisRecord>> diags_by_stratum;
  for (const DiagnosisRecord& d : diagnoses) {
    auto it = stratum_of_question.find(d.question_id);
    if (it == stratum_of_question.end()) {
      fail(ErrorCode::DanglingDiagnosis,
           "diagnosis for unknown question '" + d.question_id + "'");
    }
    diags_by_stratum[it->second].push_back(d);
  }
  std::vector<std::pair<std::string, MetricsReport>> out;
  for (const std::string& label : canonical_strata(by)) {
    auto it = trajs_by_stratum.find(label);
    if (it == trajs_by_stratum.end()) continue;
    out.emplace_back(label,
                     compute_report(it->second, diags_by_stratum[label],
                                    acc_mode));
  }
  return out;
}

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::ConfigError, "roc: scores and labels differ in length");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l) ++n_pos;
    else ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0) {
    fail(ErrorCode::DegenerateLabels,
         "roc needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  double auc = 0.0;
  while (i < order.size()) {
    // Sweep all samples sharing this score in one move; the diagonal cut
    // through a tie block is what realizes the half-tie convention.
    double score = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == score) {
      if (labels[order[j]]) ++tp;
      else ++fp;
      ++j;
    }
    double prev_fpr = curve.fpr.back();
    double prev_tpr = curve.tpr.back();
    double next_fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    double next_tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc += (next_fpr - prev_fpr) * (next_tpr + prev_tpr) / 2.0;
    curve.thresholds.push_back(score);
    curve.fpr.push_back(next_fpr);
    curve.tpr.push_back(next_tpr);
    i = j;
  }
  curve.auc = auc;
  return curve;
}

KnowledgeProbeResult knowledge_probe(Policy& policy, const DecisionPoint& point,
                                     uint64_t seed) {
  if (point.factual_action.kind != ActionKind::Search) {
    fail(ErrorCode::ConfigError,
         "knowledge_probe: decision point is not a Search decision");
  }
  Rng rng = derive_stream(seed, point.question_id,
                          static_cast<uint64_t>(point.step_index), "probe");
  KnowledgeProbeResult result;
  std::string recall =
      policy.recall_probe(point.state, point.factual_action.text, rng);
  result.recall_correct = exact_match(recall, point.gold_answers);

  std::string meta =
      trim(policy.meta_probe(point.state, point.factual_action.text, rng));
  std::string head;
  for (char c : meta) {
    if (head.size() >= 3) break;
    head += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (head.rfind("yes", 0) == 0) {
    result.claims_knowledge = true;
  } else if (head.rfind("no", 0) == 0) {
    result.claims_knowledge = false;
  } else {
    fail(ErrorCode::UnparsableProbe,
         point.question_id + ": meta probe reply '" + meta.substr(0, 32) +
             "' is neither Yes nor No");
  }
  return result;
}

// ---- emitters ----

namespace {

/// Shortest round-trip decimal for a double, so CSV bytes are deterministic.
std::string num(double v) {
  return nlohmann::json(v).dump();
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["n_questions"] = r.n_questions;
  j["em"] = r.em;
  j["f1"] = r.f1;
  j["acc"] = r.acc;
  j["asq"] = r.asq;
  j["total_time_s"] = r.total_time_s;
  j["n_search_decisions"] = r.n_search_decisions;
  j["n_answer_decisions"] = r.n_answer_decisions;
  j["n_over_search"] = r.n_over_search;
  j["n_under_search"] = r.n_under_search;
  j["osr"] = r.osr;
  j["usr"] = r.usr;
  return j;
}

void write_stepwise_csv(const std::string& path,
                        const std::vector<StepRates>& rates) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << "step,n_search_decisions,n_over_search,osr,"
         "n_answer_decisions,n_under_search,usr\n";
  for (const StepRates& r : rates) {
    out << r.step_index << "," << r.n_search_decisions << ","
        << r.n_over_search << "," << num(r.osr) << "," << r.n_answer_decisions
        << "," << r.n_under_search << "," << num(r.usr) << "\n";
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

void write_strata_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, MetricsReport>>& strata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << "stratum,n_questions,em,f1,acc,asq,total_time_s,osr,usr\n";
  for (const auto& [label, r] : strata) {
    out << label << "," << r.n_questions << "," << num(r.em) << ","
        << num(r.f1) << "," << num(r.acc) << "," << num(r.asq) << ","
        << num(r.total_time_s) << "," << num(r.osr) << "," << num(r.usr)
        << "\n";
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    if (std::isinf(curve.thresholds[i])) {
      out << "inf";
    } else {
      out << num(curve.thresholds[i]);
    }
    out << "," << num(curve.fpr[i]) << "," << num(curve.tpr[i]) << "\n";
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

}  // namespace das
