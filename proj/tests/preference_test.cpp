#include "das/preference.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "das/error.hpp"
#include "das/metrics.hpp"

namespace das {
namespace {

// Factual trajectory for q0: redundant search at step 0, then a correct
// answer. The over-search diagnosis at step 0 carries the counterfactual
// immediate answer.
Trajectory over_search_traj() {
  Trajectory t;
  t.question_id = "q0";
  t.question = "over question";
  t.gold_answers = {"entity 0"};
  t.steps = {
      Step{0, "look", Action::search("needless query"),
           {Chunk{"f1", "some text", ""}}, 0.4},
      Step{1, "", Action::answer("entity 0"), {}, 0.2},
  };
  return t;
}

DiagnosisRecord over_search_diag() {
  DiagnosisRecord d;
  d.question_id = "q0";
  d.step_index = 0;
  d.factual_action = Action::search("needless query");
  d.verdict = Verdict::OverSearch;
  d.inferred_k = KnowledgeLabel::Sufficient;
  d.counterfactual =
      InterventionResult{InterventionKind::ForcedAnswer, true, "entity 0", {}};
  return d;
}

// Factual trajectory for q1: premature wrong answer at step 0. The
// under-search diagnosis carries a successful corrective continuation.
Trajectory under_search_traj() {
  Trajectory t;
  t.question_id = "q1";
  t.question = "under question";
  t.gold_answers = {"entity 1"};
  t.steps = {Step{0, "", Action::answer("unknown"), {}, 0.1}};
  return t;
}

DiagnosisRecord under_search_diag(bool corrected = true,
                                  bool with_evidence = true) {
  DiagnosisRecord d;
  d.question_id = "q1";
  d.step_index = 0;
  d.factual_action = Action::answer("unknown");
  d.verdict = Verdict::UnderSearch;
  d.inferred_k = KnowledgeLabel::Insufficient;
  if (with_evidence) {
    d.counterfactual = InterventionResult{
        InterventionKind::ForcedSearch,
        corrected,
        "",
        {Step{0, "", Action::search("fact query"),
              {Chunk{"f2", "fact text", ""}}, 0.3},
         Step{1, "", Action::answer(corrected ? "entity 1" : "still wrong"),
              {}, 0.1}}};
  }
  return d;
}

TEST(OverSearchPair, PrefersImmediateAnswerOverFactualSuffix) {
  PreferencePair p = build_over_search_pair(over_search_diag(),
                                            over_search_traj());
  EXPECT_EQ(p.question_id, "q0");
  EXPECT_EQ(p.step_index, 0);
  EXPECT_TRUE(p.state.steps.empty());
  ASSERT_EQ(p.chosen.size(), 1u);
  EXPECT_EQ(p.chosen[0], Action::answer("entity 0"));
  ASSERT_EQ(p.rejected.size(), 2u);
  EXPECT_EQ(p.rejected[0], Action::search("needless query"));
  EXPECT_EQ(p.rejected[1], Action::answer("entity 0"));
  EXPECT_EQ(p.error_type, PrefErrorType::OverSearch);
  // The chosen answer is gold-correct by construction.
  EXPECT_TRUE(exact_match(p.chosen[0].text, {"entity 0"}));
}

TEST(OverSearchPair, MidTrajectoryStateCarriesPrefix) {
  Trajectory t = over_search_traj();
  // Re-diagnose at step 1 is not an over-search (it is the answer); instead
  // extend the trajectory with a second redundant search at step 1.
  t.steps = {
      t.steps[0],
      Step{1, "", Action::search("second needless"), {}, 0.4},
      Step{2, "", Action::answer("entity 0"), {}, 0.2},
  };
  DiagnosisRecord d = over_search_diag();
  d.step_index = 1;
  d.factual_action = Action::search("second needless");
  PreferencePair p = build_over_search_pair(d, t);
  ASSERT_EQ(p.state.steps.size(), 1u);
  EXPECT_EQ(p.state.steps[0].action, Action::search("needless query"));
  ASSERT_EQ(p.rejected.size(), 2u);
  EXPECT_EQ(p.rejected[0], Action::search("second needless"));
}

TEST(OverSearchPair, WrongVerdictRejected) {
  DiagnosisRecord d = under_search_diag();
  try {
    build_over_search_pair(d, under_search_traj());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongVerdict);
  }
  // OverSearch verdict but missing forced-answer evidence is also unusable.
  DiagnosisRecord no_evidence = over_search_diag();
  no_evidence.counterfactual.reset();
  EXPECT_THROW(build_over_search_pair(no_evidence, over_search_traj()), Error);
}

TEST(OverSearchPair, MismatchedSourceRejected) {
  try {
    build_over_search_pair(over_search_diag(), under_search_traj());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingDiagnosis);
  }
}

TEST(UnderSearchPair, PrefersCorrectiveContinuation) {
  auto p = build_under_search_pair(under_search_diag(), under_search_traj());
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->question_id, "q1");
  ASSERT_EQ(p->chosen.size(), 2u);
  EXPECT_EQ(p->chosen[0], Action::search("fact query"));
  EXPECT_EQ(p->chosen[1], Action::answer("entity 1"));
  ASSERT_EQ(p->rejected.size(), 1u);
  EXPECT_EQ(p->rejected[0], Action::answer("unknown"));
  EXPECT_EQ(p->error_type, PrefErrorType::UnderSearch);
}

TEST(UnderSearchPair, SkipsFailedCorrections) {
  EXPECT_FALSE(build_under_search_pair(under_search_diag(false),
                                       under_search_traj())
                   .has_value());
  EXPECT_FALSE(build_under_search_pair(under_search_diag(true, false),
                                       under_search_traj())
                   .has_value());
}

TEST(UnderSearchPair, WrongVerdictRejected) {
  try {
    build_under_search_pair(over_search_diag(), over_search_traj());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongVerdict);
  }
}

TEST(BuildPairs, DispatchesByVerdictAndWarnsOnSkips) {
  std::vector<Trajectory> trajs = {over_search_traj(), under_search_traj()};
  DiagnosisRecord effective;
  effective.question_id = "q0";
  effective.step_index = 0;
  effective.factual_action = Action::search("needless query");
  effective.verdict = Verdict::EffectiveSearch;
  effective.inferred_k = KnowledgeLabel::Insufficient;

  std::vector<std::string> warnings;
  auto pairs = build_pairs(
      {over_search_diag(), under_search_diag(false), effective}, trajs,
      &warnings);
  ASSERT_EQ(pairs.size(), 1u);  // over pair; failed correction skipped
  EXPECT_EQ(pairs[0].error_type, PrefErrorType::OverSearch);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("q1"), std::string::npos);

  auto both = build_pairs({over_search_diag(), under_search_diag()}, trajs);
  EXPECT_EQ(both.size(), 2u);
}

TEST(BuildPairs, DanglingDiagnosisRejected) {
  DiagnosisRecord d = over_search_diag();
  d.question_id = "ghost";
  try {
    build_pairs({d}, {over_search_traj()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingDiagnosis);
  }
}

TEST(DatasetRecord, SerializesStateAndContinuations) {
  PreferencePair p = build_over_search_pair(over_search_diag(),
                                            over_search_traj());
  DatasetRecord r = to_dataset_record(p);
  EXPECT_EQ(r.id, "q0:0:over_search");
  EXPECT_EQ(r.x, "Question: over question\n");
  EXPECT_EQ(r.chosen, "<answer>entity 0</answer>");
  EXPECT_EQ(r.rejected,
            "<search>needless query</search>\n<answer>entity 0</answer>");
  EXPECT_EQ(r.question_id, "q0");
  EXPECT_EQ(r.step_index, 0);
}

TEST(EmitDataset, FilterSelectsAblationSubsets) {
  std::vector<Trajectory> trajs = {over_search_traj(), under_search_traj()};
  auto pairs = build_pairs({over_search_diag(), under_search_diag()}, trajs);
  ASSERT_EQ(pairs.size(), 2u);

  std::string base = testing::TempDir();
  EXPECT_EQ(emit_dataset(pairs, base + "/all.jsonl", PairFilter::All), 2u);
  EXPECT_EQ(emit_dataset(pairs, base + "/over.jsonl", PairFilter::OverOnly),
            1u);
  EXPECT_EQ(emit_dataset(pairs, base + "/under.jsonl", PairFilter::UnderOnly),
            1u);

  auto over_only = load_dataset(base + "/over.jsonl");
  ASSERT_EQ(over_only.size(), 1u);
  EXPECT_EQ(over_only[0].error_type, PrefErrorType::OverSearch);
}

TEST(EmitDataset, DeduplicatesByIdFirstWins) {
  std::vector<Trajectory> trajs = {over_search_traj()};
  auto pairs = build_pairs({over_search_diag(), over_search_diag()}, trajs);
  ASSERT_EQ(pairs.size(), 2u);
  std::string path = testing::TempDir() + "/dedup.jsonl";
  EXPECT_EQ(emit_dataset(pairs, path, PairFilter::All), 1u);
  EXPECT_EQ(load_dataset(path).size(), 1u);
}

TEST(EmitDataset, EmptyListWritesValidEmptyFile) {
  std::string path = testing::TempDir() + "/empty.jsonl";
  EXPECT_EQ(emit_dataset({}, path, PairFilter::All), 0u);
  EXPECT_TRUE(load_dataset(path).empty());
}

TEST(EmitDataset, RoundTripReproducesRecords) {
  std::vector<Trajectory> trajs = {over_search_traj(), under_search_traj()};
  auto pairs = build_pairs({over_search_diag(), under_search_diag()}, trajs);
  std::string path = testing::TempDir() + "/roundtrip.jsonl";
  emit_dataset(pairs, path, PairFilter::All);
  auto records = load_dataset(path);
  ASSERT_EQ(records.size(), pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(records[i], to_dataset_record(pairs[i]));
  }
}

TEST(AttachStates, RebuildsScoreablePairsFromLogs) {
  std::vector<Trajectory> trajs = {over_search_traj(), under_search_traj()};
  auto pairs = build_pairs({over_search_diag(), under_search_diag()}, trajs);
  std::string path = testing::TempDir() + "/attach.jsonl";
  emit_dataset(pairs, path, PairFilter::All);

  auto rebuilt = attach_states(load_dataset(path), trajs);
  ASSERT_EQ(rebuilt.size(), pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(rebuilt[i].question_id, pairs[i].question_id);
    EXPECT_EQ(rebuilt[i].step_index, pairs[i].step_index);
    EXPECT_EQ(rebuilt[i].chosen, pairs[i].chosen);
    EXPECT_EQ(rebuilt[i].rejected, pairs[i].rejected);
    EXPECT_EQ(rebuilt[i].error_type, pairs[i].error_type);
    EXPECT_EQ(rebuilt[i].state.question_id, pairs[i].state.question_id);
    EXPECT_EQ(rebuilt[i].state.steps, pairs[i].state.steps);
  }
}

TEST(AttachStates, UnknownSourceRejected) {
  std::vector<Trajectory> trajs = {over_search_traj()};
  auto pairs = build_pairs({over_search_diag()}, trajs);
  std::string path = testing::TempDir() + "/attach_bad.jsonl";
  emit_dataset(pairs, path, PairFilter::All);
  auto records = load_dataset(path);

  records[0].question_id = "ghost";
  records[0].id = "ghost:0:over_search";
  try {
    attach_states(records, trajs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingDiagnosis);
  }
}

TEST(PairFilter, ParsesCliNames) {
  EXPECT_EQ(pair_filter_from_name("all"), PairFilter::All);
  EXPECT_EQ(pair_filter_from_name("over"), PairFilter::OverOnly);
  EXPECT_EQ(pair_filter_from_name("under"), PairFilter::UnderOnly);
  EXPECT_THROW(pair_filter_from_name("everything"), Error);
}

TEST(PrefErrorType, NameRoundTrip) {
  EXPECT_STREQ(pref_error_type_name(PrefErrorType::OverSearch), "over_search");
  EXPECT_STREQ(pref_error_type_name(PrefErrorType::UnderSearch),
               "under_search");
  EXPECT_EQ(pref_error_type_from_name("over_search"), PrefErrorType::OverSearch);
  EXPECT_EQ(pref_error_type_from_name("under_search"),
            PrefErrorType::UnderSearch);
  EXPECT_THROW(pref_error_type_from_name("sideways"), Error);
}

}  // namespace
}  // namespace das
