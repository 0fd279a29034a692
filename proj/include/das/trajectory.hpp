#pragma once

// Episode data model for search agents plus the tagged text format
// (<think>/<search>/<answer>) they emit. Parsing is strict: lowercase tags,
// no nesting, at most one answer and nothing after it. Text outside tags is
// ignored so model chatter between blocks is harmless.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "das/chunk.hpp"
#include "das/error.hpp"

namespace das {

enum class ActionKind { Search, Answer };

const char* action_kind_name(ActionKind k);
ActionKind action_kind_from_name(const std::string& name);

struct Action {
  ActionKind kind = ActionKind::Search;
  std::string text;  // query text for Search, answer text for Answer

  static Action search(std::string query) {
    return Action{ActionKind::Search, std::move(query)};
  }
  static Action answer(std::string text) {
    return Action{ActionKind::Answer, std::move(text)};
  }
  bool operator==(const Action&) const = default;
};

struct Step {
  int index = 0;
  std::string think;            // may be empty
  Action action;
  std::vector<Chunk> evidence;  // retrieval results, Search steps only
  std::optional<double> decision_entropy;  // nats; absent when the backend
                                           // exposes no distribution
  bool operator==(const Step&) const = default;
};

enum class Difficulty { Easy, Medium, Hard };
enum class Category { Comparison, Bridge };

const char* difficulty_name(Difficulty d);
const char* category_name(Category c);
Difficulty difficulty_from_name(const std::string& name);
Category category_from_name(const std::string& name);

struct QuestionMeta {
  std::optional<Difficulty> difficulty;
  std::optional<Category> category;
  std::optional<int> n_supporting_facts;  // >= 1 when present

  bool operator==(const QuestionMeta&) const = default;
};

struct Trajectory {
  std::string question_id;
  std::string question;
  std::vector<std::string> gold_answers;  // non-empty
  QuestionMeta meta;
  std::vector<Step> steps;
  double wall_time_s = 0.0;

  int search_count() const;
  /// Final Answer step, or nullptr when the episode never answered.
  const Step* final_answer_step() const;
  /// Structural checks: contiguous indices, Answer only in final position,
  /// non-empty action text, search count within budget when given.
  void validate(std::optional<int> budget = std::nullopt) const;

  bool operator==(const Trajectory&) const = default;
};

/// What the agent had in front of it when it made the decision at some step:
/// the question plus every step strictly before it.
struct DecisionState {
  std::string question_id;
  std::string question;
  std::vector<Step> steps;

  bool operator==(const DecisionState&) const = default;
};

/// One Search/Answer decision lifted out of a trajectory, with enough
/// context carried along to diagnose it in isolation.
struct DecisionPoint {
  std::string question_id;
  int step_index = 0;
  DecisionState state;
  Action factual_action;
  std::vector<std::string> gold_answers;
  QuestionMeta meta;
};

/// Prefix of t strictly before step_index (0 gives the empty state).
DecisionState truncate_at(const Trajectory& t, int step_index);

/// Every step of the trajectory as a decision point, in step order.
std::vector<DecisionPoint> decision_points(const Trajectory& t);

/// Parse raw tagged text into a trajectory. Think blocks attach to the next
/// action; consecutive thinks concatenate with a newline; a trailing think
/// with no action after it is dropped (with a warning when `warnings` is
/// given). Tag text is whitespace-trimmed. Throws MalformedTags,
/// MultipleAnswers, or EmptyAction.
Trajectory parse_trajectory(const std::string& raw, std::string question_id,
                            std::string question,
                            std::vector<std::string> gold_answers,
                            QuestionMeta meta = {},
                            std::vector<std::string>* warnings = nullptr);

/// Parse a bare action sequence (search/answer tags only; think blocks are
/// ignored). Used for preference-dataset continuations.
std::vector<Action> parse_action_sequence(const std::string& raw);

/// Serialize steps back to tagged text. Evidence renders as an
/// <information> block after its search tag; parse_trajectory ignores those,
/// so serialize-then-parse reproduces the same think/action sequence.
std::string serialize_steps(const std::vector<Step>& steps);
std::string serialize_actions(const std::vector<Action>& actions);
/// "Question: ..." header plus the serialized prior steps.
std::string serialize_state(const DecisionState& s);

// ---- JSON (one object per line in log files) ----

nlohmann::json meta_to_json(const QuestionMeta& m);
QuestionMeta meta_from_json(const nlohmann::json& j);
nlohmann::json action_to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);
nlohmann::json step_to_json(const Step& s);
Step step_from_json(const nlohmann::json& j);
nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_trajectory_log(const std::string& path,
                          const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> read_trajectory_log(const std::string& path);

// Shared helpers for the other JSONL logs.
void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& records);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

std::string trim(const std::string& s);

}  // namespace das
