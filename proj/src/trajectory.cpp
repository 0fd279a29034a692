#include "das/trajectory.hpp"

#include <fstream>
#include <sstream>

namespace das {

namespace {

enum class TagKind { Think, Search, Answer };

struct TagBlock {
  TagKind kind;
  std::string text;
};

constexpr const char* kOpenTags[3] = {"<think>", "<search>", "<answer>"};
constexpr const char* kCloseTags[3] = {"</think>", "</search>", "</answer>"};

/// Scan raw text left to right for the three tag kinds. Anything outside
/// tags is ignored. Unclosed or nested tags are grammar violations.
std::vector<TagBlock> scan_tag_blocks(const std::string& raw) {
  std::vector<TagBlock> blocks;
  std::size_t pos = 0;
  while (true) {
    std::size_t best = std::string::npos;
    int best_kind = -1;
    for (int k = 0; k < 3; ++k) {
      std::size_t at = raw.find(kOpenTags[k], pos);
      if (at != std::string::npos && (best == std::string::npos || at < best)) {
        best = at;
        best_kind = k;
      }
    }
    if (best_kind < 0) break;

    const std::string open = kOpenTags[best_kind];
    const std::string close = kCloseTags[best_kind];
    std::size_t content_begin = best + open.size();
    std::size_t close_at = raw.find(close, content_begin);
    if (close_at == std::string::npos) {
      fail(ErrorCode::MalformedTags, "unclosed " + open + " tag");
    }
    // Another opening tag before the close means nesting.
    for (int k = 0; k < 3; ++k) {
      std::size_t inner = raw.find(kOpenTags[k], content_begin);
      if (inner != std::string::npos && inner < close_at) {
        fail(ErrorCode::MalformedTags,
             std::string("nested ") + kOpenTags[k] + " inside " + open);
      }
    }
    blocks.push_back({static_cast<TagKind>(best_kind),
                      raw.substr(content_begin, close_at - content_begin)});
    pos = close_at + close.size();
  }
  return blocks;
}

void append_think(std::string& pending, const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) return;
  if (!pending.empty()) pending += "\n";
  pending += t;
}

}  // namespace

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

const char* action_kind_name(ActionKind k) {
  return k == ActionKind::Search ? "search" : "answer";
}

ActionKind action_kind_from_name(const std::string& name) {
  if (name == "search") return ActionKind::Search;
  if (name == "answer") return ActionKind::Answer;
  fail(ErrorCode::IoFailure, "unknown action kind '" + name + "'");
}

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Medium: return "Medium";
    case Difficulty::Hard: return "Hard";
  }
  return "Easy";
}

const char* category_name(Category c) {
  return c == Category::Comparison ? "Comparison" : "Bridge";
}

Difficulty difficulty_from_name(const std::string& name) {
  if (name == "Easy") return Difficulty::Easy;
  if (name == "Medium") return Difficulty::Medium;
  if (name == "Hard") return Difficulty::Hard;
  fail(ErrorCode::IoFailure, "unknown difficulty '" + name + "'");
}

Category category_from_name(const std::string& name) {
  if (name == "Comparison") return Category::Comparison;
  if (name == "Bridge") return Category::Bridge;
  fail(ErrorCode::IoFailure, "unknown category '" + name + "'");
}

int Trajectory::search_count() const {
  int n = 0;
  for (const Step& s : steps) {
    if (s.action.kind == ActionKind::Search) ++n;
  }
  return n;
}

const Step* Trajectory::final_answer_step() const {
  if (steps.empty()) return nullptr;
  const Step& last = steps.back();
  return last.action.kind == ActionKind::Answer ? &last : nullptr;
}

void Trajectory::validate(std::optional<int> budget) const {
  if (gold_answers.empty()) {
    fail(ErrorCode::IoFailure, question_id + ": gold_answers is empty");
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    if (s.index != static_cast<int>(i)) {
      fail(ErrorCode::IndexOutOfRange,
           question_id + ": step indices not contiguous at " +
               std::to_string(i));
    }
    if (trim(s.action.text).empty()) {
      fail(ErrorCode::EmptyAction,
           question_id + ": empty action text at step " + std::to_string(i));
    }
    bool last = i + 1 == steps.size();
    if (!last && s.action.kind == ActionKind::Answer) {
      fail(ErrorCode::MultipleAnswers,
           question_id + ": Answer before the final step");
    }
    if (s.action.kind == ActionKind::Answer && !s.evidence.empty()) {
      fail(ErrorCode::MalformedTags,
           question_id + ": evidence attached to an Answer step");
    }
  }
  if (budget && search_count() > *budget) {
    fail(ErrorCode::IndexOutOfRange,
         question_id + ": search count " + std::to_string(search_count()) +
             " exceeds budget " + std::to_string(*budget));
  }
}

DecisionState truncate_at(const Trajectory& t, int step_index) {
  if (step_index < 0 || step_index > static_cast<int>(t.steps.size())) {
    fail(ErrorCode::IndexOutOfRange,
         t.question_id + ": truncate_at(" + std::to_string(step_index) +
             ") outside 0.." + std::to_string(t.steps.size()));
  }
  DecisionState s;
  s.question_id = t.question_id;
  s.question = t.question;
  s.steps.assign(t.steps.begin(), t.steps.begin() + step_index);
  return s;
}

std::vector<DecisionPoint> decision_points(const Trajectory& t) {
  std::vector<DecisionPoint> points;
  points.reserve(t.steps.size());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    DecisionPoint p;
    p.question_id = t.question_id;
    p.step_index = static_cast<int>(i);
    p.state = truncate_at(t, static_cast<int>(i));
    p.factual_action = t.steps[i].action;
    p.gold_answers = t.gold_answers;
    p.meta = t.meta;
    points.push_back(std::move(p));
  }
  return points;
}

Trajectory parse_trajectory(const std::string& raw, std::string question_id,
                            std::string question,
                            std::vector<std::string> gold_answers,
                            QuestionMeta meta,
                            std::vector<std::string>* warnings) {
  Trajectory t;
  t.question_id = std::move(question_id);
  t.question = std::move(question);
  t.gold_answers = std::move(gold_answers);
  t.meta = meta;

  std::string pending_think;
  bool answered = false;
  for (const TagBlock& b : scan_tag_blocks(raw)) {
    if (b.kind == TagKind::Think) {
      append_think(pending_think, b.text);
      continue;
    }
    if (answered) {
      if (b.kind == TagKind::Answer) {
        fail(ErrorCode::MultipleAnswers,
             t.question_id + ": more than one <answer> block");
      }
      fail(ErrorCode::MalformedTags,
           t.question_id + ": <search> after the <answer> block");
    }
    std::string text = trim(b.text);
    if (text.empty()) {
      fail(ErrorCode::EmptyAction,
           t.question_id + ": empty " +
               (b.kind == TagKind::Search ? "<search>" : "<answer>") +
               " block");
    }
    Step step;
    step.index = static_cast<int>(t.steps.size());
    step.think = std::move(pending_think);
    pending_think.clear();
    step.action.kind =
        b.kind == TagKind::Search ? ActionKind::Search : ActionKind::Answer;
    step.action.text = std::move(text);
    answered = b.kind == TagKind::Answer;
    t.steps.push_back(std::move(step));
  }
  if (!pending_think.empty() && warnings) {
    warnings->push_back(t.question_id +
                        ": <think> block with no following action dropped");
  }
  return t;
}

std::vector<Action> parse_action_sequence(const std::string& raw) {
  std::vector<Action> actions;
  bool answered = false;
  for (const TagBlock& b : scan_tag_blocks(raw)) {
    if (b.kind == TagKind::Think) continue;
    if (answered) {
      if (b.kind == TagKind::Answer) {
        fail(ErrorCode::MultipleAnswers, "more than one <answer> block");
      }
      fail(ErrorCode::MalformedTags, "<search> after the <answer> block");
    }
    std::string text = trim(b.text);
    if (text.empty()) fail(ErrorCode::EmptyAction, "empty action block");
    if (b.kind == TagKind::Answer) {
      actions.push_back(Action::answer(std::move(text)));
      answered = true;
    } else {
      actions.push_back(Action::search(std::move(text)));
    }
  }
  return actions;
}

std::string serialize_steps(const std::vector<Step>& steps) {
  std::string out;
  for (const Step& s : steps) {
    if (!s.think.empty()) {
      out += "<think>" + s.think + "</think>\n";
    }
    if (s.action.kind == ActionKind::Search) {
      out += "<search>" + s.action.text + "</search>\n";
      if (!s.evidence.empty()) {
        out += "<information>\n";
        for (std::size_t i = 0; i < s.evidence.size(); ++i) {
          out += "[" + std::to_string(i + 1) + "] " + s.evidence[i].text + "\n";
        }
        out += "</information>\n";
      }
    } else {
      out += "<answer>" + s.action.text + "</answer>\n";
    }
  }
  return out;
}

std::string serialize_actions(const std::vector<Action>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += "\n";
    if (actions[i].kind == ActionKind::Search) {
      out += "<search>" + actions[i].text + "</search>";
    } else {
      out += "<answer>" + actions[i].text + "</answer>";
    }
  }
  return out;
}

std::string serialize_state(const DecisionState& s) {
  std::string out = "Question: " + s.question + "\n";
  std::string steps = serialize_steps(s.steps);
  if (!steps.empty()) {
    out += "\n" + steps;
  }
  return out;
}

// ---- JSON ----

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const char* record) {
  auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorCode::IoFailure,
         std::string(record) + " record missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

nlohmann::json meta_to_json(const QuestionMeta& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.difficulty) j["difficulty"] = difficulty_name(*m.difficulty);
  if (m.category) j["category"] = category_name(*m.category);
  if (m.n_supporting_facts) j["n_supporting_facts"] = *m.n_supporting_facts;
  return j;
}

QuestionMeta meta_from_json(const nlohmann::json& j) {
  QuestionMeta m;
  if (j.contains("difficulty")) {
    m.difficulty = difficulty_from_name(j["difficulty"].get<std::string>());
  }
  if (j.contains("category")) {
    m.category = category_from_name(j["category"].get<std::string>());
  }
  if (j.contains("n_supporting_facts")) {
    m.n_supporting_facts = j["n_supporting_facts"].get<int>();
  }
  return m;
}

nlohmann::json action_to_json(const Action& a) {
  return {{"kind", action_kind_name(a.kind)}, {"text", a.text}};
}

Action action_from_json(const nlohmann::json& j) {
  Action a;
  a.kind = action_kind_from_name(
      require_field(j, "kind", "action").get<std::string>());
  a.text = require_field(j, "text", "action").get<std::string>();
  return a;
}

nlohmann::json step_to_json(const Step& s) {
  nlohmann::json j;
  j["index"] = s.index;
  j["think"] = s.think;
  j["action"] = action_to_json(s.action);
  nlohmann::json ev = nlohmann::json::array();
  for (const Chunk& c : s.evidence) {
    nlohmann::json cj = {{"chunk_id", c.chunk_id}, {"text", c.text}};
    if (!c.source_doc.empty()) cj["source_doc"] = c.source_doc;
    ev.push_back(std::move(cj));
  }
  j["evidence"] = std::move(ev);
  if (s.decision_entropy) j["decision_entropy"] = *s.decision_entropy;
  return j;
}

Step step_from_json(const nlohmann::json& j) {
  Step s;
  s.index = require_field(j, "index", "step").get<int>();
  s.think = require_field(j, "think", "step").get<std::string>();
  s.action = action_from_json(require_field(j, "action", "step"));
  for (const auto& cj : require_field(j, "evidence", "step")) {
    Chunk c;
    c.chunk_id = require_field(cj, "chunk_id", "evidence").get<std::string>();
    c.text = require_field(cj, "text", "evidence").get<std::string>();
    if (cj.contains("source_doc")) {
      c.source_doc = cj["source_doc"].get<std::string>();
    }
    s.evidence.push_back(std::move(c));
  }
  if (j.contains("decision_entropy")) {
    s.decision_entropy = j["decision_entropy"].get<double>();
  }
  return s;
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json j;
  j["question_id"] = t.question_id;
  j["question"] = t.question;
  j["gold_answers"] = t.gold_answers;
  j["meta"] = meta_to_json(t.meta);
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : t.steps) steps.push_back(step_to_json(s));
  j["steps"] = std::move(steps);
  j["wall_time_s"] = t.wall_time_s;
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  t.question_id =
      require_field(j, "question_id", "trajectory").get<std::string>();
  t.question = require_field(j, "question", "trajectory").get<std::string>();
  t.gold_answers = require_field(j, "gold_answers", "trajectory")
                       .get<std::vector<std::string>>();
  t.meta = meta_from_json(require_field(j, "meta", "trajectory"));
  for (const auto& sj : require_field(j, "steps", "trajectory")) {
    t.steps.push_back(step_from_json(sj));
  }
  t.wall_time_s = require_field(j, "wall_time_s", "trajectory").get<double>();
  return t;
}

void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  for (const auto& r : records) {
    out << r.dump() << "\n";
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open: " + path);
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoFailure,
           path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_trajectory_log(const std::string& path,
                          const std::vector<Trajectory>& trajectories) {
  std::vector<nlohmann::json> records;
  records.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) {
    records.push_back(trajectory_to_json(t));
  }
  write_jsonl(path, records);
}

std::vector<Trajectory> read_trajectory_log(const std::string& path) {
  std::vector<Trajectory> out;
  for (const auto& j : read_jsonl(path)) {
    try {
      out.push_back(trajectory_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoFailure, path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace das
