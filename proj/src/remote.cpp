#include "das/remote.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "das/prompts.hpp"

namespace das {

namespace {

/// Lenient single-tag extraction for intervention replies: the first
/// <tag>...</tag> span, trimmed, or nullopt. Interventions should salvage an
/// action from a chatty reply rather than reject it wholesale.
std::optional<std::string> extract_tag(const std::string& text,
                                       const std::string& tag) {
  std::string open = "<" + tag + ">";
  std::string close = "</" + tag + ">";
  std::size_t b = text.find(open);
  if (b == std::string::npos) return std::nullopt;
  std::size_t e = text.find(close, b + open.size());
  if (e == std::string::npos) return std::nullopt;
  std::string inner = trim(text.substr(b + open.size(), e - b - open.size()));
  if (inner.empty()) return std::nullopt;
  return inner;
}

}  // namespace

RemoteClient::RemoteClient(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  // Split scheme://host:port from the path.
  std::size_t scheme = cfg_.url.find("://");
  if (scheme == std::string::npos) {
    fail(ErrorCode::ConfigError, "remote url needs a scheme: " + cfg_.url);
  }
  std::size_t slash = cfg_.url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    host_ = cfg_.url;
    path_ = "/";
  } else {
    host_ = cfg_.url.substr(0, slash);
    path_ = cfg_.url.substr(slash);
  }
}

ChatResponse RemoteClient::complete(
    const std::vector<ChatMessage>& messages) const {
  nlohmann::json body;
  body["messages"] = nlohmann::json::array();
  for (const ChatMessage& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_tokens;
  if (cfg_.request_logprobs) body["logprobs"] = true;

  httplib::Client client(host_);
  client.set_connection_timeout(cfg_.timeout_s, 0);
  client.set_read_timeout(cfg_.timeout_s, 0);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    fail(ErrorCode::BackendUnavailable,
         "no response from " + host_ + path_);
  }
  if (res->status != 200) {
    fail(ErrorCode::BackendUnavailable,
         host_ + path_ + " returned status " + std::to_string(res->status));
  }
  ChatResponse out;
  try {
    nlohmann::json j = nlohmann::json::parse(res->body);
    out.text = j.at("text").get<std::string>();
    if (j.contains("token_logprobs")) {
      out.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BackendUnavailable,
         std::string("unparsable backend reply: ") + e.what());
  }
  return out;
}

std::string RemotePolicy::transcript(const DecisionState& state) const {
  return serialize_steps(state.steps);
}

ChatResponse RemotePolicy::ask(const std::string& content) const {
  return client_.complete({ChatMessage{"user", content}});
}

ActionChoice RemotePolicy::next_action(const DecisionState& state, Rng& rng) {
  (void)rng;  // sampling happens server-side
  std::string content = render_prompt(PromptKind::BaseAgent, state.question);
  std::string past = transcript(state);
  if (!past.empty()) content += "\n\n" + past;
  ChatResponse resp = ask(content);

  // Parse with the strict grammar and keep the first action; anything the
  // backend dreams up after that belongs to turns that will not happen.
  Trajectory parsed =
      parse_trajectory(resp.text, state.question_id, state.question, {"-"});
  if (parsed.steps.empty()) {
    fail(ErrorCode::BackendUnavailable, "backend reply contains no action");
  }
  ActionChoice choice;
  choice.think = parsed.steps.front().think;
  choice.action = parsed.steps.front().action;
  return choice;
}

std::string RemotePolicy::forced_answer(const DecisionState& state, Rng& rng) {
  (void)rng;
  std::string content =
      render_prompt(PromptKind::AnswerIntervention, state.question);
  std::string past = transcript(state);
  if (!past.empty()) content += "\n\n" + past;
  int attempts = 1 + std::max(0, client_.config().answer_retries);
  for (int a = 0; a < attempts; ++a) {
    ChatResponse resp = ask(content);
    if (auto answer = extract_tag(resp.text, "answer")) return *answer;
  }
  fail(ErrorCode::NoAnswerProduced,
       state.question_id + ": backend produced no <answer> after " +
           std::to_string(attempts) + " attempts");
}

Action RemotePolicy::forced_search(const DecisionState& state, Rng& rng) {
  (void)rng;
  std::string content =
      render_prompt(PromptKind::SearchIntervention, state.question);
  std::string past = transcript(state);
  if (!past.empty()) content += "\n\n" + past;
  int attempts = 1 + std::max(0, client_.config().answer_retries);
  for (int a = 0; a < attempts; ++a) {
    ChatResponse resp = ask(content);
    if (auto query = extract_tag(resp.text, "search")) {
      return Action::search(*query);
    }
  }
  fail(ErrorCode::BackendUnavailable,
       state.question_id + ": backend produced no <search> after " +
           std::to_string(attempts) + " attempts");
}

std::string RemotePolicy::recall_probe(const DecisionState& state,
                                       const std::string& query, Rng& rng) {
  (void)rng;
  std::string request = serialize_state(state) + "<search>" + query + "</search>";
  ChatResponse resp = ask(render_prompt(PromptKind::KnowledgeRecall, request));
  return trim(resp.text);
}

std::string RemotePolicy::meta_probe(const DecisionState& state,
                                     const std::string& query, Rng& rng) {
  (void)rng;
  std::string request = serialize_state(state) + "<search>" + query + "</search>";
  ChatResponse resp =
      ask(render_prompt(PromptKind::KnowledgeMetacognition, request));
  return trim(resp.text);
}

KnowledgeLabel RemotePolicy::latent(const DecisionState& state) const {
  fail(ErrorCode::NotSimulated,
       state.question_id + ": latent knowledge is only defined in the simulator");
}

}  // namespace das
