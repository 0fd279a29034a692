#pragma once

// HTTP chat backend. Wire format, one POST per call:
//   request:  {"messages": [{"role": ..., "content": ...}, ...],
//              "temperature": t, "max_tokens": n, "logprobs": bool?}
//   response: {"text": ..., "token_logprobs": [...]?}
// Transport failures, non-200 statuses, and unparsable bodies all surface
// as BackendUnavailable.

#include <string>
#include <vector>

#include "das/policy.hpp"

namespace das {

struct RemoteConfig {
  std::string url;  // http://host:port/path
  double temperature = 0.0;
  int max_tokens = 512;
  bool request_logprobs = false;
  int answer_retries = 1;  // extra attempts when a forced action is missing
  int timeout_s = 30;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatResponse {
  std::string text;
  std::vector<double> token_logprobs;
};

class RemoteClient {
 public:
  explicit RemoteClient(RemoteConfig cfg);
  ChatResponse complete(const std::vector<ChatMessage>& messages) const;
  const RemoteConfig& config() const { return cfg_; }

 private:
  RemoteConfig cfg_;
  std::string host_;  // scheme://host:port
  std::string path_;
};

/// Policy over a remote chat endpoint. Decisions come from the base agent
/// prompt; interventions and probes use their dedicated templates with the
/// serialized state appended as context. No Search/Answer distribution is
/// available, so decision entropies are absent.
class RemotePolicy : public Policy {
 public:
  explicit RemotePolicy(RemoteConfig cfg) : client_(std::move(cfg)) {}

  ActionChoice next_action(const DecisionState& state, Rng& rng) override;
  std::string forced_answer(const DecisionState& state, Rng& rng) override;
  Action forced_search(const DecisionState& state, Rng& rng) override;
  std::string recall_probe(const DecisionState& state, const std::string& query,
                           Rng& rng) override;
  std::string meta_probe(const DecisionState& state, const std::string& query,
                         Rng& rng) override;
  KnowledgeLabel latent(const DecisionState& state) const override;
  bool is_simulated() const override { return false; }

 private:
  std::string transcript(const DecisionState& state) const;
  ChatResponse ask(const std::string& content) const;

  RemoteClient client_;
};

}  // namespace das
