#pragma once

// Backend interface for the agent being studied, plus the toy simulated
// policy and the episode driver. A backend decides Search vs Answer given
// the state, and additionally supports the two forced-action entry points
// the intervention engine needs and the two knowledge-probe prompts.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "das/retrieval.hpp"
#include "das/rng.hpp"
#include "das/trajectory.hpp"
#include "das/utility.hpp"
#include "das/world.hpp"

namespace das {

inline constexpr std::array<const char*, 3> kFeatureNames = {
    "facts_held_fraction", "step_index_normalized", "bias"};

/// Weights over kFeatureNames. Positive dot product pushes toward Answer.
struct PolicyParams {
  std::array<double, 3> weights{0.0, 0.0, 0.0};

  double dot(const std::array<double, 3>& features) const {
    return weights[0] * features[0] + weights[1] * features[1] +
           weights[2] * features[2];
  }
  bool operator==(const PolicyParams&) const = default;
};

struct DecisionDistribution {
  double p_search = 0.5;
  double p_answer = 0.5;
  double entropy_nats() const;
};

struct ActionChoice {
  Action action;
  std::string think;                       // backend reasoning text, may be empty
  std::optional<double> decision_entropy;  // absent when no distribution exists
};

class Policy {
 public:
  virtual ~Policy() = default;

  /// Sample the next action at this state.
  virtual ActionChoice next_action(const DecisionState& state, Rng& rng) = 0;

  /// do(A := Answer): produce an answer now, regardless of what the policy
  /// would have done. Throws NoAnswerProduced when the backend cannot.
  virtual std::string forced_answer(const DecisionState& state, Rng& rng) = 0;

  /// do(A := Search): produce a search action now.
  virtual Action forced_search(const DecisionState& state, Rng& rng) = 0;

  /// Knowledge-recall probe: answer the query directly from parametric
  /// knowledge, no retrieval.
  virtual std::string recall_probe(const DecisionState& state,
                                   const std::string& query, Rng& rng) = 0;

  /// Meta-cognition probe: raw backend reply to "do you know enough to
  /// answer this without searching?" (expected to start with Yes or No).
  virtual std::string meta_probe(const DecisionState& state,
                                 const std::string& query, Rng& rng) = 0;

  /// The Search/Answer distribution at a state, when the backend exposes
  /// one. Used to attach entropies to forced terminal answers.
  virtual std::optional<DecisionDistribution> peek_distribution(
      const DecisionState& state) {
    (void)state;
    return std::nullopt;
  }

  /// Ground-truth K_t. Only the simulated backend has one; others throw
  /// NotSimulated.
  virtual KnowledgeLabel latent(const DecisionState& state) const = 0;

  virtual bool is_simulated() const = 0;
};

struct SimulatedPolicyConfig {
  PolicyParams params;
  int t_max = 4;  // normalizer for step_index_normalized; the search budget
};

/// Toy decision model over the synthetic world:
///   P(Answer | s) = sigmoid(w . phi(s)),
///   phi(s) = (facts_held_fraction, step_index / t_max, 1).
/// Sampled answers follow the oracle rule: the gold answer iff the latent
/// state is Sufficient, a wrong constant otherwise, flipped with the
/// world's answer_noise probability. Search queries target the first
/// missing required fact; with probability 1 - retrieval_success_prob the
/// query is an off-vocabulary miss that retrieves nothing.
class SimulatedPolicy : public Policy {
 public:
  SimulatedPolicy(const WorldSpec& world, SimulatedPolicyConfig cfg);

  ActionChoice next_action(const DecisionState& state, Rng& rng) override;
  std::string forced_answer(const DecisionState& state, Rng& rng) override;
  Action forced_search(const DecisionState& state, Rng& rng) override;
  std::string recall_probe(const DecisionState& state, const std::string& query,
                           Rng& rng) override;
  std::string meta_probe(const DecisionState& state, const std::string& query,
                         Rng& rng) override;
  std::optional<DecisionDistribution> peek_distribution(
      const DecisionState& state) override;
  KnowledgeLabel latent(const DecisionState& state) const override;
  bool is_simulated() const override { return true; }

  std::array<double, 3> features(const DecisionState& state) const;
  DecisionDistribution decision_distribution(const DecisionState& state) const;
  const WorldSpec& world() const { return *world_; }
  const SimulatedPolicyConfig& config() const { return cfg_; }

 private:
  const WorldQuestion& question_for(const DecisionState& state) const;
  std::string oracle_answer(const WorldQuestion& q, const DecisionState& state,
                            Rng& rng) const;
  std::string emit_query(const WorldQuestion& q, const DecisionState& state,
                         Rng& rng) const;

  const WorldSpec* world_;
  std::unordered_map<std::string, std::size_t> by_id_;
  SimulatedPolicyConfig cfg_;
};

/// Everything rollout needs to know about a question up front.
struct QuestionSpec {
  std::string question_id;
  std::string question;
  std::vector<std::string> gold_answers;
  QuestionMeta meta;
};

QuestionSpec question_spec(const WorldQuestion& q);

/// Deterministic synthetic wall-clock model for simulated runs; remote runs
/// measure real elapsed time instead.
struct SimTimeModel {
  double per_step_s = 0.05;
  double per_search_s = 0.2;
};

struct RolloutConfig {
  int budget = 4;   // max Search actions per episode
  int topk = 3;     // retrieval depth
  uint64_t seed = 0;
  uint64_t stream_salt = 0;  // distinguishes repeated episodes of a question
  SimTimeModel sim_time;
  bool measure_wall_clock = false;
};

/// Drive one episode: the policy acts freely until it answers or exhausts
/// the search budget, at which point an answer is forced. Search evidence
/// comes from the index at the configured depth.
Trajectory rollout(Policy& policy, const Index& index, const QuestionSpec& q,
                   const RolloutConfig& cfg);

/// The same loop, continuing from an existing prefix with some searches
/// already spent. Appends to `state` and returns the number of steps added.
/// Exposed for the intervention engine's corrective rollouts.
int continue_episode(Policy& policy, const Index& index, DecisionState& state,
                     int searches_used, const RolloutConfig& cfg, Rng& rng);

}  // namespace das
