#pragma once

// Synthetic knowledge world with a fully observable ground truth. Each
// question names the facts required to answer it and the subset the agent
// already holds internally; everything else must come in through retrieval
// evidence. That makes the latent knowledge state at any decision point a
// checkable function of the world plus the trajectory prefix, which is what
// lets the diagnosis machinery be tested exactly.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "das/chunk.hpp"
#include "das/trajectory.hpp"
#include "das/utility.hpp"

namespace das {

struct WorldQuestion {
  std::string question_id;
  std::string question;
  std::vector<std::string> required_facts;  // fact ids
  std::vector<std::string> internal_facts;  // subset of required_facts
  std::string gold_answer;
  QuestionMeta meta;
};

struct WorldSpec {
  std::vector<WorldQuestion> questions;
  std::map<std::string, std::string> fact_texts;  // fact id -> chunk text
  double retrieval_success_prob = 1.0;
  double answer_noise = 0.0;
  uint64_t seed = 0;

  const WorldQuestion* find(const std::string& question_id) const;
  std::unordered_map<std::string, std::size_t> index_by_id() const;
  /// Structural checks (unique ids, internal subset of required, fact texts
  /// present, probabilities in range). Throws ConfigError.
  void validate() const;
};

struct WorldGenParams {
  int n_questions = 200;
  uint64_t seed = 0;
  double retrieval_success_prob = 1.0;
  double answer_noise = 0.0;

  // Strata mixes. Counts are realized exactly when n_questions divides
  // evenly; otherwise remainders go to the largest fractional parts.
  double comparison_share = 0.5;
  std::vector<double> difficulty_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};  // E, M, H
  std::vector<std::pair<int, double>> supporting_facts_mix{
      {2, 0.4}, {3, 0.3}, {4, 0.2}, {5, 0.1}};

  // Chance that each required fact is internal, by category. Comparison
  // questions lean on parametric knowledge far more than bridge questions.
  double internal_rate_comparison = 0.8;
  double internal_rate_bridge = 0.25;
  // Share of questions whose internal facts cover everything required.
  double fully_internal_share = 0.15;

  int distractor_facts = 24;  // corpus chunks no question needs
  int tokens_per_fact = 3;
};

/// Deterministic for a given params struct: same inputs, same world.
WorldSpec generate_world(const WorldGenParams& params);

/// Exact integer quotas for proportions (largest-remainder rounding).
std::vector<int> quota_counts(int n, const std::vector<double>& weights);

/// One corpus chunk per fact, chunk_id = fact id.
std::vector<Chunk> world_corpus(const WorldSpec& world);

/// Fact ids the agent holds at this state: internal facts plus every
/// evidence chunk that is a known fact.
std::set<std::string> facts_in_state(const WorldSpec& world,
                                     const WorldQuestion& q,
                                     const DecisionState& state);

/// Fraction of required facts held, in [0, 1].
double facts_held_fraction(const WorldSpec& world, const WorldQuestion& q,
                           const DecisionState& state);

/// Ground-truth K_t: Sufficient iff every required fact is held. Throws
/// UnknownQuestion when the state's question_id is not in the world.
KnowledgeLabel latent_knowledge(const WorldSpec& world,
                                const DecisionState& state);

void write_world(const std::string& path, const WorldSpec& world);
WorldSpec read_world(const std::string& path);

}  // namespace das
