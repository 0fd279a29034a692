#pragma once

// The decision-theoretic core: which action is worth taking given the latent
// knowledge state. With a correct answer worth more than an info-gathering
// search, and a search under missing knowledge worth more than a wrong
// answer, the optimal action depends only on whether knowledge suffices.
// Acting against that boundary in either direction is a boundary error.

#include "das/trajectory.hpp"

namespace das {

enum class KnowledgeLabel { Sufficient, Insufficient };

const char* knowledge_label_name(KnowledgeLabel k);
KnowledgeLabel knowledge_label_from_name(const std::string& name);

enum class BoundaryError { None, OverSearch, UnderSearch };

const char* boundary_error_name(BoundaryError e);

struct UtilityModel {
  double r_correct = 1.0;    // payoff for a correct final answer
  double r_incorrect = -1.0; // payoff for a wrong final answer
  double c_search = 0.1;     // cost per search round
  double r_info = 0.5;       // value of a search that fills a knowledge gap

  /// Enforces r_correct > 0 > r_incorrect, c_search > 0, r_info > c_search.
  /// Throws ConfigError otherwise.
  void validate() const;
};

/// Expected utility of taking `action` in latent state `k`:
///   Answer | Sufficient    -> r_correct
///   Answer | Insufficient  -> r_incorrect
///   Search | Sufficient    -> -c_search      (pure waste)
///   Search | Insufficient  -> r_info - c_search
double utility(const UtilityModel& u, ActionKind action, KnowledgeLabel k);

/// Argmax of the above. Under the sign constraints this never ties:
/// Sufficient -> Answer, Insufficient -> Search.
ActionKind optimal_action(const UtilityModel& u, KnowledgeLabel k);

/// OverSearch = searching on sufficient knowledge, UnderSearch = answering
/// on insufficient knowledge, None otherwise.
BoundaryError classify_error(ActionKind action, KnowledgeLabel k);

}  // namespace das
