#include "das/utility.hpp"

namespace das {

const char* knowledge_label_name(KnowledgeLabel k) {
  return k == KnowledgeLabel::Sufficient ? "Sufficient" : "Insufficient";
}

KnowledgeLabel knowledge_label_from_name(const std::string& name) {
  if (name == "Sufficient") return KnowledgeLabel::Sufficient;
  if (name == "Insufficient") return KnowledgeLabel::Insufficient;
  fail(ErrorCode::IoFailure, "unknown knowledge label '" + name + "'");
}

const char* boundary_error_name(BoundaryError e) {
  switch (e) {
    case BoundaryError::None: return "None";
    case BoundaryError::OverSearch: return "OverSearch";
    case BoundaryError::UnderSearch: return "UnderSearch";
  }
  return "None";
}

void UtilityModel::validate() const {
  if (!(r_correct > 0.0)) {
    fail(ErrorCode::ConfigError, "utility: r_correct must be > 0");
  }
  if (!(r_incorrect < 0.0)) {
    fail(ErrorCode::ConfigError, "utility: r_incorrect must be < 0");
  }
  if (!(c_search > 0.0)) {
    fail(ErrorCode::ConfigError, "utility: c_search must be > 0");
  }
  if (!(r_info > c_search)) {
    fail(ErrorCode::ConfigError, "utility: r_info must exceed c_search");
  }
}

double utility(const UtilityModel& u, ActionKind action, KnowledgeLabel k) {
  if (action == ActionKind::Answer) {
    return k == KnowledgeLabel::Sufficient ? u.r_correct : u.r_incorrect;
  }
  return k == KnowledgeLabel::Sufficient ? -u.c_search : u.r_info - u.c_search;
}

ActionKind optimal_action(const UtilityModel& u, KnowledgeLabel k) {
  u.validate();
  return k == KnowledgeLabel::Sufficient ? ActionKind::Answer
                                         : ActionKind::Search;
}

BoundaryError classify_error(ActionKind action, KnowledgeLabel k) {
  if (action == ActionKind::Search && k == KnowledgeLabel::Sufficient) {
    return BoundaryError::OverSearch;
  }
  if (action == ActionKind::Answer && k == KnowledgeLabel::Insufficient) {
    return BoundaryError::UnderSearch;
  }
  return BoundaryError::None;
}

}  // namespace das
