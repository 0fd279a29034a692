#include "das/prompts.hpp"

#include "das/prompts_data.hpp"

namespace das {

const std::string& prompt_template(PromptKind kind) {
  static const std::string base = detail::kBaseAgentPrompt;
  static const std::string answer = detail::kAnswerInterventionPrompt;
  static const std::string search = detail::kSearchInterventionPrompt;
  static const std::string recall = detail::kKnowledgeRecallPrompt;
  static const std::string meta = detail::kKnowledgeMetacognitionPrompt;
  switch (kind) {
    case PromptKind::BaseAgent: return base;
    case PromptKind::AnswerIntervention: return answer;
    case PromptKind::SearchIntervention: return search;
    case PromptKind::KnowledgeRecall: return recall;
    case PromptKind::KnowledgeMetacognition: return meta;
  }
  return base;
}

std::string render_prompt(PromptKind kind, const std::string& question) {
  std::string out = prompt_template(kind);
  const std::string placeholder = "{question}";
  std::size_t at = 0;
  while ((at = out.find(placeholder, at)) != std::string::npos) {
    out.replace(at, placeholder.size(), question);
    at += question.size();
  }
  return out;
}

}  // namespace das
