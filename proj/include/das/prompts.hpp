#pragma once

// Prompt templates used against remote backends. The texts live in
// assets/prompts/*.txt and are baked in at build time; each contains a
// {question} placeholder.

#include <string>

namespace das {

enum class PromptKind {
  BaseAgent,            // normal agentic search loop
  AnswerIntervention,   // force an immediate answer, no more searching
  SearchIntervention,   // force another search, forbid answering
  KnowledgeRecall,      // answer the query from parametric knowledge
  KnowledgeMetacognition,  // Yes/No: is internal knowledge sufficient?
};

const std::string& prompt_template(PromptKind kind);

/// Replace every {question} placeholder.
std::string render_prompt(PromptKind kind, const std::string& question);

}  // namespace das
