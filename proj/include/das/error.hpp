#pragma once

#include <stdexcept>
#include <string>

namespace das {

/// Every failure the library raises deliberately carries one of these codes.
/// The CLI maps them onto process exit codes (see exit_code_for).
enum class ErrorCode {
  ConfigError,         // bad config file, flag value, or violated precondition
  IoFailure,           // file could not be read/written/parsed at the io layer
  MalformedTags,       // tag grammar violation (unclosed, nested, action after answer)
  MultipleAnswers,     // more than one <answer> block in an episode
  EmptyAction,         // <search>/<answer> with empty text after trimming
  IndexOutOfRange,     // step index outside a trajectory
  DuplicateChunkId,    // corpus contains the same chunk_id twice
  UnknownQuestion,     // question_id absent from the world spec
  NotSimulated,        // latent-state query against a non-simulated backend
  BackendUnavailable,  // remote endpoint unreachable or reply unusable
  NoAnswerProduced,    // forced-answer intervention got no <answer> after retries
  WrongVerdict,        // pair builder fed a diagnosis of the wrong kind
  MissingMeta,         // stratified report over trajectories lacking the field
  DanglingDiagnosis,   // diagnosis references a trajectory/step not supplied
  DegenerateLabels,    // ROC with single-class labels
  UnparsableProbe,     // meta-cognition reply is neither Yes nor No
  EmptyBatch,          // DPO loss/gradient over zero pairs
  InvalidContinuation, // scored action sequence breaks the decision model
  Divergence,          // non-finite loss or weights during alignment
  MissingArtifacts,    // report asked for files that do not exist
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

const char* error_code_name(ErrorCode code);

/// CLI exit codes: 2 config/usage, 3 backend, 4 data. 0 is success.
int exit_code_for(ErrorCode code);

}  // namespace das
