#include "das/error.hpp"

namespace das {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedTags: return "MalformedTags";
    case ErrorCode::MultipleAnswers: return "MultipleAnswers";
    case ErrorCode::EmptyAction: return "EmptyAction";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateChunkId: return "DuplicateChunkId";
    case ErrorCode::UnknownQuestion: return "UnknownQuestion";
    case ErrorCode::NotSimulated: return "NotSimulated";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::NoAnswerProduced: return "NoAnswerProduced";
    case ErrorCode::WrongVerdict: return "WrongVerdict";
    case ErrorCode::MissingMeta: return "MissingMeta";
    case ErrorCode::DanglingDiagnosis: return "DanglingDiagnosis";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::UnparsableProbe: return "UnparsableProbe";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::InvalidContinuation: return "InvalidContinuation";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
  }
  return "UnknownError";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::NotSimulated:
    case ErrorCode::NoAnswerProduced:
      return 3;
    default:
      return 4;
  }
}

}  // namespace das
