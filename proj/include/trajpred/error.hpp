#pragma once

#include <stdexcept>
#include <string>

namespace trajpred {

// Failure categories. The CLI prints the category name as the first token of
// its one-line error message, so these strings are part of the interface.
enum class ErrorCategory {
  InvalidArgument,
  IllConditionedFit,
  MalformedFile,
  MissingArtifact,
  SchemaMismatch,
  NumericalFailure,
  Io,
};

const char* category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

inline const char* category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::IllConditionedFit: return "ill-conditioned-fit";
    case ErrorCategory::MalformedFile: return "malformed-file";
    case ErrorCategory::MissingArtifact: return "missing-artifact";
    case ErrorCategory::SchemaMismatch: return "schema-mismatch";
    case ErrorCategory::NumericalFailure: return "numerical-failure";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCategory::InvalidArgument, what);
}

}  // namespace trajpred
