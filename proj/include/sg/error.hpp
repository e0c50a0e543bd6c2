#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sg {

enum class ErrorCode {
  NonUnitDirection,
  DegenerateGeometry,
  Schema,
  DanglingReference,
  UnsupportedPrimitive,
  UnsupportedConstraint,
  EmptyGraph,
  OutOfVocabulary,
  InsufficientCorpus,
  DegenerateVariance,
  EmptyGroundTruth,
  InconsistentSequence,
  MalformedRecord,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for all recoverable library failures. The code identifies
/// the failure family; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sg
