#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace temviro {

enum class ErrorCode {
  // imageio
  UnsupportedFormat,
  CorruptFile,
  DegenerateInput,
  ClassCountMismatch,
  // preprocess
  PadTooWide,
  // nn
  ShapeMismatch,
  DegenerateOutput,
  BatchTooSmall,
  GraphConsumed,
  NumericFailure,
  // model
  InvalidArchitecture,
  VersionMismatch,
  CorruptCheckpoint,
  // metrics
  LabelOutOfRange,
  EmptyMatrix,
  DegenerateMarginals,
  SingleClassOnly,
  // trainer
  EmptySplit,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; code() lets callers
// (the CLI in particular) map a failure onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace temviro
