#include "temviro/error.hpp"

namespace temviro {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ClassCountMismatch: return "ClassCountMismatch";
    case ErrorCode::PadTooWide: return "PadTooWide";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateOutput: return "DegenerateOutput";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::GraphConsumed: return "GraphConsumed";
    case ErrorCode::NumericFailure: return "NumericFailure";
    case ErrorCode::InvalidArchitecture: return "InvalidArchitecture";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::SingleClassOnly: return "SingleClassOnly";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace temviro
