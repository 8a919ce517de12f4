#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace firmfold {

enum class Errc {
  UnknownNode,
  UnknownBlock,
  IncompatibleEndpoints,
  DuplicatePosition,
  ParseError,
  SchemaError,
  ReferenceError,
  UnsupportedNodeType,
  StaleMatch,
  StepLimitExceeded,
  StateLimitExceeded,
  FuelExhausted,
  MalformedGraph,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::UnknownBlock: return "UnknownBlock";
    case Errc::IncompatibleEndpoints: return "IncompatibleEndpoints";
    case Errc::DuplicatePosition: return "DuplicatePosition";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ReferenceError: return "ReferenceError";
    case Errc::UnsupportedNodeType: return "UnsupportedNodeType";
    case Errc::StaleMatch: return "StaleMatch";
    case Errc::StepLimitExceeded: return "StepLimitExceeded";
    case Errc::StateLimitExceeded: return "StateLimitExceeded";
    case Errc::FuelExhausted: return "FuelExhausted";
    case Errc::MalformedGraph: return "MalformedGraph";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code identifies the failure
/// class; the message carries the offending detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace firmfold
