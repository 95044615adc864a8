#ifndef CHAINFLOW_ERROR_HPP
#define CHAINFLOW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainflow {

enum class ErrorCode {
  UnsupportedAlgo,
  InvalidArgument,
  Exhausted,
  QuorumNotMet,
  LinkMismatch,
  PoWInvalid,
  BadCredential,
  DuplicateIdentity,
  MalformedKey,
  DecryptFailure,
  DuplicateContract,
  IncompleteOrder,
  InsufficientInventory,
  RoleMismatch,
  SchemaViolation,
  OutOfOrderEvent,
  Unsatisfiable,
  Malformed,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedAlgo: return "UnsupportedAlgo";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Exhausted: return "Exhausted";
    case ErrorCode::QuorumNotMet: return "QuorumNotMet";
    case ErrorCode::LinkMismatch: return "LinkMismatch";
    case ErrorCode::PoWInvalid: return "PoWInvalid";
    case ErrorCode::BadCredential: return "BadCredential";
    case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
    case ErrorCode::MalformedKey: return "MalformedKey";
    case ErrorCode::DecryptFailure: return "DecryptFailure";
    case ErrorCode::DuplicateContract: return "DuplicateContract";
    case ErrorCode::IncompleteOrder: return "IncompleteOrder";
    case ErrorCode::InsufficientInventory: return "InsufficientInventory";
    case ErrorCode::RoleMismatch: return "RoleMismatch";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::OutOfOrderEvent: return "OutOfOrderEvent";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every recoverable failure in the library surfaces as this exception,
/// tagged with a code callers can switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chainflow

#endif  // CHAINFLOW_ERROR_HPP
