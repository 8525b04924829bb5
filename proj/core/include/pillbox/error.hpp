#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pillbox {

enum class ErrorCode {
  kInvalidSchedule,
  kInvalidPolicy,
  kInvalidRange,
  kInvalidTime,
  kUnknownCompartment,
  kTimeRegression,
  kStorageFailure,
  kInvalidMessage,
  kConfig,
  kPrecondition,
};

std::string_view to_string(ErrorCode code);

// Raised for contract violations and I/O failures. Data validation that is
// part of an operation's result (schedule violations, parse errors, log
// verification) is returned by value instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pillbox
