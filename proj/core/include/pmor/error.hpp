#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmor {

enum class ErrorCode {
  ParameterArity,
  Structural,
  PoleAtExpansionPoint,
  SingularMatrix,
  SingularPencil,
  EmptyBasis,
  DegenerateProjection,
  CapExceeded,
  OrderLimit,
  StepSize,
  InvalidArgument,
  Spec,
  Schema,
  Io,
};

/// Stable machine-readable name, used as the `ERROR <code>:` prefix by the CLI.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pmor
