#pragma once

#include <stdexcept>
#include <string>

namespace epsb {

/// Failure categories shared by every module.
enum class ErrorCode {
  OutOfRange,
  DomainError,
  BoxOutOfRange,
  RateBoundViolation,
  RateMismatch,
  TooLarge,
  StabilityError,
  MaximumPrincipleViolation,
  ClassMismatch,
  SingularSystem,
  DegenerateDensity,
  MassDriftError,
  ThetaRegime,
  IoError,
  ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for the categories the CLI reports as broken numerical invariants (exit 3).
bool is_numerical(ErrorCode code) noexcept;

}  // namespace epsb
