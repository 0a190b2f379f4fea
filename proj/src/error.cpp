#include "epsb/error.hpp"

namespace epsb {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BoxOutOfRange: return "BoxOutOfRange";
    case ErrorCode::RateBoundViolation: return "RateBoundViolation";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::StabilityError: return "StabilityError";
    case ErrorCode::MaximumPrincipleViolation: return "MaximumPrincipleViolation";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::MassDriftError: return "MassDriftError";
    case ErrorCode::ThetaRegime: return "ThetaRegime";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RateBoundViolation:
    case ErrorCode::RateMismatch:
    case ErrorCode::StabilityError:
    case ErrorCode::MaximumPrincipleViolation:
    case ErrorCode::SingularSystem:
    case ErrorCode::DegenerateDensity:
    case ErrorCode::MassDriftError:
      return true;
    default:
      return false;
  }
}

}  // namespace epsb
