#include "plfe/error.hpp"

namespace plfe {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonNumericField: return "NonNumericField";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::NotADensity: return "NotADensity";
    case ErrorCode::Asymmetric: return "Asymmetric";
    case ErrorCode::UnknownKernel: return "UnknownKernel";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::SingularLocalFit: return "SingularLocalFit";
    case ErrorCode::SingularProjection: return "SingularProjection";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BandwidthTooLarge: return "BandwidthTooLarge";
    case ErrorCode::KernelCaseUnsupported: return "KernelCaseUnsupported";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::LeverageOne: return "LeverageOne";
    case ErrorCode::AllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorCode::DegenerateCovariate: return "DegenerateCovariate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

void raise(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace plfe
