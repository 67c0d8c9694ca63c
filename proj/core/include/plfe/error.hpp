#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plfe {

enum class ErrorCode {
  InvalidArgument,
  // panel_data
  EmptyInput,
  NonNumericField,
  BadHeader,
  UnbalancedPanel,
  InvalidShape,
  // kernels
  NotADensity,
  Asymmetric,
  UnknownKernel,
  NonPositiveBandwidth,
  // local_poly
  EmptyWindow,
  SingularLocalFit,
  // fe_estimator
  SingularProjection,
  NonPositiveVariance,
  // scb_asymptotic
  DomainError,
  BandwidthTooLarge,
  KernelCaseUnsupported,
  // bootstrap_scb
  DegenerateVariance,
  LengthMismatch,
  EmptySample,
  // bandwidth
  LeverageOne,
  AllCandidatesFailed,
  DegenerateCovariate,
  // sim_harness
  InvalidConfig,
  TooManyFailures,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure is reported as an Error whose what() starts with the
/// error name, e.g. "UnbalancedPanel: unit 2 has 1 rows, expected 2".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& detail);

}  // namespace plfe
