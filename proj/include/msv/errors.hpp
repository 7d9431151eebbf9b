#pragma once

#include <stdexcept>
#include <string>

namespace msv {

/// Coarse failure classes, used by the CLI to pick its exit code.
enum class ErrorCategory : int {
  config = 2,      // bad parameters, flags, or plans
  data = 3,        // input data unusable (parse failures, zeros, NaNs, too short)
  numerical = 4,   // solver/factorization breakdowns
  infeasible = 5,  // the requested estimate does not exist for this input
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::config, w) {}
};
struct DataFormatError : Error {
  explicit DataFormatError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct ZeroReturnError : Error {
  explicit ZeroReturnError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct InsufficientSampleError : Error {
  explicit InsufficientSampleError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct ZeroVarianceColumnError : Error {
  explicit ZeroVarianceColumnError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct DegenerateFoldsError : Error {
  explicit DegenerateFoldsError(const std::string& w) : Error(ErrorCategory::config, w) {}
};
struct NonPositiveThetaError : Error {
  explicit NonPositiveThetaError(const std::string& w) : Error(ErrorCategory::config, w) {}
};
struct LengthMismatchError : Error {
  explicit LengthMismatchError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct DegenerateVarianceError : Error {
  explicit DegenerateVarianceError(const std::string& w) : Error(ErrorCategory::data, w) {}
};
struct SingularDesignError : Error {
  explicit SingularDesignError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct SingularHError : Error {
  explicit SingularHError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct PhiSingularError : Error {
  explicit PhiSingularError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct UnstablePhiError : Error {
  explicit UnstablePhiError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct UnstableModelError : Error {
  explicit UnstableModelError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct SolverFailureError : Error {
  explicit SolverFailureError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct OptimFailureError : Error {
  explicit OptimFailureError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct NonPdError : Error {
  explicit NonPdError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct SplitInfeasibleError : Error {
  explicit SplitInfeasibleError(const std::string& w) : Error(ErrorCategory::infeasible, w) {}
};
struct AdmissibilitySampleExhaustedError : Error {
  explicit AdmissibilitySampleExhaustedError(const std::string& w)
      : Error(ErrorCategory::infeasible, w) {}
};

}  // namespace msv
