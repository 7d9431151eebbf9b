#include <doctest.h>

#include <string>

#include "msv/errors.hpp"

TEST_SUITE("errors") {

TEST_CASE("categories map to the documented process exit codes") {
  CHECK(static_cast<int>(msv::ErrorCategory::config) == 2);
  CHECK(static_cast<int>(msv::ErrorCategory::data) == 3);
  CHECK(static_cast<int>(msv::ErrorCategory::numerical) == 4);
  CHECK(static_cast<int>(msv::ErrorCategory::infeasible) == 5);

  CHECK(msv::ConfigError("x").category() == msv::ErrorCategory::config);
  CHECK(msv::DataFormatError("x").category() == msv::ErrorCategory::data);
  CHECK(msv::ZeroReturnError("x").category() == msv::ErrorCategory::data);
  CHECK(msv::SingularDesignError("x").category() == msv::ErrorCategory::numerical);
  CHECK(msv::UnstablePhiError("x").category() == msv::ErrorCategory::numerical);
  CHECK(msv::SplitInfeasibleError("x").category() == msv::ErrorCategory::infeasible);
  CHECK(msv::AdmissibilitySampleExhaustedError("x").category() ==
        msv::ErrorCategory::infeasible);
}

TEST_CASE("errors carry their message and convert to the base types") {
  const msv::SolverFailureError err("cg stalled at iteration 12");
  CHECK(std::string(err.what()) == "cg stalled at iteration 12");
  const msv::Error& base = err;
  CHECK(base.category() == msv::ErrorCategory::numerical);
  const std::runtime_error& std_base = err;
  CHECK(std::string(std_base.what()) == err.what());
}

}  // TEST_SUITE
