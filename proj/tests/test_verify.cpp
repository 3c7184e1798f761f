#include <doctest.h>

#include "irkm/verify.hpp"

using namespace irkm;

TEST_CASE("every verification check passes") {
  const auto checks = run_verification();
  CHECK(checks.size() >= 10);
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  CHECK(format_report(checks).find("checks passed") != std::string::npos);
}

TEST_CASE("a slightly wrong gradient is caught") {
  VerifyOptions options;
  options.gradient = [](const KrrModel& m, const Matrix& z) -> Matrix { return 1.01 * predict_gradient(m, z); };
  const auto checks = run_verification(options);
  int failed = 0;
  for (const auto& c : checks) failed += c.passed ? 0 : 1;
  CHECK(failed >= 1);
  CHECK(format_report(checks).find("FAIL") != std::string::npos);
}
