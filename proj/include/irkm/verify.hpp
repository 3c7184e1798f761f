#pragma once

// Small-scale oracle and invariant checks behind `irkm verify`.

#include <functional>
#include <string>
#include <vector>

#include "irkm/krr.hpp"

namespace irkm {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Gradient under test; swapped out by tests to make sure a broken
  /// formula is caught.
  std::function<Matrix(const KrrModel&, const Matrix&)> gradient = predict_gradient;
  std::uint64_t seed = 7;
};

std::vector<VerifyCheck> run_verification(const VerifyOptions& options = {});

/// Fixed-width PASS/FAIL table, one line per check, then a totals line.
std::string format_report(const std::vector<VerifyCheck>& checks);

}  // namespace irkm
