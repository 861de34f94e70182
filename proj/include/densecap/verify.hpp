#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace densecap {

/// One property check of the built-in invariant suite.
struct VerifyCheck {
  std::string module;
  std::string property;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const;
  /// Module x property pass/fail matrix, one line per check.
  std::string matrix() const;
};

/// Run the invariant suites of every module. `quick` shrinks instance
/// counts; the MNIST-dependent experiment checks are never run here.
VerifyReport run_verify(bool quick, std::uint64_t seed);

}  // namespace densecap
