#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mwcnn {

struct CheckResult {
  std::string name;
  bool passed = false;
  double error = 0.0;      // max abs error, or max relative error for gradient checks
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 2024;
  int trials = 20;
  /// Negative control: perturbs one Haar analysis tap before running the
  /// reconstruction check, which must then fail.
  bool corrupt_haar_tap = false;
};

/// Runs the oracle suite: reconstruction, pooling and dilated equivalences,
/// finite-difference gradient checks, gridding enumeration and the
/// identity-block degeneration.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

/// CSV table: check,status,error,tolerance,detail
void print_checks(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace mwcnn
