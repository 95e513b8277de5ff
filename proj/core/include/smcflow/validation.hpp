#pragma once

// The acceptance suite: one self-contained check per criterion, numbered
// 1..12, each reporting pass/fail, the measured numbers and its runtime.

#include <cstdint>
#include <string>
#include <vector>

namespace smc::validation {

enum class TolProfile {
  Default,  ///< the pinned acceptance thresholds
  Strict,   ///< every tolerance halved (runtime limits unchanged)
};

struct Options {
  TolProfile profile = TolProfile::Default;
  std::uint64_t seed = 7;  ///< random variations of the gradient oracle
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  ///< measured values against their thresholds
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 12;

/// Runs criterion `id` (1..12). Never throws for numerical trouble: an
/// exception inside a check is reported as a failure with its message.
CriterionResult run_criterion(int id, const Options& opts = {});

std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const Options& opts = {});

/// "PASS  [ 1] title: detail (0.12 s)"
std::string format_result(const CriterionResult& r);

}  // namespace smc::validation
