#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace schro::tools {

/// Outcome of one invariant suite. `worst` is on the same scale as
/// `tolerance`; the suite passes iff worst <= tolerance.
struct SuiteResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;  // where the worst case occurred, or the failure message
};

struct Suite {
  std::string name;
  std::string description;
  std::function<SuiteResult(std::uint64_t seed)> run;
};

const std::vector<Suite>& all_suites();

/// Suites whose name contains `pattern` (all for an empty pattern).
std::vector<const Suite*> select_suites(const std::string& pattern);

/// Runs a suite, converting exceptions into a failed result.
SuiteResult run_suite(const Suite& suite, std::uint64_t seed);

nlohmann::json to_json(const SuiteResult& result);

}  // namespace schro::tools
