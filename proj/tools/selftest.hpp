#pragma once

#include <functional>
#include <string>
#include <vector>

namespace kfpso::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Check {
  std::string name;
  /// Returns an empty string on success, otherwise a failure description.
  std::function<std::string()> run;
};

/// Fast invariant and oracle checks over every module.
std::vector<Check> default_checks();

std::vector<CheckResult> run_checks(const std::vector<Check>& checks);

}  // namespace kfpso::selftest
