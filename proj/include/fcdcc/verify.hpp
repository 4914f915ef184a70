#pragma once

// Self-contained invariant checks run by the `verify` subcommand.

#include <cstdint>
#include <string>
#include <vector>

namespace fcdcc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed);

}  // namespace fcdcc
