#pragma once

#include <string>
#include <vector>

namespace signms {

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Fast invariant checks on small meshes; a few seconds in total.
std::vector<CheckResult> run_self_checks();

}  // namespace signms
