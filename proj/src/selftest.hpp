#pragma once

#include <string>
#include <vector>

namespace styleflow {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast oracle checks over the numerical core (a few seconds in total).
std::vector<SelftestResult> run_selftest();

}  // namespace styleflow
