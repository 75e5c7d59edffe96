#pragma once

// Fast self-checks of the library invariants, run by `pskill validate`.

#include <string>
#include <vector>

namespace pskill::validate {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<Check> run_all();

}  // namespace pskill::validate
