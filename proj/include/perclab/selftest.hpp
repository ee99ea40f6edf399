#pragma once

#include <string>
#include <vector>

namespace perclab {

struct SelftestCase {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Degenerate and closed-form examples of every module.
std::vector<SelftestCase> run_selftest();

}  // namespace perclab
