#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aircomp {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite: KKT residuals, PSD estimate covariances, fronthaul
/// counts, scalar estimation and combiner oracles, monotone descent and the
/// high-power floor. Runs in a few seconds.
std::vector<SelftestCheck> run_selftest();

/// Prints one "PASS name" / "FAIL name: detail" line per check; returns true
/// when all passed.
bool report_selftest(const std::vector<SelftestCheck>& checks, std::ostream& out);

}  // namespace aircomp
