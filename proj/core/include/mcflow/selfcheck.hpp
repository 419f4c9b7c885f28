#pragma once

#include <string>
#include <vector>

namespace mcflow {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Fast end-to-end property suite over every module: group normal form,
/// frame bounds, slice identities, flow fixed points and monitors, the
/// radial reduction, the curvature-condition estimator, and byte-identical
/// rerun output.  Each entry is independent; exceptions become failures.
std::vector<CheckResult> run_self_checks();

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace mcflow
