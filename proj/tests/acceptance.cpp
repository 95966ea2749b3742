// Acceptance gate: runs every top-level criterion and prints one line per
// check.  Exits nonzero if any criterion fails.
#include <cstdio>

#include "mfglab/checks.hpp"

int main() {
  int failures = 0;
  for (const auto& r : mfglab::acceptance_checks()) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
