#pragma once

#include <string>
#include <vector>

namespace mfglab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Desk-scale closed-loop checks (unit square, 33x33, nt = 64, nu = 0.2).
// All tolerances are pinned inside the implementations.
CheckResult check_green_identity();      // adjoint pairing, all regimes
CheckResult check_frechet_consistency(); // quotient vs direct, orders 1..3
CheckResult check_wellposed_scaling();   // linear response over 3 decades
CheckResult check_maximum_principle();   // nonnegativity and m^(1) > 0
CheckResult check_decoupling();          // u^(1) = 0 in DI/NI
CheckResult check_eigen_quality();       // residuals, orthonormality, values
CheckResult check_obstacle_id();         // candidate search, 4 regimes
CheckResult check_coefficient_recovery();// closed-loop F^(1..3)
CheckResult check_distinguishability();  // 4 planted pairs
CheckResult check_determinism();         // byte-identical reports

// The five fast structural checks run by the verify subcommand.
std::vector<CheckResult> verify_checks();
// Everything, in criterion order.
std::vector<CheckResult> acceptance_checks();

}  // namespace mfglab
