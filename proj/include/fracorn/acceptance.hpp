#pragma once

// The integration gate: fifteen property checks covering the rigid
// kernel, the two seminorm forms, the reflection extension, the Hardy
// functional, the Whitney covers, the scaling laws, the constant
// estimators, the Galerkin solve, and cross-thread determinism.  Each
// criterion reports pass/fail with its measured numbers; the suite exits
// nonzero if any check fails.

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace fracorn {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured vs required
  double runtime_ms = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty = every criterion
  // Test hook: perturbs one reflection coefficient before the constraint
  // check, which must then fail loudly.
  bool corrupt_coefficient = false;
};

// Runs the requested criteria (the determinism criterion re-runs the
// others at thread counts 1 and 8 and compares every recorded value).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

// Prints the table and returns the process exit code: 0 when everything
// passed, 4 otherwise.
int acceptance_main(const AcceptanceOptions& opt, std::ostream& out);

}  // namespace fracorn
