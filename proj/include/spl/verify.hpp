#pragma once
// Self-checking suites behind `spl verify`: fixture reproductions, invariant
// audits over seeded runs, and bound sweeps. Each check reports pass/fail
// plus the operations it exercised; the "all" suite asserts that the union
// covers every agent and learner operation.

#include <string>
#include <vector>

#include "spl/learners.hpp"

namespace spl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // failure diagnostics, or a short pass note
  std::vector<std::string> ops_covered;
};

struct VerifyOptions {
  int seeds = 20;             // seeded runs per randomized check
  FaultInjection faults;      // threaded into every learner under test
  double oracle_step = 0.0;   // grid step for oracle checks; 0 = budget/200
  double oracle_radius = 0.0; // grid radius; 0 = 1.05 * budget
};

// "fixtures", "steps", "bounds", "all"
std::vector<std::string> verify_suites();

std::vector<CheckResult> run_verify_suite(const std::string& suite,
                                          const VerifyOptions& opt);

}  // namespace spl
