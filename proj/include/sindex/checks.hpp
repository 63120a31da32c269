#pragma once

#include <string>
#include <vector>

#include "sindex/harness.hpp"

namespace sindex::checks {

struct CheckResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

// Acceptance criteria 1..11.  Tolerances and thresholds are pinned in the
// implementations; each call is deterministic.
CheckResult run_criterion(int id);
std::vector<CheckResult> run_all_criteria();

// Fast property suite behind `check --suite invariants`.
std::vector<CheckResult> run_invariants();

// The experiment configuration the determinism criterion runs twice; also the
// config behind `experiment` when no file is given.
ExperimentConfig default_experiment_config();

}  // namespace sindex::checks
