#pragma once

// Finite-difference sweep over every differentiable op and the attention
// critic. Used by the grad-check subcommand and the test suites.

#include <cstdint>
#include <string>
#include <vector>

namespace macaac {

struct GradCaseResult {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

std::vector<GradCaseResult> run_gradient_suite(int instances, std::uint64_t seed,
                                               double eps = 1e-6, double tol = 1e-4);

}  // namespace macaac
