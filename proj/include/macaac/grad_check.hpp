#pragma once

#include <functional>
#include <vector>

#include "macaac/tensor.hpp"

namespace macaac::ad {

struct GradCheckReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  // |analytic - numeric| / max(|analytic|, |numeric|, floor)
  std::vector<double> rel_error;
  double max_rel_error = 0.0;
  bool passed = false;
};

using ScalarFn = std::function<Tensor(const Tensor&)>;

// Compares the reverse-mode gradient of f at x with central differences.
// f must be deterministic and return a scalar.
GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, double eps = 1e-6,
                           double tol = 1e-4, double floor = 1e-3);

}  // namespace macaac::ad

namespace macaac::ad {

// Like grad_check, but for a tensor captured inside f (a parameter): values
// are perturbed in place and restored afterwards.
GradCheckReport grad_check_inplace(const std::function<Tensor()>& f, Tensor param,
                                   double eps = 1e-6, double tol = 1e-4, double floor = 1e-3);

}  // namespace macaac::ad
