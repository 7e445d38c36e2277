#include "macaac/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace macaac::ad {

GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, double eps, double tol,
                           double floor) {
  GradCheckReport rep;
  Tensor leaf = x.clone(true);
  Tensor y = f(leaf);
  y.backward();
  rep.analytic.assign(leaf.grad().begin(), leaf.grad().end());

  const std::size_t n = x.numel();
  rep.numeric.resize(n);
  rep.rel_error.resize(n);
  std::vector<double> base(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < n; ++i) {
    auto probe = [&](double delta) {
      std::vector<double> v = base;
      v[i] += delta;
      return f(Tensor::from(x.shape(), std::move(v))).item();
    };
    rep.numeric[i] = (probe(eps) - probe(-eps)) / (2.0 * eps);
    const double a = rep.analytic[i], num = rep.numeric[i];
    const double denom = std::max({std::abs(a), std::abs(num), floor});
    rep.rel_error[i] = std::abs(a - num) / denom;
    rep.max_rel_error = std::max(rep.max_rel_error, rep.rel_error[i]);
  }
  rep.passed = std::isfinite(rep.max_rel_error) && rep.max_rel_error < tol;
  return rep;
}

GradCheckReport grad_check_inplace(const std::function<Tensor()>& f, Tensor param, double eps,
                                   double tol, double floor) {
  GradCheckReport rep;
  const bool had_grad = param.requires_grad();
  param.set_requires_grad(true);
  param.zero_grad();
  Tensor y = f();
  y.backward();
  rep.analytic.assign(param.grad().begin(), param.grad().end());
  param.zero_grad();

  auto values = param.mutable_data();
  const std::size_t n = values.size();
  rep.numeric.resize(n);
  rep.rel_error.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = f().item();
    values[i] = saved - eps;
    const double down = f().item();
    values[i] = saved;
    rep.numeric[i] = (up - down) / (2.0 * eps);
    const double a = rep.analytic[i], num = rep.numeric[i];
    const double denom = std::max({std::abs(a), std::abs(num), floor});
    rep.rel_error[i] = std::abs(a - num) / denom;
    rep.max_rel_error = std::max(rep.max_rel_error, rep.rel_error[i]);
  }
  param.set_requires_grad(had_grad);
  rep.passed = std::isfinite(rep.max_rel_error) && rep.max_rel_error < tol;
  return rep;
}

}  // namespace macaac::ad
