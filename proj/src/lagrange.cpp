#include "macaac/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "macaac/errors.hpp"

namespace macaac {

double lagrangian_cost(double cost, std::span<const double> penalties,
                       std::span<const double> multipliers) {
  if (penalties.size() != multipliers.size()) {
    throw ContractError("lagrangian_cost: " + std::to_string(penalties.size()) +
                        " penalties for " + std::to_string(multipliers.size()) + " multipliers");
  }
  double r = cost;
  for (std::size_t j = 0; j < penalties.size(); ++j) r += multipliers[j] * penalties[j];
  return r;
}

double discounted_return(std::span<const double> costs, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractError("discount must lie in [0, 1]");
  double total = 0.0, w = 1.0;
  for (double c : costs) {
    total += w * c;
    w *= gamma;
  }
  return total;
}

double StepSchedule::at(std::int64_t t) const {
  if (decay_period <= 0) return beta;
  const std::int64_t k = std::max<std::int64_t>(1, (t + decay_period - 1) / decay_period);
  return beta / static_cast<double>(k);
}

LagrangeState LagrangeState::adaptive(std::vector<double> thresholds, StepSchedule schedule,
                                      std::vector<double> initial) {
  if (initial.empty()) initial.assign(thresholds.size(), 0.0);
  if (initial.size() != thresholds.size()) {
    throw ContractError("initial multipliers and thresholds differ in length");
  }
  if (!(schedule.beta > 0.0)) throw ContractError("multiplier step size must be > 0");
  for (double l : initial) {
    if (l < 0.0) throw ContractError("multipliers must be nonnegative");
  }
  LagrangeState s;
  s.mode_ = MultiplierMode::kAdaptive;
  s.lambda_ = std::move(initial);
  s.thresholds_ = std::move(thresholds);
  s.schedule_ = schedule;
  return s;
}

LagrangeState LagrangeState::fixed(std::vector<double> thresholds, std::vector<double> weights) {
  if (weights.size() != thresholds.size()) {
    throw ContractError("fixed weights and thresholds differ in length");
  }
  for (double w : weights) {
    if (w < 0.0) throw ContractError("fixed weights must be nonnegative");
  }
  LagrangeState s;
  s.mode_ = MultiplierMode::kFixed;
  s.lambda_ = std::move(weights);
  s.thresholds_ = std::move(thresholds);
  return s;
}

void LagrangeState::update(std::span<const double> q_penalty) {
  if (mode_ == MultiplierMode::kFixed) {
    throw ContractError("multipliers are fixed; update_multipliers is not allowed");
  }
  if (q_penalty.size() != lambda_.size()) {
    throw ContractError("update_multipliers: " + std::to_string(q_penalty.size()) +
                        " estimates for " + std::to_string(lambda_.size()) + " constraints");
  }
  ++ticks_;
  const double beta = schedule_.at(ticks_);
  for (std::size_t j = 0; j < lambda_.size(); ++j) {
    lambda_[j] = std::max(0.0, lambda_[j] + beta * (q_penalty[j] - thresholds_[j]));
  }
}

LagrangeState update_multipliers(LagrangeState state, std::span<const double> q_penalty) {
  state.update(q_penalty);
  return state;
}

}  // namespace macaac
