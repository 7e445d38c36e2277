#pragma once

// Lagrangian relaxation bookkeeping: combined cost r = k + sum_j lambda_j c_j
// and projected ascent lambda_j <- max(0, lambda_j + beta_t (Q_eta_j - alpha_j)).

#include <cstdint>
#include <span>
#include <vector>

namespace macaac {

double lagrangian_cost(double cost, std::span<const double> penalties,
                       std::span<const double> multipliers);

// sum_t gamma^t costs[t]
double discounted_return(std::span<const double> costs, double gamma);

// beta_t = beta for decay_period == 0, else beta / ceil(t / decay_period).
struct StepSchedule {
  double beta = 1e-3;
  std::int64_t decay_period = 0;

  double at(std::int64_t t) const;
};

enum class MultiplierMode { kAdaptive, kFixed };

class LagrangeState {
 public:
  LagrangeState() = default;
  static LagrangeState adaptive(std::vector<double> thresholds, StepSchedule schedule,
                                std::vector<double> initial = {});
  static LagrangeState fixed(std::vector<double> thresholds, std::vector<double> weights);

  MultiplierMode mode() const { return mode_; }
  std::size_t size() const { return lambda_.size(); }
  const std::vector<double>& lambda() const { return lambda_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const StepSchedule& schedule() const { return schedule_; }
  std::int64_t ticks() const { return ticks_; }
  // Step size the next update will use.
  double next_beta() const { return schedule_.at(ticks_ + 1); }

  // One projected ascent step; throws ContractError in fixed mode or on a
  // length mismatch.
  void update(std::span<const double> q_penalty);

 private:
  MultiplierMode mode_ = MultiplierMode::kAdaptive;
  std::vector<double> lambda_;
  std::vector<double> thresholds_;
  StepSchedule schedule_;
  std::int64_t ticks_ = 0;
};

LagrangeState update_multipliers(LagrangeState state, std::span<const double> q_penalty);

}  // namespace macaac
