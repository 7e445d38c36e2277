#pragma once

#include "macaac/envs/environment.hpp"

namespace macaac::envs {

// Constrained cooperative navigation: n agents cover n targets.
//   cost      k   = sum over targets of the distance to the nearest agent
//   penalty   c_1 = number of colliding agent pairs after the step
// Observation per agent:
//   [own pos (2), own vel (2), target - own pos (2 per target),
//    other - own pos (2 per other agent, index order)]
class CooperativeNavigation final : public Environment {
 public:
  explicit CooperativeNavigation(EnvConfig cfg);

  using Environment::reset;
  std::vector<Observation> reset() override;
  StepResult step(std::span<const int> actions) override;
  std::vector<Observation> observe() const override;
  int n_penalties() const override { return 1; }
  std::size_t obs_dim() const override;
  std::string name() const override { return "navigation"; }

  const std::vector<Vec2>& targets() const { return targets_; }
  void set_target(int j, Vec2 position);

  double current_cost() const;
  int current_collisions() const;

 private:
  std::vector<Vec2> targets_;
};

}  // namespace macaac::envs
