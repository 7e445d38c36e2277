#pragma once

#include <memory>
#include <vector>

#include "macaac/envs/environment.hpp"

namespace macaac::envs {

// mu independent environments stepped together. Instances share no state,
// so step_all may run them on separate threads.
class VecEnv {
 public:
  explicit VecEnv(const std::vector<EnvConfig>& configs);
  // mu copies of cfg with seeds derived from cfg.seed.
  static VecEnv replicate(const EnvConfig& cfg, int mu);

  std::size_t size() const { return envs_.size(); }
  Environment& env(std::size_t e) { return *envs_[e]; }
  const Environment& env(std::size_t e) const { return *envs_[e]; }

  // [env][agent] observations.
  std::vector<std::vector<Observation>> reset_all();
  // actions[env][agent]
  std::vector<StepResult> step_all(const std::vector<std::vector<int>>& actions);

 private:
  std::vector<std::unique_ptr<Environment>> envs_;
};

}  // namespace macaac::envs
