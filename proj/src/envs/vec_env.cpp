#include "macaac/envs/vec_env.hpp"

#include "macaac/errors.hpp"

namespace macaac::envs {

VecEnv::VecEnv(const std::vector<EnvConfig>& configs) {
  if (configs.empty()) throw ContractError("VecEnv needs at least one environment");
  for (const auto& c : configs) envs_.push_back(make_env(c));
}

VecEnv VecEnv::replicate(const EnvConfig& cfg, int mu) {
  if (mu < 1) throw ContractError("VecEnv needs mu >= 1");
  std::vector<EnvConfig> cfgs(static_cast<std::size_t>(mu), cfg);
  for (int e = 0; e < mu; ++e) {
    cfgs[static_cast<std::size_t>(e)].seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(e));
  }
  return VecEnv(cfgs);
}

std::vector<std::vector<Observation>> VecEnv::reset_all() {
  std::vector<std::vector<Observation>> out(envs_.size());
  const long n = static_cast<long>(envs_.size());
#pragma omp parallel for schedule(static)
  for (long e = 0; e < n; ++e) out[static_cast<std::size_t>(e)] = envs_[static_cast<std::size_t>(e)]->reset();
  return out;
}

std::vector<StepResult> VecEnv::step_all(const std::vector<std::vector<int>>& actions) {
  if (actions.size() != envs_.size()) {
    throw ContractError("step_all: " + std::to_string(actions.size()) + " action sets for " +
                        std::to_string(envs_.size()) + " environments");
  }
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    if (actions[e].size() != static_cast<std::size_t>(envs_[e]->n_agents())) {
      throw ContractError("step_all: environment " + std::to_string(e) + " expects " +
                          std::to_string(envs_[e]->n_agents()) + " actions");
    }
    for (int a : actions[e]) {
      if (a < 0 || a >= kNumActions) {
        throw ContractError("step_all: action index " + std::to_string(a) + " out of range");
      }
    }
  }
  std::vector<StepResult> out(envs_.size());
  const long n = static_cast<long>(envs_.size());
#pragma omp parallel for schedule(static)
  for (long e = 0; e < n; ++e) {
    const auto k = static_cast<std::size_t>(e);
    out[k] = envs_[k]->step(actions[k]);
  }
  return out;
}

}  // namespace macaac::envs
