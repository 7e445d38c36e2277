#pragma once

// Testing-phase protocol: roll out frozen actors for n episodes and average
// per-episode totals of the cost and of each penalty.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "macaac/attention_critic.hpp"
#include "macaac/envs/environment.hpp"
#include "macaac/policy.hpp"

namespace macaac {

struct EvalReport {
  std::string variant;
  std::string env;
  int runs = 0;
  std::uint64_t seed = 0;
  bool greedy = false;
  double gamma = 0.99;
  // Undiscounted per-episode totals, averaged over runs.
  double mean_total_cost = 0.0;
  std::vector<double> mean_total_penalty;
  // Discounted (sum_t gamma^t) versions of the same.
  double mean_discounted_cost = 0.0;
  std::vector<double> mean_discounted_penalty;
  std::vector<double> thresholds;
  // mean_total_penalty[j] <= thresholds[j]
  std::vector<bool> feasible;

  nlohmann::json to_json() const;
};

// Optional attention capture during evaluation: mean weight per episode for
// every (critic, agent i, other agent j, head).
struct AttentionProbe {
  const std::vector<AttentionCritic>* critics = nullptr;  // [0] Lagrangian, then penalty
  bool time_feature = true;
  std::vector<std::vector<double>> rows;  // episode, critic, i, j, head, weight
};

struct EvalOptions {
  int runs = 1000;
  std::uint64_t seed = 0;
  double gamma = 0.99;
  bool greedy = false;
  std::vector<double> thresholds;
  std::string variant = "unknown";
};

EvalReport evaluate(const std::vector<Actor>& actors, const envs::EnvConfig& env,
                    const EvalOptions& opts, AttentionProbe* probe = nullptr);

// Loads actors (and critics when present) from a trainer checkpoint. The
// env config defaults to the one stored in the checkpoint; a supplied env
// must produce the same agent count and observation width.
EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                               const std::optional<envs::EnvConfig>& env, EvalOptions opts,
                               AttentionProbe* probe = nullptr);

// Rows from AttentionProbe in the attention CSV schema.
void write_attention_csv(const std::filesystem::path& path,
                         const std::vector<std::vector<double>>& rows);

}  // namespace macaac
