#pragma once

// The constrained attention actor-critic training loop.
//
// Per environment step: every actor samples from its own observation, the
// mu environments advance, r = k + sum_j lambda_j c_j is formed and the joint
// transition enters the replay buffer. After each step u += mu; whenever
// (u % U) < mu an update event runs: sample a minibatch, one critic step for
// the Lagrangian critic (on r) and each penalty critic (on c_j), one actor
// step per agent, then one projected ascent step on lambda, then a soft
// target update.
//
// Sign convention: everything is a cost. Critic losses and the actor
// surrogate log pi(a) * [alpha log pi(a) + Q(a) - b] are both descended.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "macaac/attention_critic.hpp"
#include "macaac/envs/environment.hpp"
#include "macaac/lagrange.hpp"
#include "macaac/policy.hpp"
#include "macaac/replay.hpp"

namespace macaac {

enum class Variant { kMacaac, kUnconstrained, kFixedWeights };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct TrainConfig {
  envs::EnvConfig env;
  Variant variant = Variant::kMacaac;
  std::vector<double> thresholds;     // alpha_j, one per penalty
  std::vector<double> fixed_weights;  // used by kFixedWeights

  int episodes = 1000;              // E
  int steps_per_update = 100;       // U
  int n_envs = 12;                  // mu
  int updates_per_event = 1;
  std::size_t batch_size = 1024;    // B
  std::size_t buffer_capacity = 1000000;

  double gamma = 0.99;
  double temperature = 0.01;        // entropy coefficient
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  StepSchedule beta{1e-4, 0};
  double max_beta_ratio = 0.1;      // beta / actor_lr must not exceed this
  double target_tau = 0.005;
  double grad_clip = 0.5;           // global norm; <= 0 disables
  bool penalty_entropy = false;     // entropy term in penalty-critic targets
  bool relabel_cost = false;        // recompute r from stored k, c with the current lambda
  bool critic_time_feature = true;  // append remaining-horizon fraction to critic inputs

  std::size_t actor_hidden = 128;
  std::size_t critic_embed = 128;
  std::size_t critic_heads = 4;
  std::size_t critic_key_dim = 32;

  std::uint64_t seed = 1;

  // Logging cadence (0 disables).
  int attention_log_interval = 100;  // update events
  int checkpoint_interval = 0;       // episodes
  int eval_interval = 0;             // episodes
  int eval_runs = 64;
  bool dump_trajectories = false;

  // Throws ConfigError.
  void validate() const;
  int n_penalties() const;
};

// Dimensions the learners are built for; derived from the environment or
// given directly for synthetic problems.
struct ProblemShape {
  std::size_t n_agents = 0;
  std::size_t obs_dim = 0;
  std::size_t n_actions = envs::kNumActions;
  std::size_t n_penalties = 0;
  int episode_length = 1;
};

ProblemShape shape_of(const envs::EnvConfig& env);

// Minibatch laid out per agent as matrices.
struct Minibatch {
  std::size_t size = 0;
  std::vector<ad::Tensor> obs, next_obs;                // [B x obs_dim]
  std::vector<ad::Tensor> critic_obs, critic_next_obs;  // critic inputs
  std::vector<std::vector<int>> actions;                // [agent][B]
  std::vector<ad::Tensor> action_onehot;                // [B x A]
  std::vector<double> r, cost, not_done;
  std::vector<std::vector<double>> penalties;           // [j][B]
  std::vector<int> step;
};

Minibatch make_minibatch(const ReplayBuffer& buffer, std::span<const std::size_t> idx,
                         const ProblemShape& shape, bool time_feature);

// Closed form of how many times (u % U) < mu fires in `steps` loop
// iterations with u advancing by mu each time.
std::int64_t expected_update_events(std::int64_t mu, std::int64_t steps_per_update,
                                    std::int64_t steps);

struct CriticLosses {
  double lagrangian = 0.0;
  std::vector<double> penalty;
};

struct EpisodeMetrics {
  int episode = 0;
  double mean_total_cost = 0.0;
  std::vector<double> mean_total_penalty;
};

struct MultiplierRecord {
  std::int64_t iteration = 0;
  std::vector<double> lambda, q_penalty, thresholds;
};

struct TrainResult {
  std::int64_t transitions = 0;
  std::int64_t update_triggers = 0;   // times (u % U) < mu fired
  std::int64_t updates_performed = 0; // triggers with a full minibatch available
  std::int64_t multiplier_updates = 0;
  std::vector<EpisodeMetrics> metrics;
  std::vector<MultiplierRecord> multipliers;
  std::vector<double> final_lambda;
  double max_lambda_seen = 0.0;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);
  Trainer(TrainConfig cfg, const ProblemShape& shape);

  const TrainConfig& config() const { return cfg_; }
  const ProblemShape& shape() const { return shape_; }

  // Runs the full loop; writes the run directory when given.
  TrainResult train(const std::optional<std::filesystem::path>& run_dir = std::nullopt);

  CriticLosses update_critics(const Minibatch& mb);
  // Returns the mean surrogate loss per agent.
  std::vector<double> update_actors(const Minibatch& mb);
  // Penalty-critic estimate of each constraint value, read at the
  // episode-start transitions of the minibatch (all transitions when none).
  std::vector<double> estimate_penalty_values(const Minibatch& mb) const;
  void soft_update_targets();

  std::vector<Actor>& actors() { return actors_; }
  const std::vector<Actor>& actors() const { return actors_; }
  AttentionCritic& lagrangian_critic() { return critics_[0]; }
  const AttentionCritic& lagrangian_critic() const { return critics_[0]; }
  // Empty for the unconstrained variant.
  std::vector<AttentionCritic> penalty_critics() const;
  AttentionCritic& critic(std::size_t c) { return critics_.at(c); }
  std::size_t n_critics() const { return critics_.size(); }
  const LagrangeState& lagrange() const { return lagrange_; }
  const ReplayBuffer& replay() const { return replay_; }
  ReplayBuffer& replay() { return replay_; }

  // Actors, critics and target critics.
  nn::NamedTensors parameters() const;
  nn::NamedTensors actor_parameters() const;
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

  // Per-step hook for tests; called with the running update-trigger count.
  std::function<void(std::int64_t transitions, std::int64_t triggers)> on_step;

 private:
  void build();

  TrainConfig cfg_;
  ProblemShape shape_;
  Rng init_rng_, rollout_rng_, sample_rng_, update_rng_;
  std::vector<Actor> actors_;
  std::vector<AttentionCritic> critics_;  // [0] Lagrangian, [1..m] penalty
  std::vector<AttentionCritic> targets_;
  std::vector<nn::Adam> actor_opt_;
  std::vector<nn::Adam> critic_opt_;
  LagrangeState lagrange_;
  ReplayBuffer replay_;
  std::int64_t update_events_ = 0;
};

}  // namespace macaac
