#pragma once

// Particle-world benchmark environments.
//
// Every agent picks one of five discrete actions per tick and the world
// integrates a damped point mass:
//   v <- damping * v + force_scale * dir * dt
//   p <- clamp(p + v * dt, [-1, 1]^2)
// All agents receive the same cost k and the same penalties c_1..c_m.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "macaac/rng.hpp"

namespace macaac::envs {

enum class Action : int { kNoop = 0, kPosX = 1, kNegX = 2, kPosY = 3, kNegY = 4 };
inline constexpr int kNumActions = 5;

inline constexpr double kWorldBound = 1.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Vec2 a, Vec2 b);

enum class Role : int { kAgent = 0, kCollector = 1, kDepositor = 2 };

struct AgentBody {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.15;
  Role role = Role::kAgent;
  int color = -1;  // depositor bank color, or -1
};

using Observation = std::vector<double>;

struct StepResult {
  std::vector<Observation> observations;
  double cost = 0.0;
  std::vector<double> penalties;
  bool done = false;
};

struct Physics {
  double damping = 0.75;
  double dt = 0.1;
  double force_scale = 1.0;
};

enum class EnvKind { kNavigation, kTreasure };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

struct EnvConfig {
  EnvKind kind = EnvKind::kNavigation;
  int n_agents = 5;
  int n_targets = 5;  // navigation targets or treasures
  int episode_length = 25;
  Physics physics;
  double agent_radius = 0.15;
  // Treasure collection only.
  int n_collectors = 6;
  int n_depositors = 2;
  double depositor_radius = 0.1;
  double treasure_radius = 0.05;
  double distance_scale = 0.1;
  double deposit_bonus = -5.0;
  std::uint64_t seed = 0;

  // Throws ConfigError when inconsistent.
  void validate() const;
};

class Environment {
 public:
  virtual ~Environment() = default;

  // Reseeds the environment and starts a new episode.
  std::vector<Observation> reset(std::uint64_t seed);
  // New episode drawn from the environment's own stream.
  virtual std::vector<Observation> reset() = 0;
  // One action index per agent in [0, kNumActions).
  virtual StepResult step(std::span<const int> actions) = 0;
  virtual std::vector<Observation> observe() const = 0;
  virtual int n_penalties() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::string name() const = 0;

  const EnvConfig& config() const { return config_; }
  int n_agents() const { return static_cast<int>(agents_.size()); }
  int episode_length() const { return config_.episode_length; }
  int step_count() const { return steps_; }
  std::int64_t episodes_started() const { return episodes_; }

  const std::vector<AgentBody>& agents() const { return agents_; }
  // Direct state access for hand-built scenarios.
  void set_agent(int i, Vec2 position, Vec2 velocity = {});

  // Colliding unordered pairs among the agents for which `member` holds.
  template <class Pred>
  int count_collisions(Pred member) const;

 protected:
  explicit Environment(EnvConfig cfg);

  void check_actions(std::span<const int> actions) const;
  void integrate(std::span<const int> actions);
  Vec2 random_position();

  EnvConfig config_;
  Rng rng_;
  std::vector<AgentBody> agents_;
  int steps_ = 0;
  std::int64_t episodes_ = 0;
};

template <class Pred>
int Environment::count_collisions(Pred member) const {
  int hits = 0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!member(i)) continue;
    for (std::size_t j = i + 1; j < agents_.size(); ++j) {
      if (!member(j)) continue;
      if (distance(agents_[i].position, agents_[j].position) <
          agents_[i].radius + agents_[j].radius) {
        ++hits;
      }
    }
  }
  return hits;
}

std::unique_ptr<Environment> make_env(const EnvConfig& cfg);

}  // namespace macaac::envs
