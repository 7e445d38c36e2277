#include "macaac/envs/environment.hpp"

#include <algorithm>
#include <cmath>

#include "macaac/envs/navigation.hpp"
#include "macaac/envs/treasure.hpp"
#include "macaac/errors.hpp"

namespace macaac::envs {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string to_string(EnvKind kind) {
  return kind == EnvKind::kNavigation ? "navigation" : "treasure";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "navigation") return EnvKind::kNavigation;
  if (s == "treasure") return EnvKind::kTreasure;
  throw ConfigError("unknown environment '" + s + "' (expected navigation or treasure)");
}

void EnvConfig::validate() const {
  if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
  if (n_agents < 2) throw ConfigError("n_agents must be >= 2");
  if (n_targets < 1) throw ConfigError("n_targets must be >= 1");
  if (agent_radius <= 0.0) throw ConfigError("agent_radius must be > 0");
  if (physics.dt <= 0.0 || physics.damping < 0.0 || physics.damping > 1.0) {
    throw ConfigError("physics requires dt > 0 and damping in [0, 1]");
  }
  if (kind == EnvKind::kTreasure) {
    if (n_collectors < 2 || n_depositors < 2) {
      throw ConfigError("treasure collection needs >= 2 collectors and >= 2 depositors");
    }
    if (n_collectors + n_depositors != n_agents) {
      throw ConfigError("n_agents must equal n_collectors + n_depositors");
    }
    if (depositor_radius <= 0.0 || treasure_radius <= 0.0) {
      throw ConfigError("treasure and depositor radii must be > 0");
    }
  }
}

Environment::Environment(EnvConfig cfg) : config_(std::move(cfg)), rng_(config_.seed) {
  config_.validate();
}

std::vector<Observation> Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

void Environment::set_agent(int i, Vec2 position, Vec2 velocity) {
  auto& a = agents_.at(static_cast<std::size_t>(i));
  a.position = position;
  a.velocity = velocity;
}

void Environment::check_actions(std::span<const int> actions) const {
  if (actions.size() != agents_.size()) {
    throw ContractError("expected " + std::to_string(agents_.size()) + " actions, got " +
                        std::to_string(actions.size()));
  }
  for (int a : actions) {
    if (a < 0 || a >= kNumActions) {
      throw ContractError("action index " + std::to_string(a) + " out of range [0, 5)");
    }
  }
}

void Environment::integrate(std::span<const int> actions) {
  const Physics& ph = config_.physics;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Vec2 dir;
    switch (static_cast<Action>(actions[i])) {
      case Action::kNoop: break;
      case Action::kPosX: dir.x = 1.0; break;
      case Action::kNegX: dir.x = -1.0; break;
      case Action::kPosY: dir.y = 1.0; break;
      case Action::kNegY: dir.y = -1.0; break;
    }
    auto& b = agents_[i];
    b.velocity.x = ph.damping * b.velocity.x + ph.force_scale * dir.x * ph.dt;
    b.velocity.y = ph.damping * b.velocity.y + ph.force_scale * dir.y * ph.dt;
    b.position.x += b.velocity.x * ph.dt;
    b.position.y += b.velocity.y * ph.dt;
    if (std::abs(b.position.x) > kWorldBound) {
      b.position.x = std::clamp(b.position.x, -kWorldBound, kWorldBound);
      b.velocity.x = 0.0;
    }
    if (std::abs(b.position.y) > kWorldBound) {
      b.position.y = std::clamp(b.position.y, -kWorldBound, kWorldBound);
      b.velocity.y = 0.0;
    }
  }
}

Vec2 Environment::random_position() {
  std::uniform_real_distribution<double> u(-kWorldBound, kWorldBound);
  const double x = u(rng_);
  const double y = u(rng_);
  return {x, y};
}

std::unique_ptr<Environment> make_env(const EnvConfig& cfg) {
  if (cfg.kind == EnvKind::kNavigation) return std::make_unique<CooperativeNavigation>(cfg);
  return std::make_unique<TreasureCollection>(cfg);
}

}  // namespace macaac::envs
