#include "macaac/envs/navigation.hpp"

#include <algorithm>
#include <limits>

namespace macaac::envs {

CooperativeNavigation::CooperativeNavigation(EnvConfig cfg) : Environment(std::move(cfg)) {
  agents_.resize(static_cast<std::size_t>(config_.n_agents));
  for (auto& a : agents_) a.radius = config_.agent_radius;
  targets_.resize(static_cast<std::size_t>(config_.n_targets));
}

std::vector<Observation> CooperativeNavigation::reset() {
  for (auto& a : agents_) {
    a.position = random_position();
    a.velocity = {};
  }
  for (auto& t : targets_) t = random_position();
  steps_ = 0;
  ++episodes_;
  return observe();
}

void CooperativeNavigation::set_target(int j, Vec2 position) {
  targets_.at(static_cast<std::size_t>(j)) = position;
}

std::size_t CooperativeNavigation::obs_dim() const {
  return 4 + 2 * targets_.size() + 2 * (agents_.size() - 1);
}

std::vector<Observation> CooperativeNavigation::observe() const {
  std::vector<Observation> obs(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& me = agents_[i];
    auto& o = obs[i];
    o.reserve(obs_dim());
    o.insert(o.end(), {me.position.x, me.position.y, me.velocity.x, me.velocity.y});
    for (const auto& t : targets_) {
      o.push_back(t.x - me.position.x);
      o.push_back(t.y - me.position.y);
    }
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == i) continue;
      o.push_back(agents_[j].position.x - me.position.x);
      o.push_back(agents_[j].position.y - me.position.y);
    }
  }
  return obs;
}

double CooperativeNavigation::current_cost() const {
  double k = 0.0;
  for (const auto& t : targets_) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : agents_) best = std::min(best, distance(t, a.position));
    k += best;
  }
  return k;
}

int CooperativeNavigation::current_collisions() const {
  return count_collisions([](std::size_t) { return true; });
}

StepResult CooperativeNavigation::step(std::span<const int> actions) {
  check_actions(actions);
  integrate(actions);
  ++steps_;
  StepResult r;
  r.cost = current_cost();
  r.penalties = {static_cast<double>(current_collisions())};
  r.observations = observe();
  r.done = steps_ >= config_.episode_length;
  return r;
}

}  // namespace macaac::envs
