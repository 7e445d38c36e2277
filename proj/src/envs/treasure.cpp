#include "macaac/envs/treasure.hpp"

#include <algorithm>
#include <limits>

#include "macaac/errors.hpp"

namespace macaac::envs {

TreasureCollection::TreasureCollection(EnvConfig cfg) : Environment(std::move(cfg)) {
  agents_.resize(static_cast<std::size_t>(config_.n_agents));
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& a = agents_[i];
    if (is_collector(i)) {
      a.role = Role::kCollector;
      a.radius = config_.agent_radius;
    } else {
      a.role = Role::kDepositor;
      a.radius = config_.depositor_radius;
      a.color = static_cast<int>(i - static_cast<std::size_t>(config_.n_collectors)) % 2;
    }
  }
  treasures_.resize(static_cast<std::size_t>(config_.n_targets));
  carrying_.assign(static_cast<std::size_t>(config_.n_collectors), -1);
}

TreasureCollection::Treasure TreasureCollection::random_treasure() {
  Treasure t;
  t.position = random_position();
  t.color = std::uniform_int_distribution<int>(0, 1)(rng_);
  return t;
}

std::vector<Observation> TreasureCollection::reset() {
  for (auto& a : agents_) {
    a.position = random_position();
    a.velocity = {};
  }
  for (auto& t : treasures_) t = random_treasure();
  std::fill(carrying_.begin(), carrying_.end(), -1);
  deposits_ = 0;
  steps_ = 0;
  ++episodes_;
  return observe();
}

void TreasureCollection::set_treasure(int j, Vec2 position, int color) {
  if (color != 0 && color != 1) throw ContractError("treasure color must be 0 or 1");
  treasures_.at(static_cast<std::size_t>(j)) = {position, color};
}

void TreasureCollection::set_carried(int collector, int color) {
  if (color < -1 || color > 1) throw ContractError("carried color must be -1, 0 or 1");
  carrying_.at(static_cast<std::size_t>(collector)) = color;
}

std::size_t TreasureCollection::obs_dim() const {
  const std::size_t t = treasures_.size(), n = agents_.size();
  return 4 + 2 * t + 2 * (n - 1) + t + 2 * n;
}

std::vector<Observation> TreasureCollection::observe() const {
  const std::size_t n = agents_.size();
  auto color_of = [&](std::size_t j) {
    return is_collector(j) ? carrying_[j] : agents_[j].color;
  };
  std::vector<Observation> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& me = agents_[i];
    auto& o = obs[i];
    o.reserve(obs_dim());
    o.insert(o.end(), {me.position.x, me.position.y, me.velocity.x, me.velocity.y});
    for (const auto& t : treasures_) {
      o.push_back(t.position.x - me.position.x);
      o.push_back(t.position.y - me.position.y);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      o.push_back(agents_[j].position.x - me.position.x);
      o.push_back(agents_[j].position.y - me.position.y);
    }
    for (const auto& t : treasures_) o.push_back(static_cast<double>(t.color));
    auto push_color = [&](int c) {
      o.push_back(c == 0 ? 1.0 : 0.0);
      o.push_back(c == 1 ? 1.0 : 0.0);
    };
    push_color(color_of(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) push_color(color_of(j));
    }
  }
  return obs;
}

double TreasureCollection::distance_cost() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = agents_.size();
  double total = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(config_.n_collectors); ++i) {
    const Vec2 p = agents_[i].position;
    double best = kInf;
    if (carrying_[i] < 0) {
      for (const auto& t : treasures_) best = std::min(best, distance(p, t.position));
    } else {
      for (std::size_t j = static_cast<std::size_t>(config_.n_collectors); j < n; ++j) {
        if (agents_[j].color == carrying_[i]) best = std::min(best, distance(p, agents_[j].position));
      }
    }
    if (best < kInf) total += best;
  }
  for (std::size_t j = static_cast<std::size_t>(config_.n_collectors); j < n; ++j) {
    double best = kInf;
    for (std::size_t i = 0; i < static_cast<std::size_t>(config_.n_collectors); ++i) {
      if (carrying_[i] == agents_[j].color) {
        best = std::min(best, distance(agents_[j].position, agents_[i].position));
      }
    }
    if (best < kInf) total += best;
  }
  return config_.distance_scale * total;
}

StepResult TreasureCollection::step(std::span<const int> actions) {
  check_actions(actions);
  integrate(actions);
  ++steps_;

  const std::size_t n = agents_.size();
  const auto nc = static_cast<std::size_t>(config_.n_collectors);
  // Pick-ups in collector order; a captured treasure respawns immediately.
  for (std::size_t i = 0; i < nc; ++i) {
    if (carrying_[i] >= 0) continue;
    for (auto& t : treasures_) {
      if (distance(agents_[i].position, t.position) < agents_[i].radius + config_.treasure_radius) {
        carrying_[i] = t.color;
        t = random_treasure();
        break;
      }
    }
  }
  int delivered = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    if (carrying_[i] < 0) continue;
    for (std::size_t j = nc; j < n; ++j) {
      if (agents_[j].color == carrying_[i] &&
          distance(agents_[i].position, agents_[j].position) <
              agents_[i].radius + agents_[j].radius) {
        carrying_[i] = -1;
        ++delivered;
        break;
      }
    }
  }
  deposits_ += delivered;

  StepResult r;
  r.cost = distance_cost() + config_.deposit_bonus * delivered;
  r.penalties = {
      static_cast<double>(count_collisions([&](std::size_t k) { return k < nc; })),
      static_cast<double>(count_collisions([&](std::size_t k) { return k >= nc; }))};
  r.observations = observe();
  r.done = steps_ >= config_.episode_length;
  return r;
}

}  // namespace macaac::envs
