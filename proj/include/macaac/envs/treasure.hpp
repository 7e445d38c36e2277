#pragma once

#include "macaac/envs/environment.hpp"

namespace macaac::envs {

// Constrained cooperative treasure collection.
//
// Agents 0..C-1 are collectors, the remaining D are depositors (banks);
// depositor d carries bank color d % 2. Treasures have color 0 or 1. A free
// collector overlapping a treasure picks it up and the treasure respawns; a
// carrying collector overlapping a bank of the matching color deposits it.
//
//   cost k = distance_scale * (sum over collectors of the distance to their
//            goal: nearest treasure when free, nearest matching bank when
//            carrying; plus, per depositor, the distance to the nearest
//            collector carrying its color) + deposit_bonus per deposit
//   c_1    = colliding collector pairs, c_2 = colliding depositor pairs
//
// Observation per agent:
//   [own pos (2), own vel (2), treasure - own pos (2 per treasure),
//    other - own pos (2 per other agent), treasure colors (1 per treasure),
//    carried/bank color one-hot (2 per agent, self first then others)]
class TreasureCollection final : public Environment {
 public:
  explicit TreasureCollection(EnvConfig cfg);

  using Environment::reset;
  std::vector<Observation> reset() override;
  StepResult step(std::span<const int> actions) override;
  std::vector<Observation> observe() const override;
  int n_penalties() const override { return 2; }
  std::size_t obs_dim() const override;
  std::string name() const override { return "treasure"; }

  struct Treasure {
    Vec2 position;
    int color = 0;
  };

  int n_collectors() const { return config_.n_collectors; }
  bool is_collector(std::size_t i) const { return static_cast<int>(i) < config_.n_collectors; }
  const std::vector<Treasure>& treasures() const { return treasures_; }
  // -1 when free.
  int carried(int collector) const { return carrying_[static_cast<std::size_t>(collector)]; }
  void set_treasure(int j, Vec2 position, int color);
  void set_carried(int collector, int color);
  std::int64_t deposits() const { return deposits_; }

 private:
  double distance_cost() const;
  Treasure random_treasure();

  std::vector<Treasure> treasures_;
  std::vector<int> carrying_;
  std::int64_t deposits_ = 0;
};

}  // namespace macaac::envs
