#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "macaac/envs/environment.hpp"
#include "macaac/rng.hpp"

namespace macaac {

struct JointTransition {
  std::vector<envs::Observation> obs;
  std::vector<int> actions;
  double r = 0.0;                   // Lagrangian cost at insertion time
  double cost = 0.0;                // raw k
  std::vector<double> penalties;    // raw c_1..c_m
  std::vector<double> multipliers;  // lambda used to form r
  std::vector<envs::Observation> next_obs;
  bool done = false;
  int step = 0;  // time index within the episode of obs
};

// Fixed-capacity FIFO store with uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // Throws ContractError for inconsistent agent counts, a penalty vector whose
  // length differs from earlier entries, or r != k + lambda . c.
  void push(JointTransition t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  // 0 is the oldest stored transition.
  const JointTransition& operator[](std::size_t i) const;

  // Indices (for operator[]) of `batch` independent uniform draws, or
  // nullopt while fewer than `batch` transitions are stored.
  std::optional<std::vector<std::size_t>> sample(std::size_t batch, Rng& rng) const;

  // One JSON object per line, oldest first.
  void save_jsonl(const std::filesystem::path& path) const;

 private:
  std::size_t capacity_;
  std::vector<JointTransition> slots_;
  std::size_t head_ = 0;  // next write position once full
  std::size_t size_ = 0;
  std::optional<std::size_t> n_penalties_;
};

}  // namespace macaac
