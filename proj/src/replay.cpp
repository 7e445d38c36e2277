#include "macaac/replay.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "macaac/errors.hpp"
#include "macaac/lagrange.hpp"

namespace macaac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("replay capacity must be >= 1");
}

void ReplayBuffer::push(JointTransition t) {
  const std::size_t n = t.obs.size();
  if (n == 0 || t.actions.size() != n || t.next_obs.size() != n) {
    throw ContractError("malformed transition: " + std::to_string(n) + " observations, " +
                        std::to_string(t.actions.size()) + " actions, " +
                        std::to_string(t.next_obs.size()) + " next observations");
  }
  if (!empty() && slots_[0].obs.size() != n) throw ContractError("agent count changed");
  if (n_penalties_ && *n_penalties_ != t.penalties.size()) {
    throw ContractError("penalty vector length changed");
  }
  if (!t.multipliers.empty()) {
    const double expect = lagrangian_cost(t.cost, t.penalties, t.multipliers);
    if (std::abs(expect - t.r) > 1e-9 * (1.0 + std::abs(expect))) {
      throw ContractError("transition r disagrees with k + lambda . c");
    }
  }
  n_penalties_ = t.penalties.size();
  if (slots_.size() < capacity_) {
    slots_.push_back(std::move(t));
    size_ = slots_.size();
  } else {
    slots_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const JointTransition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= size_) throw ContractError("replay index out of range");
  return slots_[(head_ + i) % slots_.size()];
}

std::optional<std::vector<std::size_t>> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch == 0) throw ContractError("minibatch size must be >= 1");
  if (size_ < batch) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void ReplayBuffer::save_jsonl(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < size_; ++i) {
    const auto& t = (*this)[i];
    nlohmann::json j = {{"t", t.step},         {"observations", t.obs},
                        {"actions", t.actions}, {"r", t.r},
                        {"cost", t.cost},       {"penalties", t.penalties},
                        {"lambda", t.multipliers}, {"next_observations", t.next_obs},
                        {"done", t.done}};
    os << j.dump() << '\n';
  }
}

}  // namespace macaac
