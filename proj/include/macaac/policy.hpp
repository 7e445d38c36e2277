#pragma once

// Decentralized categorical actors pi_theta_i(a_i | o_i). An actor only ever
// sees its own agent's observation.

#include <span>
#include <vector>

#include "macaac/nn.hpp"
#include "macaac/rng.hpp"

namespace macaac {

struct ActResult {
  int action = 0;
  double log_prob = 0.0;
};

class Actor {
 public:
  Actor() = default;
  Actor(std::size_t obs_dim, std::size_t n_actions, std::size_t hidden, Rng& rng);

  std::size_t obs_dim() const { return net_.fc1.in_features(); }
  std::size_t n_actions() const { return net_.out.out_features(); }

  // [B x obs_dim] -> [B x n_actions]
  ad::Tensor logits(const ad::Tensor& obs) const;
  ad::Tensor log_probs(const ad::Tensor& obs) const;

  std::vector<double> distribution(std::span<const double> obs) const;
  // Samples from softmax(logits); greedy picks the arg-max instead.
  ActResult act(std::span<const double> obs, Rng& rng, bool greedy = false) const;

  void collect(const std::string& prefix, nn::NamedTensors& out) const { net_.collect(prefix, out); }
  nn::NamedTensors parameters(const std::string& prefix) const;

 private:
  nn::Mlp net_;
};

// Softmax with max subtraction; throws NumericError on non-finite logits.
std::vector<double> categorical_from_logits(std::span<const double> logits);
// Inverse-CDF draw.
int sample_categorical(std::span<const double> probs, Rng& rng);
// -sum p log p with 0 log 0 = 0.
double entropy(std::span<const double> dist);

}  // namespace macaac
