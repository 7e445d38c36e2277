#pragma once

// Attention critics shared by all agents.
//
// For agent i the critic encodes every agent's (observation, action) pair,
// projects the encodings to keys and values, projects agent i's
// observation-only encoding to a query, and attends over the other agents:
//
//   w_j = softmax_j(q_i . K_j / sqrt(d_k)),   x_i = sum_{j != i} w_j V_j
//   Q^i(o, . , a_-i) = f_i(e_i(o_i), x_i)    (one value per action of agent i)
//
// Each critic instance owns its own encoders and projections, so the
// Lagrangian critic and every penalty critic attend independently.

#include <string>
#include <vector>

#include "macaac/nn.hpp"
#include "macaac/rng.hpp"

namespace macaac {

// query: [B x d]; keys: one [B x d] per other agent -> [B x keys.size()].
ad::Tensor attention_weights(const ad::Tensor& query, const std::vector<ad::Tensor>& keys);
// weights: [B x m]; values: m tensors [B x d] -> [B x d].
ad::Tensor attention_context(const ad::Tensor& weights, const std::vector<ad::Tensor>& values);

// q_all, probs: [B x A] -> [B x 1] with b = sum_a pi(a) Q(a).
ad::Tensor counterfactual_baseline(const ad::Tensor& q_all, const ad::Tensor& probs);
double counterfactual_baseline(std::span<const double> q, std::span<const double> probs);

// [B] action indices -> [B x n_actions] one-hot rows.
ad::Tensor one_hot(std::span<const int> actions, std::size_t n_actions);

struct CriticConfig {
  std::size_t n_agents = 0;
  std::size_t obs_dim = 0;
  std::size_t n_actions = 5;
  std::size_t embed_dim = 128;
  std::size_t heads = 4;
  std::size_t key_dim = 32;  // per head
};

struct CriticOutput {
  // Per agent [B x n_actions].
  std::vector<ad::Tensor> q_all;
  // attention[i][h]: [B x (n-1)] over the other agents in index order.
  std::vector<std::vector<ad::Tensor>> attention;
};

class AttentionCritic {
 public:
  AttentionCritic() = default;
  AttentionCritic(const CriticConfig& cfg, Rng& rng);

  const CriticConfig& config() const { return cfg_; }

  // obs[i]: [B x obs_dim]; actions[i]: [B x n_actions] (one-hot rows).
  CriticOutput forward(const std::vector<ad::Tensor>& obs,
                       const std::vector<ad::Tensor>& actions) const;

  nn::NamedTensors parameters(const std::string& prefix) const;
  // Encoder of (o_j, a_j): the only per-agent weights another agent's Q reads.
  nn::NamedTensors agent_encoder(std::size_t j) const;
  // Key/query/value projections.
  nn::NamedTensors attention_parameters() const;

 private:
  struct AgentBlock {
    nn::Linear sa_encoder;  // (o, a) -> E
    nn::Linear s_encoder;   // o -> E
    nn::Linear head_hidden; // E + h*d_k -> E
    nn::Linear head_out;    // E -> A
  };

  CriticConfig cfg_;
  std::vector<AgentBlock> agents_;
  nn::Linear key_proj_, query_proj_, value_proj_;
};

}  // namespace macaac
