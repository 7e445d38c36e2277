#include "macaac/attention_critic.hpp"

#include <cmath>

#include "macaac/errors.hpp"

namespace macaac {

namespace {

// [B x d] . [B x d] row-wise -> [B x 1]
ad::Tensor row_dot(const ad::Tensor& a, const ad::Tensor& b) {
  return ad::sum_axis(ad::mul(a, b), 1);
}

}  // namespace

ad::Tensor attention_weights(const ad::Tensor& query, const std::vector<ad::Tensor>& keys) {
  if (keys.empty()) throw ContractError("attention needs at least one other agent");
  const std::size_t d = query.cols();
  std::vector<ad::Tensor> logits;
  logits.reserve(keys.size());
  for (const auto& k : keys) {
    if (k.cols() != d || k.rows() != query.rows()) {
      throw DimensionError("attention: key " + ad::shape_str(k.shape()) + " vs query " +
                           ad::shape_str(query.shape()));
    }
    logits.push_back(row_dot(query, k));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  return ad::softmax(ad::scale(ad::concat(logits, 1), inv_sqrt_d), 1);
}

ad::Tensor attention_context(const ad::Tensor& weights, const std::vector<ad::Tensor>& values) {
  if (values.empty()) throw ContractError("attention context needs at least one value");
  if (weights.rank() != 2 || weights.cols() != values.size()) {
    throw DimensionError("attention context: weights " + ad::shape_str(weights.shape()) + " for " +
                         std::to_string(values.size()) + " values");
  }
  ad::Tensor ctx;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j].shape() != values[0].shape() || values[j].rows() != weights.rows()) {
      throw DimensionError("attention context: value " + ad::shape_str(values[j].shape()) +
                           " does not match " + ad::shape_str(values[0].shape()));
    }
    ad::Tensor term = ad::mul_col(values[j], ad::slice_cols(weights, j, 1));
    ctx = ctx.defined() ? ad::add(ctx, term) : term;
  }
  return ctx;
}

ad::Tensor counterfactual_baseline(const ad::Tensor& q_all, const ad::Tensor& probs) {
  if (q_all.shape() != probs.shape()) {
    throw ContractError("baseline: Q " + ad::shape_str(q_all.shape()) + " vs policy " +
                        ad::shape_str(probs.shape()));
  }
  return ad::sum_axis(ad::mul(q_all, probs), 1);
}

double counterfactual_baseline(std::span<const double> q, std::span<const double> probs) {
  if (q.size() != probs.size()) {
    throw ContractError("baseline: " + std::to_string(q.size()) + " Q-values for " +
                        std::to_string(probs.size()) + " probabilities");
  }
  double b = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) b += probs[a] * q[a];
  return b;
}

ad::Tensor one_hot(std::span<const int> actions, std::size_t n_actions) {
  std::vector<double> v(actions.size() * n_actions, 0.0);
  for (std::size_t b = 0; b < actions.size(); ++b) {
    const int a = actions[b];
    if (a < 0 || static_cast<std::size_t>(a) >= n_actions) {
      throw ContractError("action " + std::to_string(a) + " out of range");
    }
    v[b * n_actions + static_cast<std::size_t>(a)] = 1.0;
  }
  return ad::Tensor::from({actions.size(), n_actions}, std::move(v));
}

AttentionCritic::AttentionCritic(const CriticConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.n_agents < 2) throw ContractError("attention critic needs at least two agents");
  if (cfg.obs_dim == 0 || cfg.n_actions == 0 || cfg.embed_dim == 0 || cfg.heads == 0 ||
      cfg.key_dim == 0) {
    throw ContractError("attention critic dimensions must be positive");
  }
  const std::size_t e = cfg.embed_dim, hd = cfg.heads * cfg.key_dim;
  agents_.reserve(cfg.n_agents);
  for (std::size_t i = 0; i < cfg.n_agents; ++i) {
    AgentBlock b;
    b.sa_encoder = nn::Linear(cfg.obs_dim + cfg.n_actions, e, rng);
    b.s_encoder = nn::Linear(cfg.obs_dim, e, rng);
    b.head_hidden = nn::Linear(e + hd, e, rng);
    b.head_out = nn::Linear(e, cfg.n_actions, rng);
    agents_.push_back(std::move(b));
  }
  key_proj_ = nn::Linear(e, hd, rng, false);
  query_proj_ = nn::Linear(e, hd, rng, false);
  value_proj_ = nn::Linear(e, hd, rng);
}

CriticOutput AttentionCritic::forward(const std::vector<ad::Tensor>& obs,
                                      const std::vector<ad::Tensor>& actions) const {
  const std::size_t n = cfg_.n_agents;
  if (obs.size() != n || actions.size() != n) {
    throw ContractError("critic built for " + std::to_string(n) + " agents got " +
                        std::to_string(obs.size()) + " observations and " +
                        std::to_string(actions.size()) + " actions");
  }
  const std::size_t d = cfg_.key_dim;
  std::vector<ad::Tensor> s_enc(n), keys(n), values(n), queries(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (obs[i].cols() != cfg_.obs_dim || actions[i].cols() != cfg_.n_actions ||
        actions[i].rows() != obs[i].rows()) {
      throw DimensionError("critic input for agent " + std::to_string(i) + ": obs " +
                           ad::shape_str(obs[i].shape()) + ", actions " +
                           ad::shape_str(actions[i].shape()));
    }
    const auto& blk = agents_[i];
    ad::Tensor sa = ad::leaky_relu(blk.sa_encoder.forward(ad::concat({obs[i], actions[i]}, 1)),
                                   nn::kLeakySlope);
    s_enc[i] = ad::leaky_relu(blk.s_encoder.forward(obs[i]), nn::kLeakySlope);
    keys[i] = key_proj_.forward(sa);
    values[i] = ad::leaky_relu(value_proj_.forward(sa), nn::kLeakySlope);
    queries[i] = query_proj_.forward(s_enc[i]);
  }

  CriticOutput out;
  out.q_all.resize(n);
  out.attention.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ad::Tensor> head_ctx;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      std::vector<ad::Tensor> k_h, v_h;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        k_h.push_back(ad::slice_cols(keys[j], h * d, d));
        v_h.push_back(ad::slice_cols(values[j], h * d, d));
      }
      ad::Tensor w = attention_weights(ad::slice_cols(queries[i], h * d, d), k_h);
      head_ctx.push_back(attention_context(w, v_h));
      out.attention[i].push_back(w);
    }
    ad::Tensor x = head_ctx.size() == 1 ? head_ctx[0] : ad::concat(head_ctx, 1);
    const auto& blk = agents_[i];
    ad::Tensor hidden =
        ad::leaky_relu(blk.head_hidden.forward(ad::concat({s_enc[i], x}, 1)), nn::kLeakySlope);
    out.q_all[i] = blk.head_out.forward(hidden);
  }
  return out;
}

nn::NamedTensors AttentionCritic::parameters(const std::string& prefix) const {
  nn::NamedTensors out;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const std::string p = prefix + ".agent" + std::to_string(i);
    agents_[i].sa_encoder.collect(p + ".sa_encoder", out);
    agents_[i].s_encoder.collect(p + ".s_encoder", out);
    agents_[i].head_hidden.collect(p + ".head_hidden", out);
    agents_[i].head_out.collect(p + ".head_out", out);
  }
  key_proj_.collect(prefix + ".key", out);
  query_proj_.collect(prefix + ".query", out);
  value_proj_.collect(prefix + ".value", out);
  return out;
}

nn::NamedTensors AttentionCritic::agent_encoder(std::size_t j) const {
  nn::NamedTensors out;
  agents_.at(j).sa_encoder.collect("sa_encoder", out);
  return out;
}

nn::NamedTensors AttentionCritic::attention_parameters() const {
  nn::NamedTensors out;
  key_proj_.collect("key", out);
  query_proj_.collect("query", out);
  value_proj_.collect("value", out);
  return out;
}

}  // namespace macaac
