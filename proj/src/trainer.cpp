#include "macaac/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "macaac/checkpoint.hpp"
#include "macaac/config.hpp"
#include "macaac/envs/trajectory.hpp"
#include "macaac/envs/vec_env.hpp"
#include "macaac/errors.hpp"
#include "macaac/evaluator.hpp"

namespace macaac {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kMacaac: return "macaac";
    case Variant::kUnconstrained: return "unconstrained";
    case Variant::kFixedWeights: return "fixed-weights";
  }
  return "macaac";
}

Variant variant_from_string(const std::string& s) {
  if (s == "macaac") return Variant::kMacaac;
  if (s == "unconstrained") return Variant::kUnconstrained;
  if (s == "fixed-weights" || s == "fixed_weights") return Variant::kFixedWeights;
  throw ConfigError("unknown variant '" + s + "' (expected macaac, unconstrained, fixed-weights)");
}

int TrainConfig::n_penalties() const { return env.kind == envs::EnvKind::kNavigation ? 1 : 2; }

void TrainConfig::validate() const {
  env.validate();
  const auto m = static_cast<std::size_t>(n_penalties());
  if (thresholds.size() != m && !(variant == Variant::kUnconstrained && thresholds.empty())) {
    throw ConfigError("expected " + std::to_string(m) + " thresholds, got " +
                      std::to_string(thresholds.size()));
  }
  if (variant == Variant::kFixedWeights && fixed_weights.size() != m) {
    throw ConfigError("fixed-weights variant needs " + std::to_string(m) + " weights, got " +
                      std::to_string(fixed_weights.size()));
  }
  for (double w : fixed_weights) {
    if (w < 0.0) throw ConfigError("fixed weights must be nonnegative");
  }
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (steps_per_update < 1) throw ConfigError("steps_per_update must be >= 1");
  if (n_envs < 1) throw ConfigError("n_envs must be >= 1");
  if (updates_per_event < 1) throw ConfigError("updates_per_event must be >= 1");
  if (batch_size < 1 || buffer_capacity < 1) throw ConfigError("batch and buffer sizes must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be > 0");
  if (!(beta.beta > 0.0)) throw ConfigError("beta must be > 0");
  if (beta.beta / actor_lr > max_beta_ratio) {
    throw ConfigError("beta / actor_lr = " + std::to_string(beta.beta / actor_lr) +
                      " exceeds the timescale-separation bound " + std::to_string(max_beta_ratio));
  }
  if (!(target_tau > 0.0 && target_tau <= 1.0)) throw ConfigError("target_tau must lie in (0, 1]");
  if (actor_hidden < 1 || critic_embed < 1 || critic_heads < 1 || critic_key_dim < 1) {
    throw ConfigError("network sizes must be >= 1");
  }
}

ProblemShape shape_of(const envs::EnvConfig& env) {
  auto probe = envs::make_env(env);
  ProblemShape s;
  s.n_agents = static_cast<std::size_t>(probe->n_agents());
  s.obs_dim = probe->obs_dim();
  s.n_actions = envs::kNumActions;
  s.n_penalties = static_cast<std::size_t>(probe->n_penalties());
  s.episode_length = env.episode_length;
  return s;
}

std::int64_t expected_update_events(std::int64_t mu, std::int64_t steps_per_update,
                                    std::int64_t steps) {
  // Each multiple of U in (0, steps * mu] lies in exactly one window
  // ((s - 1) mu, s mu] when mu <= U; otherwise every step fires.
  if (mu > steps_per_update) return steps;
  return steps * mu / steps_per_update;
}

namespace {

ad::Tensor stack_rows(const std::vector<const std::vector<double>*>& rows, std::size_t width,
                      std::optional<std::vector<double>> extra = std::nullopt) {
  const std::size_t w = width + (extra ? 1 : 0);
  std::vector<double> v(rows.size() * w);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto& r = *rows[b];
    if (r.size() != width) {
      throw DimensionError("observation of width " + std::to_string(r.size()) + ", expected " +
                           std::to_string(width));
    }
    std::copy(r.begin(), r.end(), v.begin() + static_cast<long>(b * w));
    if (extra) v[b * w + width] = (*extra)[b];
  }
  return ad::Tensor::from({rows.size(), w}, std::move(v));
}

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericError(what + " is not finite (training diverged)");
}

}  // namespace

Minibatch make_minibatch(const ReplayBuffer& buffer, std::span<const std::size_t> idx,
                         const ProblemShape& shape, bool time_feature) {
  Minibatch mb;
  const std::size_t B = idx.size(), n = shape.n_agents;
  mb.size = B;
  mb.r.resize(B);
  mb.cost.resize(B);
  mb.not_done.resize(B);
  mb.step.resize(B);
  mb.penalties.assign(shape.n_penalties, std::vector<double>(B));
  std::vector<double> tf(B), tf_next(B);
  const double L = static_cast<double>(shape.episode_length);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& t = buffer[idx[b]];
    if (t.obs.size() != n) throw ContractError("transition agent count does not match learner");
    mb.r[b] = t.r;
    mb.cost[b] = t.cost;
    mb.not_done[b] = t.done ? 0.0 : 1.0;
    mb.step[b] = t.step;
    for (std::size_t j = 0; j < shape.n_penalties; ++j) mb.penalties[j][b] = t.penalties.at(j);
    tf[b] = (L - t.step) / L;
    tf_next[b] = (L - t.step - 1) / L;
  }
  mb.actions.assign(n, std::vector<int>(B));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<const std::vector<double>*> o(B), o2(B);
    for (std::size_t b = 0; b < B; ++b) {
      const auto& t = buffer[idx[b]];
      o[b] = &t.obs[i];
      o2[b] = &t.next_obs[i];
      mb.actions[i][b] = t.actions[i];
    }
    mb.obs.push_back(stack_rows(o, shape.obs_dim));
    mb.next_obs.push_back(stack_rows(o2, shape.obs_dim));
    if (time_feature) {
      mb.critic_obs.push_back(stack_rows(o, shape.obs_dim, tf));
      mb.critic_next_obs.push_back(stack_rows(o2, shape.obs_dim, tf_next));
    } else {
      mb.critic_obs.push_back(mb.obs.back());
      mb.critic_next_obs.push_back(mb.next_obs.back());
    }
    mb.action_onehot.push_back(one_hot(mb.actions[i], shape.n_actions));
  }
  return mb;
}

Trainer::Trainer(TrainConfig cfg) : Trainer(cfg, shape_of(cfg.env)) { cfg_.validate(); }

Trainer::Trainer(TrainConfig cfg, const ProblemShape& shape)
    : cfg_(std::move(cfg)),
      shape_(shape),
      init_rng_(derive_seed(cfg_.seed, 1)),
      rollout_rng_(derive_seed(cfg_.seed, 2)),
      sample_rng_(derive_seed(cfg_.seed, 3)),
      update_rng_(derive_seed(cfg_.seed, 4)),
      replay_(cfg_.buffer_capacity) {
  build();
}

void Trainer::build() {
  const std::size_t n = shape_.n_agents, m = shape_.n_penalties;
  if (n < 2) throw ContractError("training needs at least two agents");
  for (std::size_t i = 0; i < n; ++i) {
    actors_.emplace_back(shape_.obs_dim, shape_.n_actions, cfg_.actor_hidden, init_rng_);
  }
  CriticConfig cc;
  cc.n_agents = n;
  cc.obs_dim = shape_.obs_dim + (cfg_.critic_time_feature ? 1 : 0);
  cc.n_actions = shape_.n_actions;
  cc.embed_dim = cfg_.critic_embed;
  cc.heads = cfg_.critic_heads;
  cc.key_dim = cfg_.critic_key_dim;
  // The unconstrained variant never instantiates penalty critics.
  const std::size_t n_critics = cfg_.variant == Variant::kUnconstrained ? 1 : 1 + m;
  for (std::size_t c = 0; c < n_critics; ++c) {
    critics_.emplace_back(cc, init_rng_);
    targets_.emplace_back(cc, init_rng_);
    nn::copy_values(critics_[c].parameters("c"), targets_[c].parameters("c"));
    critic_opt_.emplace_back(nn::tensors_of(critics_[c].parameters("c")), cfg_.critic_lr);
  }
  for (const auto& a : actors_) {
    actor_opt_.emplace_back(nn::tensors_of(a.parameters("a")), cfg_.actor_lr);
  }
  std::vector<double> thresholds = cfg_.thresholds;
  if (thresholds.empty()) thresholds.assign(m, 0.0);
  switch (cfg_.variant) {
    case Variant::kMacaac:
      lagrange_ = LagrangeState::adaptive(thresholds, cfg_.beta);
      break;
    case Variant::kUnconstrained:
      lagrange_ = LagrangeState::fixed(thresholds, std::vector<double>(m, 0.0));
      break;
    case Variant::kFixedWeights:
      lagrange_ = LagrangeState::fixed(thresholds, cfg_.fixed_weights);
      break;
  }
}

std::vector<AttentionCritic> Trainer::penalty_critics() const {
  return {critics_.begin() + 1, critics_.end()};
}

CriticLosses Trainer::update_critics(const Minibatch& mb) {
  const std::size_t n = shape_.n_agents, B = mb.size;
  // Next actions from the current policies.
  std::vector<std::vector<int>> next_a(n, std::vector<int>(B));
  std::vector<std::vector<double>> next_logp(n, std::vector<double>(B));
  std::vector<ad::Tensor> next_onehot;
  {
    ad::NoGradGuard no_grad;
    for (std::size_t i = 0; i < n; ++i) {
      const ad::Tensor z = actors_[i].logits(mb.next_obs[i]);
      const std::size_t A = shape_.n_actions;
      for (std::size_t b = 0; b < B; ++b) {
        const auto p = categorical_from_logits(z.data().subspan(b * A, A));
        const int a = sample_categorical(p, update_rng_);
        next_a[i][b] = a;
        next_logp[i][b] = std::log(p[static_cast<std::size_t>(a)]);
      }
      next_onehot.push_back(one_hot(next_a[i], A));
    }
  }

  std::vector<double> relabeled;
  if (cfg_.relabel_cost) {
    relabeled.resize(B);
    std::vector<double> c(shape_.n_penalties);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < c.size(); ++j) c[j] = mb.penalties[j][b];
      relabeled[b] = lagrangian_cost(mb.cost[b], c, lagrange_.lambda());
    }
  }

  CriticLosses losses;
  for (std::size_t c = 0; c < critics_.size(); ++c) {
    const std::vector<double>& reward =
        c == 0 ? (cfg_.relabel_cost ? relabeled : mb.r) : mb.penalties.at(c - 1);
    const double ent = (c == 0 || cfg_.penalty_entropy) ? cfg_.temperature : 0.0;
    CriticOutput next_q;
    {
      ad::NoGradGuard no_grad;
      next_q = targets_[c].forward(mb.critic_next_obs, next_onehot);
    }
    const CriticOutput cur = critics_[c].forward(mb.critic_obs, mb.action_onehot);
    ad::Tensor loss;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> y(B);
      const auto tq = next_q.q_all[i].data();
      const std::size_t A = shape_.n_actions;
      for (std::size_t b = 0; b < B; ++b) {
        const double soft_next =
            tq[b * A + static_cast<std::size_t>(next_a[i][b])] + ent * next_logp[i][b];
        y[b] = reward[b] + cfg_.gamma * mb.not_done[b] * soft_next;
      }
      std::vector<std::size_t> taken(mb.actions[i].begin(), mb.actions[i].end());
      ad::Tensor q = ad::gather(cur.q_all[i], taken);
      ad::Tensor err = ad::sub(q, ad::Tensor::from({B, 1}, std::move(y)));
      ad::Tensor li = ad::mean(ad::square(err));
      loss = loss.defined() ? ad::add(loss, li) : li;
    }
    check_finite(loss.item(), c == 0 ? "Lagrangian critic loss" : "penalty critic loss");
    critic_opt_[c].zero_grad();
    loss.backward();
    if (cfg_.grad_clip > 0.0) nn::clip_grad_norm(critic_opt_[c].params(), cfg_.grad_clip);
    if (!nn::grads_finite(critic_opt_[c].params())) throw NumericError("critic gradient not finite");
    critic_opt_[c].step();
    if (c == 0) losses.lagrangian = loss.item();
    else losses.penalty.push_back(loss.item());
  }
  return losses;
}

std::vector<double> Trainer::update_actors(const Minibatch& mb) {
  const std::size_t n = shape_.n_agents, B = mb.size, A = shape_.n_actions;
  std::vector<ad::Tensor> logp(n);
  std::vector<std::vector<int>> acts(n, std::vector<int>(B));
  std::vector<ad::Tensor> onehot;
  std::vector<ad::Tensor> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    logp[i] = actors_[i].log_probs(mb.obs[i]);
    std::vector<double> p(B * A);
    for (std::size_t k = 0; k < B * A; ++k) p[k] = std::exp(logp[i].data()[k]);
    for (std::size_t b = 0; b < B; ++b) {
      acts[i][b] = sample_categorical(std::span<const double>(p).subspan(b * A, A), update_rng_);
    }
    probs[i] = ad::Tensor::from({B, A}, std::move(p));
    onehot.push_back(one_hot(acts[i], A));
  }
  CriticOutput q;
  {
    ad::NoGradGuard no_grad;
    q = critics_[0].forward(mb.critic_obs, onehot);
  }
  std::vector<double> out(n);
  ad::Tensor total;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> taken(acts[i].begin(), acts[i].end());
    const ad::Tensor baseline = counterfactual_baseline(q.q_all[i], probs[i]);
    ad::Tensor lp = ad::gather(logp[i], taken);
    std::vector<double> coef(B);
    const auto qa = q.q_all[i].data();
    for (std::size_t b = 0; b < B; ++b) {
      const double adv = qa[b * A + taken[b]] - baseline.data()[b];
      coef[b] = cfg_.temperature * lp.data()[b] + adv;
    }
    ad::Tensor li = ad::mean(ad::mul(lp, ad::Tensor::from({B, 1}, std::move(coef))));
    out[i] = li.item();
    check_finite(out[i], "actor loss");
    total = total.defined() ? ad::add(total, li) : li;
  }
  for (auto& o : actor_opt_) o.zero_grad();
  total.backward();
  for (auto& o : actor_opt_) {
    if (cfg_.grad_clip > 0.0) nn::clip_grad_norm(o.params(), cfg_.grad_clip);
    if (!nn::grads_finite(o.params())) throw NumericError("actor gradient not finite");
    o.step();
  }
  return out;
}

std::vector<double> Trainer::estimate_penalty_values(const Minibatch& mb) const {
  const std::size_t n = shape_.n_agents, A = shape_.n_actions;
  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < mb.size; ++b) {
    if (mb.step[b] == 0) rows.push_back(b);
  }
  if (rows.empty()) {
    for (std::size_t b = 0; b < mb.size; ++b) rows.push_back(b);
  }
  ad::NoGradGuard no_grad;
  std::vector<double> est;
  for (std::size_t c = 1; c < critics_.size(); ++c) {
    const CriticOutput q = critics_[c].forward(mb.critic_obs, mb.action_onehot);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto qa = q.q_all[i].data();
      for (std::size_t b : rows) acc += qa[b * A + static_cast<std::size_t>(mb.actions[i][b])];
    }
    est.push_back(acc / static_cast<double>(n * rows.size()));
  }
  return est;
}

void Trainer::soft_update_targets() {
  for (std::size_t c = 0; c < critics_.size(); ++c) {
    nn::soft_update(critics_[c].parameters("c"), targets_[c].parameters("c"), cfg_.target_tau);
  }
}

nn::NamedTensors Trainer::actor_parameters() const {
  nn::NamedTensors out;
  for (std::size_t i = 0; i < actors_.size(); ++i) actors_[i].collect("actor" + std::to_string(i), out);
  return out;
}

nn::NamedTensors Trainer::parameters() const {
  nn::NamedTensors out = actor_parameters();
  for (std::size_t c = 0; c < critics_.size(); ++c) {
    const std::string id = c == 0 ? "critic.lagrangian" : "critic.penalty" + std::to_string(c);
    for (auto& p : critics_[c].parameters(id)) out.push_back(p);
    for (auto& p : targets_[c].parameters(id + ".target")) out.push_back(p);
  }
  return out;
}

void Trainer::save(const std::filesystem::path& path) const {
  nlohmann::json meta;
  meta["config"] = config_to_json(cfg_);
  meta["lambda"] = lagrange_.lambda();
  meta["n_critics"] = critics_.size();
  meta["obs_dim"] = shape_.obs_dim;
  meta["n_agents"] = shape_.n_agents;
  meta["n_actions"] = shape_.n_actions;
  save_checkpoint(path, parameters(), meta);
}

void Trainer::load(const std::filesystem::path& path) {
  const Checkpoint ck = load_checkpoint(path);
  if (ck.meta.value("n_agents", std::size_t{0}) != shape_.n_agents ||
      ck.meta.value("obs_dim", std::size_t{0}) != shape_.obs_dim) {
    throw ContractError("checkpoint " + path.string() + " was trained for a different problem");
  }
  restore(ck, parameters());
}

namespace {

class CsvFile {
 public:
  CsvFile() = default;
  CsvFile(const std::filesystem::path& path, const std::string& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_ << std::setprecision(17) << header << '\n';
  }
  std::ofstream& os() { return os_; }
  bool open() const { return os_.is_open(); }

 private:
  std::ofstream os_;
};

}  // namespace

TrainResult Trainer::train(const std::optional<std::filesystem::path>& run_dir) {
  cfg_.validate();
  const std::size_t n = shape_.n_agents, m = shape_.n_penalties, A = shape_.n_actions;
  const int mu = cfg_.n_envs, U = cfg_.steps_per_update, L = cfg_.env.episode_length;
  envs::VecEnv vec = envs::VecEnv::replicate(cfg_.env, mu);

  CsvFile metrics_csv, lambda_csv, attention_csv, eval_csv;
  std::optional<envs::TrajectoryWriter> traj;
  if (run_dir) {
    std::filesystem::create_directories(*run_dir / "checkpoints");
    save_config_ini(*run_dir / "config.ini", cfg_);
    std::string header = "episode,mean_total_cost";
    for (std::size_t j = 0; j < m; ++j) header += ",mean_total_penalty_" + std::to_string(j + 1);
    metrics_csv = CsvFile(*run_dir / "metrics.csv", header);
    lambda_csv = CsvFile(*run_dir / "lambda.csv", "iteration,j,lambda,q_penalty,alpha");
    attention_csv =
        CsvFile(*run_dir / "attention.csv", "iteration,critic_id,agent_i,agent_j,head,weight");
    if (cfg_.eval_interval > 0) {
      std::string eh = "episode,runs,mean_total_cost";
      for (std::size_t j = 0; j < m; ++j) eh += ",mean_total_penalty_" + std::to_string(j + 1);
      eval_csv = CsvFile(*run_dir / "eval.csv", eh);
    }
    if (cfg_.dump_trajectories) traj.emplace(*run_dir / "trajectories" / "train.jsonl");
  }

  TrainResult res;
  std::int64_t u = 0;
  for (int ep = 1; ep <= cfg_.episodes; ++ep) {
    auto obs = vec.reset_all();
    std::vector<double> ep_cost(static_cast<std::size_t>(mu), 0.0);
    std::vector<std::vector<double>> ep_pen(static_cast<std::size_t>(mu), std::vector<double>(m, 0.0));
    for (int t = 0; t < L; ++t) {
      // Decentralized action selection, batched over environments.
      std::vector<std::vector<int>> actions(static_cast<std::size_t>(mu), std::vector<int>(n));
      {
        ad::NoGradGuard no_grad;
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<const std::vector<double>*> rows;
          for (auto& o : obs) rows.push_back(&o[i]);
          const ad::Tensor z = actors_[i].logits(stack_rows(rows, shape_.obs_dim));
          for (std::size_t e = 0; e < static_cast<std::size_t>(mu); ++e) {
            const auto p = categorical_from_logits(z.data().subspan(e * A, A));
            actions[e][i] = sample_categorical(p, rollout_rng_);
          }
        }
      }
      auto results = vec.step_all(actions);
      for (std::size_t e = 0; e < static_cast<std::size_t>(mu); ++e) {
        auto& sr = results[e];
        JointTransition tr;
        tr.cost = sr.cost;
        tr.penalties = sr.penalties;
        tr.multipliers = lagrange_.lambda();
        tr.r = lagrangian_cost(sr.cost, sr.penalties, tr.multipliers);
        tr.obs = obs[e];
        tr.actions = actions[e];
        tr.next_obs = sr.observations;
        tr.done = sr.done || t == L - 1;
        tr.step = t;
        ep_cost[e] += sr.cost;
        for (std::size_t j = 0; j < m; ++j) ep_pen[e][j] += sr.penalties[j];
        if (traj) traj->write(envs::step_record(e, ep, t, actions[e], sr));
        obs[e] = std::move(sr.observations);
        replay_.push(std::move(tr));
        ++res.transitions;
      }
      u += mu;
      if (u % U < mu) {
        ++res.update_triggers;
        for (int k = 0; k < cfg_.updates_per_event; ++k) {
          auto idx = replay_.sample(cfg_.batch_size, sample_rng_);
          if (!idx) break;
          const Minibatch mb = make_minibatch(replay_, *idx, shape_, cfg_.critic_time_feature);
          update_critics(mb);
          update_actors(mb);
          soft_update_targets();
          ++res.updates_performed;
          if (k + 1 < cfg_.updates_per_event) continue;
          ++update_events_;
          // Slow timescale: at most one multiplier step per update event.
          if (cfg_.variant == Variant::kMacaac) {
            const auto q = estimate_penalty_values(mb);
            lagrange_.update(q);
            ++res.multiplier_updates;
            MultiplierRecord rec{update_events_, lagrange_.lambda(), q, lagrange_.thresholds()};
            for (double l : rec.lambda) res.max_lambda_seen = std::max(res.max_lambda_seen, l);
            if (lambda_csv.open()) {
              for (std::size_t j = 0; j < m; ++j) {
                lambda_csv.os() << rec.iteration << ',' << j + 1 << ',' << rec.lambda[j] << ','
                                << rec.q_penalty[j] << ',' << rec.thresholds[j] << '\n';
              }
            }
            res.multipliers.push_back(std::move(rec));
          }
          if (attention_csv.open() && cfg_.attention_log_interval > 0 &&
              update_events_ % cfg_.attention_log_interval == 0) {
            ad::NoGradGuard no_grad;
            for (std::size_t c = 0; c < critics_.size(); ++c) {
              const CriticOutput out = critics_[c].forward(mb.critic_obs, mb.action_onehot);
              for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t h = 0; h < out.attention[i].size(); ++h) {
                  const ad::Tensor& w = out.attention[i][h];
                  for (std::size_t col = 0, j = 0; j < n; ++j) {
                    if (j == i) continue;
                    double s = 0.0;
                    for (std::size_t b = 0; b < w.rows(); ++b) s += w.at(b, col);
                    attention_csv.os() << update_events_ << ',' << c << ',' << i << ',' << j << ','
                                       << h << ',' << s / static_cast<double>(w.rows()) << '\n';
                    ++col;
                  }
                }
              }
            }
          }
        }
      }
      if (on_step) on_step(res.transitions, res.update_triggers);
    }

    EpisodeMetrics em;
    em.episode = ep;
    em.mean_total_penalty.assign(m, 0.0);
    for (std::size_t e = 0; e < static_cast<std::size_t>(mu); ++e) {
      em.mean_total_cost += ep_cost[e] / mu;
      for (std::size_t j = 0; j < m; ++j) em.mean_total_penalty[j] += ep_pen[e][j] / mu;
    }
    if (metrics_csv.open()) {
      metrics_csv.os() << em.episode << ',' << em.mean_total_cost;
      for (double p : em.mean_total_penalty) metrics_csv.os() << ',' << p;
      metrics_csv.os() << '\n';
    }
    res.metrics.push_back(std::move(em));

    if (run_dir && cfg_.checkpoint_interval > 0 && ep % cfg_.checkpoint_interval == 0) {
      save(*run_dir / "checkpoints" / ("episode_" + std::to_string(ep) + ".json"));
    }
    if (eval_csv.open() && ep % cfg_.eval_interval == 0) {
      EvalOptions eo;
      eo.runs = cfg_.eval_runs;
      eo.seed = derive_seed(cfg_.seed, 1000 + static_cast<std::uint64_t>(ep));
      eo.gamma = cfg_.gamma;
      eo.thresholds = lagrange_.thresholds();
      eo.variant = to_string(cfg_.variant);
      const EvalReport rep = evaluate(actors_, cfg_.env, eo);
      eval_csv.os() << ep << ',' << rep.runs << ',' << rep.mean_total_cost;
      for (double p : rep.mean_total_penalty) eval_csv.os() << ',' << p;
      eval_csv.os() << '\n';
    }
  }
  res.final_lambda = lagrange_.lambda();
  if (run_dir) save(*run_dir / "checkpoints" / "final.json");
  return res;
}

}  // namespace macaac
