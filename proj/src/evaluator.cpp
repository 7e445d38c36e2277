#include "macaac/evaluator.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>

#include "macaac/checkpoint.hpp"
#include "macaac/config.hpp"
#include "macaac/errors.hpp"
#include "macaac/trainer.hpp"

namespace macaac {

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["variant"] = variant;
  j["env"] = env;
  j["runs"] = runs;
  j["seed"] = seed;
  j["greedy"] = greedy;
  j["gamma"] = gamma;
  j["mean_total_cost"] = mean_total_cost;
  j["mean_total_penalty"] = mean_total_penalty;
  j["mean_discounted_cost"] = mean_discounted_cost;
  j["mean_discounted_penalty"] = mean_discounted_penalty;
  j["thresholds"] = thresholds;
  j["feasible"] = feasible;
  return j;
}

namespace {

struct RunTotals {
  double cost = 0.0, disc_cost = 0.0;
  std::vector<double> pen, disc_pen;
  std::vector<std::vector<double>> attention;
};

ad::Tensor critic_row(const envs::Observation& o, bool time_feature, double remaining) {
  std::vector<double> v(o.begin(), o.end());
  if (time_feature) v.push_back(remaining);
  const std::size_t w = v.size();
  return ad::Tensor::from({1, w}, std::move(v));
}

RunTotals run_episode(const std::vector<Actor>& actors, const envs::EnvConfig& env_cfg,
                      std::uint64_t seed, double gamma, bool greedy, int episode,
                      const AttentionProbe* probe) {
  ad::NoGradGuard no_grad;
  auto env = envs::make_env(env_cfg);
  Rng rng(derive_seed(seed, 1));
  auto obs = env->reset(derive_seed(seed, 0));
  const std::size_t n = obs.size(), m = static_cast<std::size_t>(env->n_penalties());
  const int L = env_cfg.episode_length;
  RunTotals t;
  t.pen.assign(m, 0.0);
  t.disc_pen.assign(m, 0.0);
  // accum[c][i][h][col]
  std::vector<std::vector<std::vector<std::vector<double>>>> accum;
  double discount = 1.0;
  for (int step = 0; step < L; ++step) {
    std::vector<int> actions(n);
    for (std::size_t i = 0; i < n; ++i) actions[i] = actors[i].act(obs[i], rng, greedy).action;
    if (probe && probe->critics) {
      std::vector<ad::Tensor> o, a;
      const double remaining = static_cast<double>(L - step) / L;
      for (std::size_t i = 0; i < n; ++i) {
        o.push_back(critic_row(obs[i], probe->time_feature, remaining));
        a.push_back(one_hot(std::span<const int>(&actions[i], 1), envs::kNumActions));
      }
      const auto& critics = *probe->critics;
      accum.resize(critics.size());
      for (std::size_t c = 0; c < critics.size(); ++c) {
        const CriticOutput out = critics[c].forward(o, a);
        accum[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          accum[c][i].resize(out.attention[i].size());
          for (std::size_t h = 0; h < out.attention[i].size(); ++h) {
            const auto w = out.attention[i][h].data();
            accum[c][i][h].resize(w.size(), 0.0);
            for (std::size_t k = 0; k < w.size(); ++k) accum[c][i][h][k] += w[k] / L;
          }
        }
      }
    }
    auto sr = env->step(actions);
    t.cost += sr.cost;
    t.disc_cost += discount * sr.cost;
    for (std::size_t j = 0; j < m; ++j) {
      t.pen[j] += sr.penalties[j];
      t.disc_pen[j] += discount * sr.penalties[j];
    }
    discount *= gamma;
    obs = std::move(sr.observations);
    if (sr.done) break;
  }
  for (std::size_t c = 0; c < accum.size(); ++c) {
    for (std::size_t i = 0; i < accum[c].size(); ++i) {
      for (std::size_t h = 0; h < accum[c][i].size(); ++h) {
        for (std::size_t col = 0, j = 0; j < n; ++j) {
          if (j == i) continue;
          t.attention.push_back({static_cast<double>(episode), static_cast<double>(c),
                                 static_cast<double>(i), static_cast<double>(j),
                                 static_cast<double>(h), accum[c][i][h][col]});
          ++col;
        }
      }
    }
  }
  return t;
}

}  // namespace

EvalReport evaluate(const std::vector<Actor>& actors, const envs::EnvConfig& env,
                    const EvalOptions& opts, AttentionProbe* probe) {
  if (opts.runs < 1) throw ContractError("evaluation needs at least one run");
  auto probe_env = envs::make_env(env);
  if (static_cast<std::size_t>(probe_env->n_agents()) != actors.size()) {
    throw ContractError("environment has " + std::to_string(probe_env->n_agents()) +
                        " agents but " + std::to_string(actors.size()) + " actors were given");
  }
  for (const auto& a : actors) {
    if (a.obs_dim() != probe_env->obs_dim()) {
      throw ContractError("actor observation width " + std::to_string(a.obs_dim()) +
                          " does not match environment width " + std::to_string(probe_env->obs_dim()));
    }
  }
  const std::size_t m = static_cast<std::size_t>(probe_env->n_penalties());
  std::vector<RunTotals> totals(static_cast<std::size_t>(opts.runs));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < opts.runs; ++r) {
    try {
      totals[static_cast<std::size_t>(r)] =
          run_episode(actors, env, derive_seed(opts.seed, static_cast<std::uint64_t>(r)), opts.gamma,
                      opts.greedy, r, probe);
    } catch (...) {
#pragma omp critical
      error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  EvalReport rep;
  rep.variant = opts.variant;
  rep.env = envs::to_string(env.kind);
  rep.runs = opts.runs;
  rep.seed = opts.seed;
  rep.greedy = opts.greedy;
  rep.gamma = opts.gamma;
  rep.mean_total_penalty.assign(m, 0.0);
  rep.mean_discounted_penalty.assign(m, 0.0);
  for (const auto& t : totals) {
    rep.mean_total_cost += t.cost;
    rep.mean_discounted_cost += t.disc_cost;
    for (std::size_t j = 0; j < m; ++j) {
      rep.mean_total_penalty[j] += t.pen[j];
      rep.mean_discounted_penalty[j] += t.disc_pen[j];
    }
    if (probe) probe->rows.insert(probe->rows.end(), t.attention.begin(), t.attention.end());
  }
  const double R = opts.runs;
  rep.mean_total_cost /= R;
  rep.mean_discounted_cost /= R;
  for (std::size_t j = 0; j < m; ++j) {
    rep.mean_total_penalty[j] /= R;
    rep.mean_discounted_penalty[j] /= R;
  }
  rep.thresholds = opts.thresholds;
  if (!rep.thresholds.empty()) {
    if (rep.thresholds.size() != m) throw ContractError("threshold count does not match the environment");
    for (std::size_t j = 0; j < m; ++j) rep.feasible.push_back(rep.mean_total_penalty[j] <= rep.thresholds[j]);
  }
  return rep;
}

EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                               const std::optional<envs::EnvConfig>& env, EvalOptions opts,
                               AttentionProbe* probe) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  if (!ck.meta.contains("config")) throw SchemaError(checkpoint.string() + ": missing meta.config");
  const TrainConfig cfg = config_from_json(ck.meta["config"]);
  const envs::EnvConfig env_cfg = env ? *env : cfg.env;
  const ProblemShape shape = shape_of(env_cfg);
  const auto n_agents = ck.meta.value("n_agents", std::size_t{0});
  const auto obs_dim = ck.meta.value("obs_dim", std::size_t{0});
  if (shape.n_agents != n_agents || shape.obs_dim != obs_dim) {
    throw ContractError("checkpoint was trained for " + std::to_string(n_agents) + " agents of width " +
                        std::to_string(obs_dim) + ", environment has " + std::to_string(shape.n_agents) +
                        " of width " + std::to_string(shape.obs_dim));
  }
  Rng rng(0);
  std::vector<Actor> actors;
  nn::NamedTensors named;
  for (std::size_t i = 0; i < n_agents; ++i) {
    actors.emplace_back(obs_dim, shape.n_actions, cfg.actor_hidden, rng);
    actors.back().collect("actor" + std::to_string(i), named);
  }
  restore(ck, named);

  std::vector<AttentionCritic> critics;
  const bool load_critics = probe && probe->critics == nullptr;
  if (load_critics) {
    CriticConfig cc;
    cc.n_agents = n_agents;
    cc.obs_dim = obs_dim + (cfg.critic_time_feature ? 1 : 0);
    cc.n_actions = shape.n_actions;
    cc.embed_dim = cfg.critic_embed;
    cc.heads = cfg.critic_heads;
    cc.key_dim = cfg.critic_key_dim;
    const auto n_critics = ck.meta.value("n_critics", std::size_t{1});
    nn::NamedTensors cn;
    for (std::size_t c = 0; c < n_critics; ++c) {
      critics.emplace_back(cc, rng);
      for (auto& p : critics.back().parameters(c == 0 ? "critic.lagrangian"
                                                      : "critic.penalty" + std::to_string(c))) {
        cn.push_back(p);
      }
    }
    restore(ck, cn);
    probe->critics = &critics;
    probe->time_feature = cfg.critic_time_feature;
  }
  if (opts.thresholds.empty()) opts.thresholds = cfg.thresholds;
  if (opts.variant == "unknown") opts.variant = to_string(cfg.variant);
  EvalReport rep = evaluate(actors, env_cfg, opts, probe);
  if (load_critics) probe->critics = nullptr;
  return rep;
}

void write_attention_csv(const std::filesystem::path& path,
                         const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "episode,critic_id,agent_i,agent_j,head,weight\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << static_cast<long long>(r[0]) << ',' << static_cast<long long>(r[1]) << ','
       << static_cast<long long>(r[2]) << ',' << static_cast<long long>(r[3]) << ','
       << static_cast<long long>(r[4]) << ',' << r[5] << '\n';
  }
}

}  // namespace macaac
