#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "macaac/config.hpp"
#include "macaac/errors.hpp"
#include "macaac/trainer.hpp"

using namespace macaac;

namespace {

TrainConfig tiny(Variant v = Variant::kMacaac) {
  TrainConfig c = preset(envs::EnvKind::kNavigation);
  c.env.n_agents = 2;
  c.env.n_targets = 2;
  c.variant = v;
  c.thresholds = {1.0};
  if (v == Variant::kFixedWeights) c.fixed_weights = {2.0};
  c.actor_hidden = 8;
  c.critic_embed = 8;
  c.critic_heads = 2;
  c.critic_key_dim = 4;
  c.n_envs = 2;
  c.steps_per_update = 10;
  c.batch_size = 8;
  c.episodes = 4;
  c.attention_log_interval = 0;
  return c;
}

// Two agents, one-dimensional observations, one penalty.
ProblemShape synthetic() {
  ProblemShape s;
  s.n_agents = 2;
  s.obs_dim = 1;
  s.n_actions = 5;
  s.n_penalties = 1;
  s.episode_length = 1;
  return s;
}

JointTransition transition(double o0, double o1, int a0, int a1, double cost, double pen,
                           double r, bool done = true) {
  JointTransition t;
  t.obs = {{o0}, {o1}};
  t.next_obs = t.obs;
  t.actions = {a0, a1};
  t.cost = cost;
  t.penalties = {pen};
  t.r = r;
  t.done = done;
  return t;
}

std::vector<double> q_taken(const AttentionCritic& c, const Minibatch& mb, std::size_t agent) {
  ad::NoGradGuard g;
  const auto out = c.forward(mb.critic_obs, mb.action_onehot);
  std::vector<double> q(mb.size);
  for (std::size_t b = 0; b < mb.size; ++b) {
    q[b] = out.q_all[agent].at(b, static_cast<std::size_t>(mb.actions[agent][b]));
  }
  return q;
}

std::vector<std::size_t> all(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("one short episode stores its transitions without updating") {
  TrainConfig c = tiny();
  c.episodes = 1;
  c.env.episode_length = 2;
  c.n_envs = 1;
  c.steps_per_update = 1000000000;
  Trainer t(c);
  const auto res = t.train();
  CHECK(res.transitions == 2);
  CHECK(t.replay().size() == 2);
  CHECK(res.update_triggers == 0);
  CHECK(res.updates_performed == 0);
  CHECK_FALSE(t.replay()[0].done);
  CHECK(t.replay()[1].done);
  CHECK(t.replay()[1].step == 1);
}

TEST_CASE("update cadence matches the closed form") {
  Rng rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    TrainConfig c = tiny();
    c.n_envs = std::uniform_int_distribution<int>(1, 4)(rng);
    c.steps_per_update = std::uniform_int_distribution<int>(1, 12)(rng);
    c.env.episode_length = std::uniform_int_distribution<int>(2, 6)(rng);
    c.episodes = std::uniform_int_distribution<int>(1, 4)(rng);
    c.batch_size = 100000;  // count triggers, skip the learning
    Trainer t(c);
    std::int64_t iterations = 0, last = 0;
    bool monotone = true;
    t.on_step = [&](std::int64_t, std::int64_t trig) {
      ++iterations;
      monotone = monotone && trig >= last && trig - last <= 1;
      last = trig;
    };
    const auto res = t.train();
    const std::int64_t steps = std::int64_t{c.episodes} * c.env.episode_length;
    CHECK(iterations == steps);
    CHECK(monotone);
    CHECK(res.transitions == steps * c.n_envs);
    CHECK(res.update_triggers == expected_update_events(c.n_envs, c.steps_per_update, steps));
    CHECK(res.updates_performed == 0);
  }
  CHECK(expected_update_events(12, 100, 100) == 12);
  CHECK(expected_update_events(5, 3, 7) == 7);
}

TEST_CASE("critic regresses onto r when there is no bootstrap") {
  TrainConfig c = tiny();
  c.gamma = 0.0;
  c.critic_lr = 1e-2;
  c.grad_clip = 0.0;
  c.critic_time_feature = false;
  Trainer t(c, synthetic());
  ReplayBuffer buf(8);
  const double rs[4] = {1.0, -2.0, 0.5, 3.0};
  for (int k = 0; k < 4; ++k) buf.push(transition(k * 0.3, -k * 0.2, k, 4 - k, rs[k], 0.0, rs[k], false));
  const auto idx = all(4);
  const Minibatch mb = make_minibatch(buf, idx, t.shape(), false);
  for (int it = 0; it < 1500; ++it) t.update_critics(mb);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto q = q_taken(t.lagrangian_critic(), mb, i);
    for (int k = 0; k < 4; ++k) CHECK(q[static_cast<std::size_t>(k)] == doctest::Approx(rs[k]).epsilon(2e-2).scale(1.0));
  }
}

TEST_CASE("penalty critics never read the Lagrangian cost") {
  auto run = [](double r_offset) {
    TrainConfig c = tiny();
    Trainer t(c, synthetic());
    ReplayBuffer buf(8);
    for (int k = 0; k < 4; ++k) {
      JointTransition tr = transition(k * 0.1, 0.2, k, 1, 0.5 * k, 1.0 + k, 0.0);
      tr.r = r_offset + k;
      buf.push(tr);
    }
    const auto idx = all(4);
    const Minibatch mb = make_minibatch(buf, idx, t.shape(), true);
    std::vector<double> pen_losses;
    for (int it = 0; it < 5; ++it) pen_losses.push_back(t.update_critics(mb).penalty.at(0));
    return pen_losses;
  };
  CHECK(run(0.0) == run(1000.0));
}

TEST_CASE("unconstrained variant keeps lambda at zero and has no penalty critics") {
  Trainer t(tiny(Variant::kUnconstrained));
  CHECK(t.n_critics() == 1);
  CHECK(t.penalty_critics().empty());
  const auto res = t.train();
  CHECK(res.updates_performed > 0);
  CHECK(res.multiplier_updates == 0);
  for (std::size_t k = 0; k < t.replay().size(); ++k) {
    for (double l : t.replay()[k].multipliers) CHECK(l == 0.0);
  }
  for (double l : res.final_lambda) CHECK(l == 0.0);
}

TEST_CASE("fixed-weights variant never moves lambda") {
  Trainer t(tiny(Variant::kFixedWeights));
  const auto res = t.train();
  CHECK(t.n_critics() == 2);
  CHECK(res.multiplier_updates == 0);
  CHECK(res.final_lambda == std::vector<double>{2.0});
  for (std::size_t k = 0; k < t.replay().size(); ++k) {
    const auto& tr = t.replay()[k];
    CHECK(tr.r == doctest::Approx(tr.cost + 2.0 * tr.penalties[0]));
  }
}

TEST_CASE("adaptive variant updates lambda once per update event") {
  Trainer t(tiny());
  const auto res = t.train();
  CHECK(res.multiplier_updates == res.updates_performed);
  CHECK(res.multipliers.size() == static_cast<std::size_t>(res.multiplier_updates));
  for (const auto& rec : res.multipliers) CHECK(rec.lambda[0] >= 0.0);
}

TEST_CASE("with a flat critic the actor update raises the entropy") {
  TrainConfig c = tiny();
  c.temperature = 0.5;
  c.actor_lr = 1e-2;
  c.beta = {1e-4, 0};
  Trainer t(c, synthetic());
  // Flat critic: Q is the same for every action so the advantage is zero.
  for (auto& [name, p] : t.lagrangian_critic().parameters("c")) {
    if (name.find("head_out") != std::string::npos) {
      auto d = p.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
    }
  }
  // Skew actor 0 away from uniform.
  for (auto& [name, p] : t.actors()[0].parameters("a")) {
    if (name == "a.out.bias") {
      auto d = p.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
      d[0] = 2.0;
    }
  }
  ReplayBuffer buf(64);
  for (int k = 0; k < 32; ++k) buf.push(transition(0.1, 0.2, 0, 0, 0.0, 0.0, 0.0));
  const auto idx = all(32);
  const Minibatch mb = make_minibatch(buf, idx, t.shape(), true);
  const std::vector<double> o{0.1};
  const double h0 = entropy(t.actors()[0].distribution(o));
  for (int it = 0; it < 200; ++it) t.update_actors(mb);
  const double h1 = entropy(t.actors()[0].distribution(o));
  CHECK(h1 > h0 + 0.1);
  CHECK(h1 <= std::log(5.0) + 1e-12);
}

TEST_CASE("zero temperature and a flat critic leave the actors untouched") {
  TrainConfig c = tiny();
  c.temperature = 0.0;
  Trainer t(c, synthetic());
  for (auto& [name, p] : t.lagrangian_critic().parameters("c")) {
    if (name.find("head_out") != std::string::npos) {
      auto d = p.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
    }
  }
  ReplayBuffer buf(8);
  for (int k = 0; k < 4; ++k) buf.push(transition(0.1 * k, 0.3, 0, 0, 0.0, 0.0, 0.0));
  const auto idx = all(4);
  const Minibatch mb = make_minibatch(buf, idx, t.shape(), true);
  const auto before = t.actor_parameters();
  std::vector<std::vector<double>> snap;
  for (const auto& [n, p] : before) snap.emplace_back(p.data().begin(), p.data().end());
  t.update_actors(mb);
  const auto after = t.actor_parameters();
  for (std::size_t k = 0; k < after.size(); ++k) {
    for (double g : after[k].second.grad()) CHECK(g == 0.0);
    CHECK(std::vector<double>(after[k].second.data().begin(), after[k].second.data().end()) == snap[k]);
  }
}

TEST_CASE("actors descend toward the cheaper action") {
  TrainConfig c = tiny();
  c.temperature = 0.0;
  c.actor_lr = 1e-2;
  Trainer t(c, synthetic());
  // Q(a) = 1 for every action except a = 3, which costs 0.
  for (auto& [name, p] : t.lagrangian_critic().parameters("c")) {
    if (name.find("head_out") != std::string::npos) {
      auto d = p.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
      if (name.find("bias") != std::string::npos) {
        std::fill(d.begin(), d.end(), 1.0);
        d[3] = 0.0;
      }
    }
  }
  ReplayBuffer buf(64);
  for (int k = 0; k < 32; ++k) buf.push(transition(0.5, -0.5, 0, 0, 0.0, 0.0, 0.0));
  const auto idx = all(32);
  const Minibatch mb = make_minibatch(buf, idx, t.shape(), true);
  for (int it = 0; it < 300; ++it) t.update_actors(mb);
  CHECK(t.actors()[0].distribution(std::vector<double>{0.5})[3] > 0.9);
  CHECK(t.actors()[1].distribution(std::vector<double>{-0.5})[3] > 0.9);
}

TEST_CASE("penalty estimate reads episode-start rows") {
  TrainConfig c = tiny();
  Trainer t(c, synthetic());
  ReplayBuffer buf(8);
  for (int k = 0; k < 4; ++k) {
    JointTransition tr = transition(0.1 * k, 0.0, k, 0, 0.0, 0.0, 0.0);
    tr.step = k;
    buf.push(tr);
  }
  const auto idx = all(4);
  const Minibatch mb = make_minibatch(buf, idx, t.shape(), true);
  const std::vector<std::size_t> first{0};
  const Minibatch only_first = make_minibatch(buf, first, t.shape(), true);
  const auto a = t.estimate_penalty_values(mb), b = t.estimate_penalty_values(only_first);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
}

TEST_CASE("timescale and variant validation") {
  TrainConfig c = tiny();
  c.beta = {1e-3, 0};
  c.actor_lr = 1e-3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.beta = {1e-4, 0};
  c.validate();
  c.thresholds = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.variant = Variant::kUnconstrained;
  c.validate();
  c.variant = Variant::kFixedWeights;
  c.thresholds = {1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.fixed_weights = {-1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(variant_from_string("fixed-weights") == Variant::kFixedWeights);
  CHECK_THROWS_AS(variant_from_string("greedy"), ConfigError);
}

TEST_CASE("save and load reproduce every network bit for bit") {
  testing::TempDir dir("trainer");
  TrainConfig c = tiny();
  Trainer a(c);
  a.train();
  a.save(dir.path() / "ck.json");
  TrainConfig c2 = c;
  c2.seed = 999;
  Trainer b(c2);
  b.load(dir.path() / "ck.json");
  const auto pa = a.parameters(), pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t k = 0; k < pa.size(); ++k) {
    CHECK(pa[k].first == pb[k].first);
    CHECK(std::vector<double>(pa[k].second.data().begin(), pa[k].second.data().end()) ==
          std::vector<double>(pb[k].second.data().begin(), pb[k].second.data().end()));
  }
  TrainConfig other = preset(envs::EnvKind::kNavigation);
  Trainer big(other);
  CHECK_THROWS_AS(big.load(dir.path() / "ck.json"), ContractError);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto r1 = Trainer(tiny()).train(), r2 = Trainer(tiny()).train();
  REQUIRE(r1.metrics.size() == r2.metrics.size());
  for (std::size_t k = 0; k < r1.metrics.size(); ++k) {
    CHECK(r1.metrics[k].mean_total_cost == r2.metrics[k].mean_total_cost);
  }
  CHECK(r1.final_lambda == r2.final_lambda);
}
