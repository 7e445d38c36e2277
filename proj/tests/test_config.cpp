#include "doctest.h"
#include "helpers.hpp"
#include "macaac/config.hpp"
#include "macaac/errors.hpp"

using namespace macaac;

TEST_CASE("presets") {
  const TrainConfig nav = preset(envs::EnvKind::kNavigation);
  CHECK(nav.env.n_agents == 3);
  CHECK(nav.env.episode_length == 25);
  CHECK(nav.thresholds == std::vector<double>{3.0});
  nav.validate();
  const TrainConfig tr = preset(envs::EnvKind::kTreasure);
  CHECK(tr.env.n_agents == 8);
  CHECK(tr.env.episode_length == 100);
  CHECK(tr.thresholds.size() == 2);
  tr.validate();
}

TEST_CASE("INI text round trip preserves every option") {
  TrainConfig c = preset(envs::EnvKind::kTreasure);
  c.actor_lr = 3.0000000000000001e-3;
  c.beta = {2.5e-4, 7};
  c.thresholds = {11.5, 0.125};
  c.penalty_entropy = true;
  c.seed = 123456789012345ULL;
  const TrainConfig back = parse_config_ini(config_to_ini(c));
  for (const auto& key : option_keys()) CHECK_MESSAGE(get_option(back, key) == get_option(c, key), key);
  CHECK(back.actor_lr == c.actor_lr);
  CHECK(back.beta.decay_period == 7);
}

TEST_CASE("file round trip and overrides") {
  testing::TempDir dir("config");
  TrainConfig c = preset(envs::EnvKind::kNavigation);
  set_option(c, "trainer.batch_size", "64");
  set_option(c, "variant.name", "fixed-weights");
  set_option(c, "variant.weights", "5.534");
  set_option(c, "env.n_agents", "4");
  CHECK(c.batch_size == 64);
  CHECK(c.variant == Variant::kFixedWeights);
  CHECK(c.fixed_weights == std::vector<double>{5.534});
  save_config_ini(dir.path() / "c.ini", c);
  const TrainConfig back = load_config_ini(dir.path() / "c.ini");
  CHECK(back.env.n_agents == 4);
  CHECK(back.fixed_weights == std::vector<double>{5.534});
}

TEST_CASE("partial files override the preset chosen by env.kind") {
  const TrainConfig c = parse_config_ini(
      "; comment\n[env]\nkind = treasure   ; or navigation\n\n[trainer]\nepisodes = 7 # seven\n[variant]\nweights = ; none\n# another\n");
  CHECK(c.env.kind == envs::EnvKind::kTreasure);
  CHECK(c.env.n_agents == 8);
  CHECK(c.episodes == 7);
  CHECK(c.fixed_weights.empty());
}

TEST_CASE("config errors") {
  TrainConfig c = preset(envs::EnvKind::kNavigation);
  CHECK_THROWS_AS(set_option(c, "trainer.nope", "1"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "trainer.batch_size", "x"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "trainer.gamma", "0.9x"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "trainer.penalty_entropy", "maybe"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "env.kind", "maze"), ConfigError);
  CHECK_THROWS_AS(parse_config_ini("[extra]\na = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_ini("[trainer]\nunknown = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config_ini("/nonexistent/c.ini"), ConfigError);
}

TEST_CASE("JSON round trip") {
  TrainConfig c = preset(envs::EnvKind::kNavigation);
  c.temperature = 0.02;
  c.variant = Variant::kUnconstrained;
  const TrainConfig back = config_from_json(config_to_json(c));
  for (const auto& key : option_keys()) CHECK_MESSAGE(get_option(back, key) == get_option(c, key), key);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
}

TEST_CASE("list parsing") {
  CHECK(parse_list("1, 2.5,3") == std::vector<double>{1, 2.5, 3});
  CHECK(parse_list("").empty());
  CHECK(format_list({0.1, 2}) == "0.1,2");
  CHECK_THROWS_AS(parse_list("1,,2"), ConfigError);
}
