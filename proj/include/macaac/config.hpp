#pragma once

// Run configuration file: INI-style key-value pairs in three sections.
//
//   [env]      kind, n_agents, n_targets, episode_length, damping, dt,
//              force_scale, agent_radius, n_collectors, n_depositors,
//              depositor_radius, treasure_radius, distance_scale,
//              deposit_bonus, seed
//   [trainer]  episodes, steps_per_update, n_envs, updates_per_event,
//              batch_size, buffer_capacity, gamma, temperature, actor_lr,
//              critic_lr, beta, beta_decay_period, max_beta_ratio,
//              target_tau, grad_clip, penalty_entropy, relabel_cost,
//              critic_time_feature, actor_hidden, critic_embed,
//              critic_heads, critic_key_dim, seed, attention_log_interval,
//              checkpoint_interval, eval_interval, eval_runs,
//              dump_trajectories
//   [variant]  name (macaac | unconstrained | fixed-weights),
//              thresholds (comma list), weights (comma list)
//
// Lines starting with ';' or '#' are comments. Missing keys keep defaults.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "macaac/trainer.hpp"

namespace macaac {

// Defaults for one of the two environments (thresholds included).
TrainConfig preset(envs::EnvKind kind);

// Applies "section.key=value". Throws ConfigError for unknown keys or
// unparsable values.
void set_option(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string get_option(const TrainConfig& cfg, const std::string& key);
// Every "section.key" in file order.
const std::vector<std::string>& option_keys();

// The file's [env] kind selects the preset the remaining keys override.
TrainConfig load_config_ini(const std::filesystem::path& path);
TrainConfig parse_config_ini(const std::string& text);
void save_config_ini(const std::filesystem::path& path, const TrainConfig& cfg);
std::string config_to_ini(const TrainConfig& cfg);

// {"env": {...}, "trainer": {...}, "variant": {...}} with string values.
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

std::vector<double> parse_list(const std::string& s);
std::string format_list(const std::vector<double>& v);

}  // namespace macaac
