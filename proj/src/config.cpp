#include "macaac/config.hpp"

#include <cctype>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "macaac/errors.hpp"

namespace macaac {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) throw ConfigError(key + ": not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& s) {
  Int v{};
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) throw ConfigError(key + ": not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

struct Field {
  std::string key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field num(std::string key, T TrainConfig::*member) {
  return {key,
          [key, member](TrainConfig& c, const std::string& s) {
            if constexpr (std::is_floating_point_v<T>) c.*member = to_double(key, s);
            else c.*member = to_int<T>(key, s);
          },
          [member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.*member);
            else return std::to_string(c.*member);
          }};
}

template <typename T>
Field env_num(std::string key, T envs::EnvConfig::*member) {
  return {key,
          [key, member](TrainConfig& c, const std::string& s) {
            if constexpr (std::is_floating_point_v<T>) c.env.*member = to_double(key, s);
            else c.env.*member = to_int<T>(key, s);
          },
          [member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.env.*member);
            else return std::to_string(c.env.*member);
          }};
}

Field physics(std::string key, double envs::Physics::*member) {
  return {key,
          [key, member](TrainConfig& c, const std::string& s) { c.env.physics.*member = to_double(key, s); },
          [member](const TrainConfig& c) { return fmt(c.env.physics.*member); }};
}

Field flag(std::string key, bool TrainConfig::*member) {
  return {key, [key, member](TrainConfig& c, const std::string& s) { c.*member = to_bool(key, s); },
          [member](const TrainConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"env.kind",
                 [](TrainConfig& c, const std::string& s) {
                   try {
                     c.env.kind = envs::env_kind_from_string(s);
                   } catch (const std::exception& e) {
                     throw ConfigError(std::string("env.kind: ") + e.what());
                   }
                 },
                 [](const TrainConfig& c) { return envs::to_string(c.env.kind); }});
    f.push_back(env_num("env.n_agents", &envs::EnvConfig::n_agents));
    f.push_back(env_num("env.n_targets", &envs::EnvConfig::n_targets));
    f.push_back(env_num("env.episode_length", &envs::EnvConfig::episode_length));
    f.push_back(physics("env.damping", &envs::Physics::damping));
    f.push_back(physics("env.dt", &envs::Physics::dt));
    f.push_back(physics("env.force_scale", &envs::Physics::force_scale));
    f.push_back(env_num("env.agent_radius", &envs::EnvConfig::agent_radius));
    f.push_back(env_num("env.n_collectors", &envs::EnvConfig::n_collectors));
    f.push_back(env_num("env.n_depositors", &envs::EnvConfig::n_depositors));
    f.push_back(env_num("env.depositor_radius", &envs::EnvConfig::depositor_radius));
    f.push_back(env_num("env.treasure_radius", &envs::EnvConfig::treasure_radius));
    f.push_back(env_num("env.distance_scale", &envs::EnvConfig::distance_scale));
    f.push_back(env_num("env.deposit_bonus", &envs::EnvConfig::deposit_bonus));
    f.push_back(env_num("env.seed", &envs::EnvConfig::seed));

    f.push_back(num("trainer.episodes", &TrainConfig::episodes));
    f.push_back(num("trainer.steps_per_update", &TrainConfig::steps_per_update));
    f.push_back(num("trainer.n_envs", &TrainConfig::n_envs));
    f.push_back(num("trainer.updates_per_event", &TrainConfig::updates_per_event));
    f.push_back(num("trainer.batch_size", &TrainConfig::batch_size));
    f.push_back(num("trainer.buffer_capacity", &TrainConfig::buffer_capacity));
    f.push_back(num("trainer.gamma", &TrainConfig::gamma));
    f.push_back(num("trainer.temperature", &TrainConfig::temperature));
    f.push_back(num("trainer.actor_lr", &TrainConfig::actor_lr));
    f.push_back(num("trainer.critic_lr", &TrainConfig::critic_lr));
    f.push_back({"trainer.beta",
                 [](TrainConfig& c, const std::string& s) { c.beta.beta = to_double("trainer.beta", s); },
                 [](const TrainConfig& c) { return fmt(c.beta.beta); }});
    f.push_back({"trainer.beta_decay_period",
                 [](TrainConfig& c, const std::string& s) {
                   c.beta.decay_period = to_int<std::int64_t>("trainer.beta_decay_period", s);
                 },
                 [](const TrainConfig& c) { return std::to_string(c.beta.decay_period); }});
    f.push_back(num("trainer.max_beta_ratio", &TrainConfig::max_beta_ratio));
    f.push_back(num("trainer.target_tau", &TrainConfig::target_tau));
    f.push_back(num("trainer.grad_clip", &TrainConfig::grad_clip));
    f.push_back(flag("trainer.penalty_entropy", &TrainConfig::penalty_entropy));
    f.push_back(flag("trainer.relabel_cost", &TrainConfig::relabel_cost));
    f.push_back(flag("trainer.critic_time_feature", &TrainConfig::critic_time_feature));
    f.push_back(num("trainer.actor_hidden", &TrainConfig::actor_hidden));
    f.push_back(num("trainer.critic_embed", &TrainConfig::critic_embed));
    f.push_back(num("trainer.critic_heads", &TrainConfig::critic_heads));
    f.push_back(num("trainer.critic_key_dim", &TrainConfig::critic_key_dim));
    f.push_back(num("trainer.seed", &TrainConfig::seed));
    f.push_back(num("trainer.attention_log_interval", &TrainConfig::attention_log_interval));
    f.push_back(num("trainer.checkpoint_interval", &TrainConfig::checkpoint_interval));
    f.push_back(num("trainer.eval_interval", &TrainConfig::eval_interval));
    f.push_back(num("trainer.eval_runs", &TrainConfig::eval_runs));
    f.push_back(flag("trainer.dump_trajectories", &TrainConfig::dump_trajectories));

    f.push_back({"variant.name",
                 [](TrainConfig& c, const std::string& s) { c.variant = variant_from_string(s); },
                 [](const TrainConfig& c) { return to_string(c.variant); }});
    f.push_back({"variant.thresholds",
                 [](TrainConfig& c, const std::string& s) { c.thresholds = parse_list(s); },
                 [](const TrainConfig& c) { return format_list(c.thresholds); }});
    f.push_back({"variant.weights",
                 [](TrainConfig& c, const std::string& s) { c.fixed_weights = parse_list(s); },
                 [](const TrainConfig& c) { return format_list(c.fixed_weights); }});
    return f;
  }();
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

TrainConfig from_flat(const std::vector<std::pair<std::string, std::string>>& kv) {
  envs::EnvKind kind = envs::EnvKind::kNavigation;
  for (const auto& [k, v] : kv) {
    if (k == "env.kind") {
      try {
        kind = envs::env_kind_from_string(v);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("env.kind: ") + e.what());
      }
    }
  }
  TrainConfig cfg = preset(kind);
  for (const auto& [k, v] : kv) set_option(cfg, k, v);
  return cfg;
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("list '" + s + "' has an empty element");
    out.push_back(to_double("list", item));
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

TrainConfig preset(envs::EnvKind kind) {
  TrainConfig c;
  c.env.kind = kind;
  if (kind == envs::EnvKind::kNavigation) {
    c.env.n_agents = 3;
    c.env.n_targets = 3;
    c.env.episode_length = 25;
    c.thresholds = {3.0};
  } else {
    c.env.n_collectors = 6;
    c.env.n_depositors = 2;
    c.env.n_agents = 8;
    c.env.n_targets = 6;
    c.env.episode_length = 100;
    c.thresholds = {12.0, 0.2};
  }
  return c;
}

void set_option(TrainConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, trim(value));
}

std::string get_option(const TrainConfig& cfg, const std::string& key) { return field(key).get(cfg); }

const std::vector<std::string>& option_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

namespace {

// "; ..." or "# ..." at the start of a value or after whitespace is a comment.
std::string strip_comment(const std::string& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if ((v[i] == ';' || v[i] == '#') && (i == 0 || std::isspace(static_cast<unsigned char>(v[i - 1])))) {
      return trim(v.substr(0, i));
    }
  }
  return v;
}

}  // namespace

TrainConfig parse_config_ini(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [section, body] : tree) {
    if (section != "env" && section != "trainer" && section != "variant") {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) kv.emplace_back(section + "." + key, strip_comment(value.data()));
  }
  return from_flat(kv);
}

TrainConfig load_config_ini(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_ini(ss.str());
}

std::string config_to_ini(const TrainConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void save_config_ini(const std::filesystem::path& path, const TrainConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << config_to_ini(cfg);
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    j[f.key.substr(0, dot)][f.key.substr(dot + 1)] = f.get(cfg);
  }
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config snapshot must be a JSON object");
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [section, body] : j.items()) {
    for (const auto& [key, value] : body.items()) {
      kv.emplace_back(section + "." + key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return from_flat(kv);
}

}  // namespace macaac
