#include "macaac/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>

#include "macaac/checkpoint.hpp"
#include "macaac/config.hpp"
#include "macaac/errors.hpp"
#include "macaac/evaluator.hpp"
#include "macaac/grad_suite.hpp"
#include "macaac/plot.hpp"
#include "macaac/trainer.hpp"

namespace macaac {

namespace {

struct TrainArgs {
  std::string config, variant, weights, thresholds, run_dir = "run";
  std::string env_kind;
  int episodes = -1;
  std::int64_t seed = -1;
  std::vector<std::string> overrides;
};

struct EvalArgs {
  std::string checkpoint, config, json_out, attention_out;
  int runs = 1000;
  std::uint64_t seed = 0;
  bool greedy = false;
  std::vector<std::string> overrides;
};

void apply_overrides(TrainConfig& cfg, const std::vector<std::string>& kv) {
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + s + "' is not key=value");
    set_option(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}

int do_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = a.config.empty()
                        ? preset(a.env_kind.empty() ? envs::EnvKind::kNavigation
                                                    : envs::env_kind_from_string(a.env_kind))
                        : load_config_ini(a.config);
  if (!a.variant.empty()) set_option(cfg, "variant.name", a.variant);
  if (!a.weights.empty()) set_option(cfg, "variant.weights", a.weights);
  if (!a.thresholds.empty()) set_option(cfg, "variant.thresholds", a.thresholds);
  if (a.episodes > 0) cfg.episodes = a.episodes;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  apply_overrides(cfg, a.overrides);
  cfg.validate();

  Trainer trainer(cfg);
  const TrainResult res = trainer.train(std::filesystem::path(a.run_dir));
  const auto& last = res.metrics.back();
  out << "variant " << to_string(cfg.variant) << ", " << res.metrics.size() << " episodes, "
      << res.updates_performed << " updates\n";
  out << "last episode mean total cost " << last.mean_total_cost;
  for (std::size_t j = 0; j < last.mean_total_penalty.size(); ++j) {
    out << ", penalty_" << j + 1 << " " << last.mean_total_penalty[j];
  }
  out << "\nlambda";
  for (double l : res.final_lambda) out << ' ' << l;
  out << "\nrun directory " << a.run_dir << '\n';
  return 0;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  std::optional<envs::EnvConfig> env;
  if (!a.config.empty() || !a.overrides.empty()) {
    TrainConfig cfg = a.config.empty() ? preset(envs::EnvKind::kNavigation) : load_config_ini(a.config);
    if (a.config.empty()) {
      // Overrides apply on top of the checkpoint's own environment.
      const Checkpoint ck = load_checkpoint(a.checkpoint);
      cfg = config_from_json(ck.meta.at("config"));
    }
    apply_overrides(cfg, a.overrides);
    env = cfg.env;
  }
  EvalOptions opts;
  opts.runs = a.runs;
  opts.seed = a.seed;
  opts.greedy = a.greedy;
  AttentionProbe probe;
  const EvalReport rep =
      evaluate_checkpoint(a.checkpoint, env, opts, a.attention_out.empty() ? nullptr : &probe);
  const std::string text = rep.to_json().dump(2);
  out << text << '\n';
  if (!a.json_out.empty()) {
    std::ofstream os(a.json_out);
    if (!os) throw std::runtime_error("cannot write " + a.json_out);
    os << text << '\n';
  }
  if (!a.attention_out.empty()) write_attention_csv(a.attention_out, probe.rows);
  return 0;
}

int do_plot(const std::string& run_dir, const std::string& out_dir, std::ostream& out) {
  const auto files = plot_run(run_dir, out_dir);
  for (const auto& f : files) out << f.string() << '\n';
  return 0;
}

int do_grad_check(int instances, std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_gradient_suite(instances, seed)) {
    out << std::left << std::setw(20) << r.name << (r.passed ? " ok  " : " FAIL") << "  max rel err "
        << std::scientific << std::setprecision(3) << r.max_rel_error << std::defaultfloat << "  ("
        << r.instances << " instances)\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained multi-agent attention actor-critic"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a variant and write a run directory");
  train->add_option("--config", ta.config, "INI config file")->check(CLI::ExistingFile);
  train->add_option("--env", ta.env_kind, "preset when no config is given: navigation | treasure");
  train->add_option("--variant", ta.variant, "macaac | unconstrained | fixed-weights");
  train->add_option("--weights", ta.weights, "fixed penalty weights, comma separated");
  train->add_option("--thresholds", ta.thresholds, "penalty thresholds, comma separated");
  train->add_option("--episodes", ta.episodes, "number of episodes");
  train->add_option("--seed", ta.seed, "trainer seed");
  train->add_option("--run-dir", ta.run_dir, "output directory")->capture_default_str();
  train->add_option("--set", ta.overrides, "section.key=value override (repeatable)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "average total cost and penalties of a checkpoint");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", ea.config, "environment override config")->check(CLI::ExistingFile);
  eval->add_option("--runs", ea.runs, "episodes to average")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--seed", ea.seed, "evaluation seed")->capture_default_str();
  eval->add_flag("--greedy", ea.greedy, "arg-max actions instead of sampling");
  eval->add_option("--json", ea.json_out, "also write the report here");
  eval->add_option("--attention", ea.attention_out, "write per-episode attention weights CSV");
  eval->add_option("--set", ea.overrides, "env.key=value override (repeatable)");

  std::string plot_dir, plot_out;
  auto* plot = app.add_subcommand("plot", "render charts from a run directory");
  plot->add_option("run_dir", plot_dir, "run directory")->required();
  plot->add_option("--out", plot_out, "output directory (default run_dir/plots)");

  int gc_instances = 100;
  std::uint64_t gc_seed = 0;
  auto* gc = app.add_subcommand("grad-check", "finite-difference check of every op");
  gc->add_option("--instances", gc_instances, "random instances per op")->capture_default_str();
  gc->add_option("--seed", gc_seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return do_train(ta, out);
    if (*eval) return do_eval(ea, out);
    if (*plot) return do_plot(plot_dir, plot_out, out);
    if (*gc) return do_grad_check(gc_instances, gc_seed, out);
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    err << "error: schema: " << e.what() << '\n';
    return 1;
  } catch (const ContractError& e) {
    err << "error: contract: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "error: numeric: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace macaac
