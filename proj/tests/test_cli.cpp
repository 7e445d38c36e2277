#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "macaac/cli.hpp"
#include "macaac/plot.hpp"

using namespace macaac;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "macaac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Small enough to train in well under a second.
std::vector<std::string> quick(const fs::path& run_dir) {
  return {"--episodes", "3", "--run-dir", run_dir.string(), "--set", "env.n_agents=2",
          "--set", "env.n_targets=2", "--set", "trainer.actor_hidden=8", "--set",
          "trainer.critic_embed=8", "--set", "trainer.critic_heads=1", "--set",
          "trainer.critic_key_dim=4", "--set", "trainer.batch_size=16", "--set",
          "trainer.n_envs=2", "--set", "trainer.steps_per_update=10", "--set",
          "trainer.attention_log_interval=1"};
}

std::vector<std::string> train_args(const fs::path& dir, std::vector<std::string> extra) {
  std::vector<std::string> a{"train"};
  for (auto& s : quick(dir)) a.push_back(s);
  for (auto& s : extra) a.push_back(s);
  return a;
}

}  // namespace

TEST_CASE("train --variant unconstrained keeps lambda at zero") {
  testing::TempDir dir("cli_unc");
  const auto r = run(train_args(dir.path() / "run", {"--variant", "unconstrained"}));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("lambda 0\n") != std::string::npos);
  const Table lam = read_csv(dir.path() / "run" / "lambda.csv");
  CHECK(lam.rows.empty());
  CHECK(fs::exists(dir.path() / "run" / "checkpoints" / "final.json"));
  CHECK(fs::exists(dir.path() / "run" / "config.ini"));
}

TEST_CASE("train --variant fixed-weights uses the given weight") {
  testing::TempDir dir("cli_fixed");
  const auto r = run(train_args(dir.path() / "run", {"--variant", "fixed-weights", "--weights", "5.534"}));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("lambda 5.534") != std::string::npos);
}

TEST_CASE("bad command lines exit with code 2") {
  CHECK(run({"train", "--no-such-flag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"eval"}).code == 2);
  testing::TempDir dir("cli_bad");
  const auto r = run(train_args(dir.path() / "run", {"--set", "trainer.nope=1"}));
  CHECK(r.code == 2);
  CHECK(r.err.find("trainer.nope") != std::string::npos);
  const auto ratio = run(train_args(dir.path() / "run2", {"--set", "trainer.beta=0.01"}));
  CHECK(ratio.code == 2);
}

TEST_CASE("eval is deterministic and plot reads the run") {
  testing::TempDir dir("cli_eval");
  const fs::path rd = dir.path() / "run";
  REQUIRE(run(train_args(rd, {})).code == 0);
  const std::string ck = (rd / "checkpoints" / "final.json").string();
  const auto a = run({"eval", "--checkpoint", ck, "--runs", "50", "--seed", "7"});
  const auto b = run({"eval", "--checkpoint", ck, "--runs", "50", "--seed", "7",
                      "--json", (dir.path() / "rep.json").string()});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["runs"] == 50);
  CHECK(j.contains("mean_total_cost"));
  std::ifstream is(dir.path() / "rep.json");
  CHECK(nlohmann::json::parse(is) == j);

  const auto att = run({"eval", "--checkpoint", ck, "--runs", "2", "--attention",
                        (dir.path() / "att.csv").string()});
  CHECK(att.code == 0);
  CHECK(read_csv(dir.path() / "att.csv").rows.size() == 2 * 2 * 2 * 1);

  const auto p = run({"plot", rd.string()});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  CHECK(fs::exists(rd / "plots" / "cost.svg"));
  CHECK(fs::exists(rd / "plots" / "lambda_1.svg"));
  CHECK(fs::exists(rd / "plots" / "attention_critic1_agent0.svg"));

  CHECK(run({"plot", (dir.path() / "missing").string()}).code == 1);
}

TEST_CASE("grad-check subcommand") {
  const auto r = run({"grad-check", "--instances", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("attention") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
