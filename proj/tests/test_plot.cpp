#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "macaac/errors.hpp"
#include "macaac/plot.hpp"

using namespace macaac;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& body) {
  std::ofstream os(p);
  os << body;
}

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

void sample_run(const fs::path& dir) {
  write(dir / "metrics.csv",
        "episode,mean_total_cost,mean_total_penalty_1\n1,40,5\n2,35,4\n3,30,2.5\n");
  write(dir / "lambda.csv", "iteration,j,lambda,q_penalty,alpha\n1,1,0.5,4,3\n2,1,0.75,3.5,3\n");
  // Two heads for agent 0 attending over agents 1 and 2.
  write(dir / "attention.csv",
        "iteration,critic_id,agent_i,agent_j,head,weight\n"
        "10,0,0,1,0,0.2\n10,0,0,2,0,0.8\n10,0,0,1,1,0.6\n10,0,0,2,1,0.4\n"
        "20,0,0,1,0,0.5\n20,0,0,2,0,0.5\n20,0,0,1,1,0.1\n20,0,0,2,1,0.9\n");
}

}  // namespace

TEST_CASE("a run directory produces paired SVG and CSV charts") {
  testing::TempDir dir("plot");
  sample_run(dir.path());
  const auto files = plot_run(dir.path());
  CHECK(files.size() == 8);  // cost, penalty_1, lambda_1, attention: svg + csv each
  for (const auto& f : files) CHECK(fs::file_size(f) > 0);
  CHECK(fs::exists(dir.path() / "plots" / "cost.svg"));

  const Table att = read_csv(dir.path() / "plots" / "attention_critic0_agent0.csv");
  REQUIRE(att.rows.size() == 2);
  // Mean over heads, then the weights over the other agents sum to one.
  CHECK(att.rows[0][att.column("agent_1")] == doctest::Approx(0.4));
  for (const auto& r : att.rows) {
    CHECK(r[att.column("agent_1")] + r[att.column("agent_2")] == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::ifstream is(dir.path() / "plots" / "lambda_1.svg");
  const std::string svg((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(svg.find(">0</text>") != std::string::npos);
}

TEST_CASE("empty metrics fail without leaving partial output") {
  testing::TempDir dir("plot_empty");
  write(dir.path() / "metrics.csv", "episode,mean_total_cost,mean_total_penalty_1\n");
  CHECK_THROWS_AS(plot_run(dir.path()), SchemaError);
  CHECK(count_files(dir.path() / "plots") == 0);
}

TEST_CASE("a missing column is named in the error") {
  testing::TempDir dir("plot_missing");
  write(dir.path() / "metrics.csv", "episode,mean_total_penalty_1\n1,2\n");
  try {
    plot_run(dir.path());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("mean_total_cost") != std::string::npos);
  }
  CHECK(count_files(dir.path() / "plots") == 0);

  write(dir.path() / "metrics.csv", "episode,mean_total_cost,mean_total_penalty_1\n1,2,3\n");
  write(dir.path() / "lambda.csv", "iteration,lambda\n1,0.5\n");
  CHECK_THROWS_AS(plot_run(dir.path()), SchemaError);
  CHECK(count_files(dir.path() / "plots") == 0);
}

TEST_CASE("malformed CSV rows") {
  testing::TempDir dir("plot_bad");
  write(dir.path() / "a.csv", "x,y\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(dir.path() / "a.csv"), SchemaError);
  write(dir.path() / "b.csv", "x,y\n1,abc\n");
  CHECK_THROWS_AS(read_csv(dir.path() / "b.csv"), SchemaError);
  CHECK_THROWS_AS(read_csv(dir.path() / "none.csv"), SchemaError);
}

TEST_CASE("render_svg draws one polyline per series") {
  const std::string svg = render_svg({"t", "x", "y", true}, {{"a", {0, 1}, {2, 3}}, {"b", {0, 1}, {1, 1}}});
  std::size_t count = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
  CHECK(count == 2);
  CHECK(svg.find(">0</text>") != std::string::npos);
}
