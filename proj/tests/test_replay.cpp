#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "helpers.hpp"
#include "macaac/errors.hpp"
#include "macaac/replay.hpp"

using namespace macaac;

namespace {

JointTransition make(int id, std::size_t agents = 2, std::size_t penalties = 1) {
  JointTransition t;
  t.obs.assign(agents, envs::Observation{static_cast<double>(id)});
  t.next_obs = t.obs;
  t.actions.assign(agents, id % 5);
  t.cost = id;
  t.penalties.assign(penalties, 1.0);
  t.multipliers.assign(penalties, 0.5);
  t.r = id + 0.5 * static_cast<double>(penalties);
  t.step = id;
  return t;
}

}  // namespace

TEST_CASE("FIFO eviction keeps the newest capacity transitions") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push(make(i));
  CHECK(buf.size() == 3);
  CHECK(buf.capacity() == 3);
  CHECK(buf[0].step == 2);
  CHECK(buf[1].step == 3);
  CHECK(buf[2].step == 4);
  CHECK_THROWS_AS(buf[3], ContractError);
}

TEST_CASE("size grows to capacity and stays there") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 25; ++i) {
    buf.push(make(i));
    CHECK(buf.size() == std::min<std::size_t>(i + 1, 10));
  }
}

TEST_CASE("push validates the transition") {
  ReplayBuffer buf(4);
  auto wrong_r = make(1);
  wrong_r.r += 0.1;
  CHECK_THROWS_AS(buf.push(wrong_r), ContractError);
  buf.push(make(1));
  CHECK_THROWS_AS(buf.push(make(2, 3)), ContractError);
  CHECK_THROWS_AS(buf.push(make(2, 2, 2)), ContractError);
  auto bad_actions = make(3);
  bad_actions.actions.pop_back();
  CHECK_THROWS_AS(buf.push(bad_actions), ContractError);
}

TEST_CASE("sampling needs a full minibatch") {
  ReplayBuffer buf(8);
  Rng rng(1);
  buf.push(make(0));
  CHECK_FALSE(buf.sample(4, rng).has_value());
  for (int i = 1; i < 4; ++i) buf.push(make(i));
  const auto s = buf.sample(4, rng);
  REQUIRE(s.has_value());
  CHECK(s->size() == 4);
  CHECK_THROWS_AS(buf.sample(0, rng), ContractError);
}

TEST_CASE("sampling is uniform with replacement") {
  ReplayBuffer buf(20);
  for (int i = 0; i < 20; ++i) buf.push(make(i));
  Rng rng(7);
  std::vector<int> counts(20, 0);
  const int draws = 100000;
  for (int k = 0; k < draws / 20; ++k) {
    const auto idx = buf.sample(20, rng);
    REQUIRE(idx.has_value());
    for (auto i : *idx) ++counts[i];
  }
  double chi2 = 0;
  const double expect = draws / 20.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(testing::chi_square_sf(chi2, 19) > 0.01);

  // A batch larger than the store is refused.
  ReplayBuffer small(2);
  small.push(make(0));
  small.push(make(1));
  Rng r2(3);
  CHECK_FALSE(small.sample(3, r2).has_value());
}

TEST_CASE("sampling is reproducible from the seed") {
  ReplayBuffer buf(50);
  for (int i = 0; i < 50; ++i) buf.push(make(i));
  Rng a(11), b(11);
  CHECK(*buf.sample(32, a) == *buf.sample(32, b));
}

TEST_CASE("jsonl dump has one line per transition, oldest first") {
  testing::TempDir dir("replay");
  ReplayBuffer buf(2);
  for (int i = 0; i < 3; ++i) buf.push(make(i));
  const auto path = dir.path() / "buf.jsonl";
  buf.save_jsonl(path);
  std::ifstream is(path);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(is, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["t"] == 1);
  CHECK(rows[1]["cost"] == 2.0);
}
