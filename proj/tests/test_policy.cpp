#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "macaac/errors.hpp"
#include "macaac/policy.hpp"

using namespace macaac;

namespace {

void zero_output_layer(const Actor& actor) {
  for (auto& [name, t] : actor.parameters("a")) {
    if (name.rfind("a.out.", 0) == 0) {
      auto d = t.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
    }
  }
}

}  // namespace

TEST_CASE("zero logits give a uniform policy") {
  Rng rng(1);
  Actor actor(6, 5, 16, rng);
  zero_output_layer(actor);
  const std::vector<double> obs{0.1, -0.3, 0.2, 0.0, 0.5, -0.9};
  for (double p : actor.distribution(obs)) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));

  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int s = 0; s < n; ++s) ++counts[static_cast<std::size_t>(actor.act(obs, rng).action)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  CHECK(testing::chi_square_sf(chi2, 4) > 0.01);
}

TEST_CASE("a dominant logit is always sampled") {
  Rng rng(2);
  for (int hot = 0; hot < 5; ++hot) {
    std::vector<double> z(5, -30.0);
    z[static_cast<std::size_t>(hot)] = 30.0;
    const auto p = categorical_from_logits(z);
    for (int s = 0; s < 2000; ++s) CHECK(sample_categorical(p, rng) == hot);
  }
}

TEST_CASE("log_prob of the sampled action matches the distribution") {
  Rng rng(3);
  Actor actor(4, 5, 8, rng);
  std::mt19937_64 data(4);
  for (int trial = 0; trial < 50; ++trial) {
    const ad::Tensor o = testing::random_tensor({1, 4}, data);
    const auto res = actor.act(o.data(), rng);
    const auto lp = actor.log_probs(o);
    CHECK(std::abs(res.log_prob - lp[static_cast<std::size_t>(res.action)]) <= 1e-12);
    const auto p = actor.distribution(o.data());
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("greedy picks the arg-max") {
  Rng rng(5);
  Actor actor(3, 5, 8, rng);
  const std::vector<double> obs{0.3, 0.1, -0.2};
  const auto p = actor.distribution(obs);
  const int best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  for (int s = 0; s < 10; ++s) CHECK(actor.act(obs, rng, true).action == best);
}

TEST_CASE("entropy examples") {
  const std::vector<double> two{0.25, 0.75};
  CHECK(entropy(two) == doctest::Approx(0.5623).epsilon(1e-4));
  const std::vector<double> uni(5, 0.2);
  CHECK(entropy(uni) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  const std::vector<double> point{0, 1, 0};
  CHECK(entropy(point) == 0.0);
}

TEST_CASE("actor input checks") {
  Rng rng(6);
  Actor actor(3, 5, 8, rng);
  CHECK_THROWS_AS(actor.logits(ad::Tensor::zeros({2, 4})), DimensionError);
  const std::vector<double> bad{0.0, NAN};
  CHECK_THROWS_AS(categorical_from_logits(bad), NumericError);
}
