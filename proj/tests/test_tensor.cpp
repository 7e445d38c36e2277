#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "macaac/errors.hpp"
#include "macaac/grad_check.hpp"
#include "macaac/grad_suite.hpp"
#include "macaac/nn.hpp"
#include "macaac/tensor.hpp"

using namespace macaac;
using ad::Tensor;

TEST_CASE("matmul identity and hand case") {
  const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  const Tensor m = Tensor::from({2, 2}, {3, -1, 2.5, 7});
  const Tensor im = ad::matmul(eye, m);
  for (std::size_t i = 0; i < 4; ++i) CHECK(im[i] == m[i]);

  const Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor b = Tensor::from({2, 1}, {0, 1});
  const Tensor c = ad::matmul(a, b);
  CHECK(c.shape() == ad::Shape{2, 1});
  CHECK(c[0] == 2.0);
  CHECK(c[1] == 4.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const Tensor a = Tensor::zeros({2, 3}), b = Tensor::zeros({2, 3});
  try {
    ad::matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("backward of sum(matmul(A, B)) wrt A is ones * B^T") {
  std::mt19937_64 rng(5);
  const Tensor b = testing::random_tensor({3, 4}, rng);
  Tensor a = testing::random_tensor({2, 3}, rng).clone(true);
  ad::sum(ad::matmul(a, b)).backward();
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double row_sum = 0;
      for (std::size_t j = 0; j < 4; ++j) row_sum += b.at(k, j);
      CHECK(a.grad()[i * 3 + k] == doctest::Approx(row_sum).epsilon(1e-12));
    }
  }
  const auto rep = ad::grad_check([&](const Tensor& x) { return ad::sum(ad::matmul(x, b)); }, a);
  CHECK(rep.passed);
}

TEST_CASE("softmax values") {
  const Tensor u = ad::softmax(Tensor::from({3}, {0, 0, 0}), 0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(ad::softmax(Tensor::from({1}, {123.4}), 0)[0] == 1.0);
  const Tensor s = ad::softmax(Tensor::from({2}, {1, 2}), 0);
  const double e = std::exp(1.0);
  CHECK(s[0] == doctest::Approx(1 / (1 + e)).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(e / (1 + e)).epsilon(1e-14));
  CHECK(s[0] == doctest::Approx(0.26894).epsilon(1e-4));
}

TEST_CASE("softmax is normalized and positive for large-magnitude inputs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor x = testing::random_tensor({4, 6}, rng, -300, 300);
    for (std::size_t axis : {0u, 1u}) {
      const Tensor s = ad::softmax(x, axis);
      const Tensor sums = ad::sum_axis(s, axis);
      for (double v : sums.data()) CHECK(std::abs(v - 1.0) <= 1e-12);
      for (double v : s.data()) CHECK(v >= 0.0);
    }
    const Tensor mild = testing::random_tensor({3, 5}, rng, -20, 20);
    const Tensor sm = ad::softmax(mild, 1);
    for (double v : sm.data()) CHECK(v > 0.0);
  }
}

TEST_CASE("elementwise examples") {
  const Tensor r = ad::relu(Tensor::from({2}, {-1, 2}));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
  std::vector<double> xs;
  for (int i = 0; i <= 100; ++i) xs.push_back(-5.0 + 0.1 * i);
  const Tensor x = Tensor::from({xs.size()}, xs);
  const Tensor back = ad::log(ad::exp(x));
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(back[i] - xs[i]) <= 1e-12);

  Tensor v = Tensor::from({3}, {1, 2, 3}, true);
  ad::mean(ad::square(v)).backward();
  CHECK(v.grad()[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(v.grad()[1] == doctest::Approx(4.0 / 3).epsilon(1e-14));
  CHECK(v.grad()[2] == doctest::Approx(2.0).epsilon(1e-14));
  const auto rep = ad::grad_check([](const Tensor& t) { return ad::mean(ad::square(t)); },
                                  Tensor::from({3}, {1, 2, 3}));
  CHECK(rep.max_rel_error < 1e-8);
}

TEST_CASE("gather, concat and slice forward values") {
  const Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  const std::vector<std::size_t> idx{2, 0};
  const Tensor g = ad::gather(a, idx);
  CHECK(g.shape() == ad::Shape{2, 1});
  CHECK(g[0] == 3);
  CHECK(g[1] == 4);
  const Tensor c1 = ad::concat({a, Tensor::from({2, 1}, {7, 8})}, 1);
  CHECK(c1.shape() == ad::Shape{2, 4});
  CHECK(c1.at(1, 3) == 8);
  const Tensor c0 = ad::concat({a, Tensor::from({1, 3}, {9, 9, 9})}, 0);
  CHECK(c0.shape() == ad::Shape{3, 3});
  CHECK(c0.at(2, 1) == 9);
  const Tensor s = ad::slice_cols(a, 1, 2);
  CHECK(s.at(1, 0) == 5);
  CHECK(s.at(1, 1) == 6);
  const std::vector<std::size_t> bad{3, 0};
  CHECK_THROWS_AS(ad::gather(a, bad), DimensionError);
  CHECK_THROWS_AS(ad::concat({a, Tensor::zeros({3, 2})}, 1), DimensionError);
  CHECK_THROWS_AS(ad::add(a, Tensor::zeros({3, 2})), DimensionError);
}

TEST_CASE("backward contracts") {
  Tensor w = Tensor::from({3}, {0.5, -1, 2}, true);
  Tensor loss = ad::sum(w);
  loss.backward();
  for (double g : w.grad()) CHECK(g == 1.0);
  CHECK_THROWS_AS(loss.backward(), StateError);
  loss.reset_backward();
  for (double g : w.grad()) CHECK(g == 0.0);
  loss.backward();
  for (double g : w.grad()) CHECK(g == 1.0);

  Tensor v = Tensor::from({2}, {1, 2}, true);
  CHECK_THROWS_AS(ad::scale(v, 2.0).backward(), ContractError);

  Tensor x = Tensor::from({4}, {0.3, -2, 5, 1}, true);
  ad::sum(ad::softmax(x, 0)).backward();
  for (double g : x.grad()) CHECK(std::abs(g) < 1e-15);
}

TEST_CASE("gradients accumulate across shared subexpressions") {
  Tensor x = Tensor::from({2}, {1.5, -2}, true);
  const Tensor y = ad::mul(x, x);
  ad::sum(ad::add(y, ad::scale(x, 3.0))).backward();
  CHECK(x.grad()[0] == doctest::Approx(2 * 1.5 + 3));
  CHECK(x.grad()[1] == doctest::Approx(2 * -2 + 3));
}

TEST_CASE("no-grad mode records no graph") {
  Tensor w = Tensor::from({2}, {1, 2}, true);
  Tensor out;
  {
    ad::NoGradGuard guard;
    CHECK_FALSE(ad::grad_enabled());
    out = ad::scale(w, 2.0);
  }
  CHECK(ad::grad_enabled());
  CHECK_FALSE(out.requires_grad());
  CHECK(out[1] == 4.0);
}

TEST_CASE("extents must be positive") {
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
}

TEST_CASE("grad_check examples") {
  std::mt19937_64 rng(2);
  const Tensor x = testing::random_tensor({3, 2}, rng);
  const auto lin = ad::grad_check([](const Tensor& t) { return ad::sum(t); }, x);
  CHECK(lin.max_rel_error < 1e-9);
  CHECK(lin.passed);

  // Dead relu region: analytic and numeric both flat.
  const Tensor neg = Tensor::from({3}, {-1, -2, -0.5});
  const auto dead = ad::grad_check([](const Tensor& t) { return ad::sum(ad::relu(t)); }, neg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(dead.analytic[i] == 0.0);
    CHECK(dead.numeric[i] == 0.0);
  }
  CHECK(dead.passed);
}

TEST_CASE("random two-layer MLP gradient matches central differences") {
  nn::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    nn::Mlp mlp(4, 8, 3, rng);
    const Tensor x = testing::random_tensor({5, 4}, rng);
    const Tensor w = testing::random_tensor({5, 3}, rng);
    const auto rep = ad::grad_check([&](const Tensor& t) { return ad::sum(ad::mul(mlp.forward(t), w)); }, x);
    CHECK(rep.max_rel_error < 1e-4);
    nn::NamedTensors named;
    mlp.collect("m", named);
    for (const auto& [name, p] : named) {
      const auto pr = ad::grad_check_inplace([&] { return ad::sum(ad::mul(mlp.forward(x), w)); }, p);
      CHECK_MESSAGE(pr.max_rel_error < 1e-4, name);
    }
  }
}

TEST_CASE("differentiation is deterministic") {
  auto grads = [] {
    nn::Rng rng(99);
    nn::Mlp mlp(3, 6, 2, rng);
    const Tensor x = testing::random_tensor({4, 3}, rng);
    ad::sum(ad::log_softmax(mlp.forward(x), 1)).backward();
    nn::NamedTensors named;
    mlp.collect("m", named);
    std::vector<double> out;
    for (const auto& [n, p] : named) out.insert(out.end(), p.grad().begin(), p.grad().end());
    return out;
  };
  CHECK(grads() == grads());
}

TEST_CASE("gradient suite covers every op") {
  const auto results = run_gradient_suite(20, 3);
  CHECK(results.size() >= 25);
  for (const auto& r : results) {
    CHECK_MESSAGE(r.passed, r.name << " max rel err " << r.max_rel_error);
  }
}
