#include "macaac/grad_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "macaac/attention_critic.hpp"
#include "macaac/grad_check.hpp"
#include "macaac/rng.hpp"

namespace macaac {

namespace {

using ad::Tensor;

Tensor random_tensor(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(ad::shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

// Values bounded away from zero so kinked ops stay differentiable under eps.
Tensor away_from_zero(ad::Shape shape, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(ad::shape_numel(shape));
  for (auto& x : v) x = sign(rng) ? u(rng) : -u(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 4) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Contracts a tensor to a scalar with fixed random weights so every output
// element contributes distinctly.
Tensor weigh(const Tensor& y, const Tensor& w) { return ad::sum(ad::mul(y, w)); }

// One case draws a random instance and reports its max relative error.
using Case = std::function<double(Rng&, double eps)>;

double unary(Rng& rng, double eps, const std::function<Tensor(const Tensor&)>& op,
             const std::function<Tensor(ad::Shape, Rng&)>& gen, bool allow_rank1 = true) {
  ad::Shape s{dim(rng), dim(rng)};
  if (allow_rank1 && dim(rng, 0, 3) == 0) s = {dim(rng)};
  const Tensor x = gen(s, rng);
  const Tensor probe = op(x);
  const Tensor w = random_tensor(probe.shape(), rng);
  return ad::grad_check([&](const Tensor& t) { return weigh(op(t), w); }, x, eps).max_rel_error;
}

double binary(Rng& rng, double eps, const std::function<Tensor(const Tensor&, const Tensor&)>& op,
              ad::Shape sa, ad::Shape sb) {
  const Tensor a = random_tensor(sa, rng), b = random_tensor(sb, rng);
  const Tensor w = random_tensor(op(a, b).shape(), rng);
  const double ea =
      ad::grad_check([&](const Tensor& t) { return weigh(op(t, b), w); }, a, eps).max_rel_error;
  const double eb =
      ad::grad_check([&](const Tensor& t) { return weigh(op(a, t), w); }, b, eps).max_rel_error;
  return std::max(ea, eb);
}

std::vector<std::pair<std::string, Case>> cases() {
  auto normal = [](ad::Shape s, Rng& r) { return random_tensor(std::move(s), r); };
  auto kinked = [](ad::Shape s, Rng& r) { return away_from_zero(std::move(s), r); };
  auto positive = [](ad::Shape s, Rng& r) { return random_tensor(std::move(s), r, 0.5, 2.0); };
  std::vector<std::pair<std::string, Case>> c;
  c.emplace_back("matmul", [](Rng& r, double eps) {
    const std::size_t m = dim(r), k = dim(r), n = dim(r);
    return binary(r, eps, ad::matmul, {m, k}, {k, n});
  });
  for (auto [name, op] : std::vector<std::pair<std::string, Tensor (*)(const Tensor&, const Tensor&)>>{
           {"add", ad::add}, {"sub", ad::sub}, {"mul", ad::mul}}) {
    c.emplace_back(name, [op](Rng& r, double eps) {
      const std::size_t m = dim(r), n = dim(r);
      return binary(r, eps, op, {m, n}, {m, n});
    });
  }
  c.emplace_back("add_bias", [](Rng& r, double eps) {
    const std::size_t m = dim(r), n = dim(r);
    return binary(r, eps, ad::add_bias, {m, n}, {1, n});
  });
  c.emplace_back("mul_col", [](Rng& r, double eps) {
    const std::size_t m = dim(r), n = dim(r);
    return binary(r, eps, ad::mul_col, {m, n}, {m, 1});
  });
  c.emplace_back("scale", [normal](Rng& r, double eps) {
    const double s = std::uniform_real_distribution<double>(-2, 2)(r);
    return unary(r, eps, [s](const Tensor& x) { return ad::scale(x, s); }, normal);
  });
  c.emplace_back("add_scalar", [normal](Rng& r, double eps) {
    const double s = std::uniform_real_distribution<double>(-2, 2)(r);
    return unary(r, eps, [s](const Tensor& x) { return ad::add_scalar(x, s); }, normal);
  });
  c.emplace_back("relu", [kinked](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::relu(x); }, kinked);
  });
  c.emplace_back("leaky_relu", [kinked](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::leaky_relu(x, 0.01); }, kinked);
  });
  c.emplace_back("log", [positive](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::log(x); }, positive);
  });
  c.emplace_back("exp", [normal](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::exp(x); }, normal);
  });
  c.emplace_back("square", [normal](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::square(x); }, normal);
  });
  c.emplace_back("sum", [normal](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::sum(x); }, normal);
  });
  c.emplace_back("mean", [normal](Rng& r, double eps) {
    return unary(r, eps, [](const Tensor& x) { return ad::mean(x); }, normal);
  });
  for (std::size_t axis : {0u, 1u}) {
    c.emplace_back("sum_axis" + std::to_string(axis), [normal, axis](Rng& r, double eps) {
      return unary(r, eps, [axis](const Tensor& x) { return ad::sum_axis(x, axis); }, normal, false);
    });
    c.emplace_back("softmax" + std::to_string(axis), [normal, axis](Rng& r, double eps) {
      return unary(r, eps, [axis](const Tensor& x) { return ad::softmax(x, axis); }, normal, false);
    });
    c.emplace_back("log_softmax" + std::to_string(axis), [normal, axis](Rng& r, double eps) {
      return unary(r, eps, [axis](const Tensor& x) { return ad::log_softmax(x, axis); }, normal, false);
    });
  }
  c.emplace_back("gather", [](Rng& r, double eps) {
    const std::size_t m = dim(r), n = dim(r, 2, 5);
    std::vector<std::size_t> idx(m);
    for (auto& i : idx) i = std::uniform_int_distribution<std::size_t>(0, n - 1)(r);
    const Tensor x = random_tensor({m, n}, r);
    const Tensor w = random_tensor({m, 1}, r);
    return ad::grad_check([&](const Tensor& t) { return weigh(ad::gather(t, idx), w); }, x, eps)
        .max_rel_error;
  });
  for (std::size_t axis : {0u, 1u}) {
    c.emplace_back("concat" + std::to_string(axis), [axis](Rng& r, double eps) {
      const std::size_t m = dim(r), n = dim(r), k = dim(r);
      const ad::Shape sa{m, n}, sb = axis == 0 ? ad::Shape{k, n} : ad::Shape{m, k};
      return binary(r, eps, [axis](const Tensor& a, const Tensor& b) { return ad::concat({a, b}, axis); },
                    sa, sb);
    });
  }
  c.emplace_back("slice_cols", [](Rng& r, double eps) {
    const std::size_t m = dim(r), n = dim(r, 2, 6);
    const std::size_t begin = std::uniform_int_distribution<std::size_t>(0, n - 1)(r);
    const std::size_t count = std::uniform_int_distribution<std::size_t>(1, n - begin)(r);
    const Tensor x = random_tensor({m, n}, r);
    const Tensor w = random_tensor({m, count}, r);
    return ad::grad_check([&](const Tensor& t) { return weigh(ad::slice_cols(t, begin, count), w); }, x,
                          eps)
        .max_rel_error;
  });
  c.emplace_back("attention", [](Rng& r, double eps) {
    const std::size_t B = dim(r), d = dim(r, 1, 4), others = dim(r, 1, 3);
    const Tensor q = random_tensor({B, d}, r);
    std::vector<Tensor> keys, values;
    for (std::size_t j = 0; j < others; ++j) {
      keys.push_back(random_tensor({B, d}, r));
      values.push_back(random_tensor({B, d}, r));
    }
    const Tensor w = random_tensor({B, d}, r);
    auto f_q = [&](const Tensor& t) {
      return weigh(attention_context(attention_weights(t, keys), values), w);
    };
    auto f_k = [&](const Tensor& t) {
      auto k2 = keys;
      k2[0] = t;
      return weigh(attention_context(attention_weights(q, k2), values), w);
    };
    auto f_v = [&](const Tensor& t) {
      auto v2 = values;
      v2[0] = t;
      return weigh(attention_context(attention_weights(q, keys), v2), w);
    };
    return std::max({ad::grad_check(f_q, q, eps).max_rel_error,
                     ad::grad_check(f_k, keys[0], eps).max_rel_error,
                     ad::grad_check(f_v, values[0], eps).max_rel_error});
  });
  c.emplace_back("attention_critic", [](Rng& r, double eps) {
    CriticConfig cc;
    cc.n_agents = dim(r, 2, 3);
    cc.obs_dim = dim(r, 2, 3);
    cc.n_actions = 3;
    cc.embed_dim = 4;
    cc.heads = dim(r, 1, 2);
    cc.key_dim = 2;
    const std::size_t B = dim(r, 1, 3);
    AttentionCritic critic(cc, r);
    std::vector<Tensor> obs, acts;
    for (std::size_t i = 0; i < cc.n_agents; ++i) {
      obs.push_back(random_tensor({B, cc.obs_dim}, r));
      std::vector<int> a(B);
      for (auto& x : a) x = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, 2)(r));
      acts.push_back(one_hot(a, cc.n_actions));
    }
    std::vector<Tensor> w;
    for (std::size_t i = 0; i < cc.n_agents; ++i) w.push_back(random_tensor({B, cc.n_actions}, r));
    auto loss_of = [&](const std::vector<Tensor>& o) {
      const CriticOutput out = critic.forward(o, acts);
      Tensor total = weigh(out.q_all[0], w[0]);
      for (std::size_t i = 1; i < cc.n_agents; ++i) total = ad::add(total, weigh(out.q_all[i], w[i]));
      return total;
    };
    const std::size_t which = std::uniform_int_distribution<std::size_t>(0, cc.n_agents - 1)(r);
    double err = ad::grad_check(
                     [&](const Tensor& t) {
                       auto o = obs;
                       o[which] = t;
                       return loss_of(o);
                     },
                     obs[which], eps)
                     .max_rel_error;
    // One parameter tensor per instance, cycling through the whole critic.
    const auto params = critic.parameters("c");
    const auto& p = params[std::uniform_int_distribution<std::size_t>(0, params.size() - 1)(r)].second;
    err = std::max(err, ad::grad_check_inplace([&] { return loss_of(obs); }, p, eps).max_rel_error);
    return err;
  });
  return c;
}

}  // namespace

std::vector<GradCaseResult> run_gradient_suite(int instances, std::uint64_t seed, double eps, double tol) {
  std::vector<GradCaseResult> out;
  std::uint64_t stream = 0;
  for (const auto& [name, fn] : cases()) {
    Rng rng(derive_seed(seed, stream++));
    GradCaseResult res;
    res.name = name;
    for (int k = 0; k < instances; ++k) {
      const double e = fn(rng, eps);
      res.max_rel_error = std::max(res.max_rel_error, std::isfinite(e) ? e : INFINITY);
      ++res.instances;
    }
    res.passed = res.max_rel_error < tol;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace macaac
