#include "doctest.h"
#include "helpers.hpp"
#include "macaac/attention_critic.hpp"
#include "macaac/kernels.hpp"

using namespace macaac;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Textbook triple loop, independent of the kernel implementation.
std::vector<double> naive(const kernels::GemmArgs& g, const std::vector<double>& a,
                          const std::vector<double>& b) {
  std::vector<double> c(g.m * g.n, 0.0);
  for (std::size_t i = 0; i < g.m; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      long double acc = 0;
      for (std::size_t p = 0; p < g.k; ++p) {
        const double av = g.trans_a ? a[p * g.m + i] : a[i * g.k + p];
        const double bv = g.trans_b ? b[j * g.k + p] : b[p * g.n + j];
        acc += static_cast<long double>(av) * bv;
      }
      c[i * g.n + j] = static_cast<double>(acc);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("serial and OpenMP gemm agree bit for bit and match the naive product") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<std::size_t> d(1, trial < 40 ? 9 : 70);
    kernels::GemmArgs g{d(rng), d(rng), d(rng), (trial & 1) != 0, (trial & 2) != 0};
    const auto a = random_vec(g.m * g.k, rng), b = random_vec(g.k * g.n, rng);
    const auto seed = random_vec(g.m * g.n, rng);
    std::vector<double> cs = seed, co = seed;
    kernels::serial::gemm_acc(g, a, b, cs);
    kernels::omp::gemm_acc(g, a, b, co);
    CHECK(cs == co);
    const auto ref = naive(g, a, b);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      CHECK(cs[i] - seed[i] == doctest::Approx(ref[i]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("backend switch leaves critic outputs unchanged") {
  CriticConfig cc;
  cc.n_agents = 3;
  cc.obs_dim = 7;
  cc.embed_dim = 48;
  cc.heads = 2;
  cc.key_dim = 24;
  Rng rng(8);
  AttentionCritic critic(cc, rng);
  std::vector<ad::Tensor> obs, acts;
  for (std::size_t i = 0; i < 3; ++i) {
    obs.push_back(testing::random_tensor({64, 7}, rng));
    std::vector<int> a(64);
    for (std::size_t b = 0; b < 64; ++b) a[b] = static_cast<int>((b + i) % 5);
    acts.push_back(one_hot(a, 5));
  }
  kernels::set_backend(kernels::Backend::kSerial);
  const auto s = critic.forward(obs, acts);
  kernels::set_backend(kernels::Backend::kOpenMP);
  const auto o = critic.forward(obs, acts);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto a = s.q_all[i].data(), b = o.q_all[i].data();
    CHECK(std::vector<double>(a.begin(), a.end()) == std::vector<double>(b.begin(), b.end()));
  }
}

TEST_CASE("NaN propagates through gemm") {
  kernels::GemmArgs g{1, 1, 2, false, false};
  std::vector<double> a{0.0, 1.0}, b{std::nan(""), 2.0}, c{0.0};
  kernels::gemm_acc(g, a, b, c);
  CHECK(std::isnan(c[0]));
}
