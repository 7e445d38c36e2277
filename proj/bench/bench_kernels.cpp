// Serial reference vs OpenMP kernels, plus the critic forward pass and
// vectorized environment stepping that sit on top of them.

#include <benchmark/benchmark.h>

#include <random>

#include "macaac/attention_critic.hpp"
#include "macaac/envs/vec_env.hpp"
#include "macaac/kernels.hpp"

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  const macaac::kernels::GemmArgs args{n, n, n, false, false};
  for (auto _ : state) {
    std::fill(c.begin(), c.end(), 0.0);
    if constexpr (Parallel) macaac::kernels::omp::gemm_acc(args, a, b, c);
    else macaac::kernels::serial::gemm_acc(args, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/openmp")->Arg(32)->Arg(128)->Arg(256);

void BM_CriticForward(benchmark::State& state) {
  macaac::kernels::set_backend(state.range(0) ? macaac::kernels::Backend::kOpenMP
                                              : macaac::kernels::Backend::kSerial);
  macaac::CriticConfig cc;
  cc.n_agents = 3;
  cc.obs_dim = 15;
  macaac::Rng rng(3);
  macaac::AttentionCritic critic(cc, rng);
  const std::size_t B = 256;
  std::vector<macaac::ad::Tensor> obs, acts;
  for (std::size_t i = 0; i < cc.n_agents; ++i) {
    obs.push_back(macaac::ad::Tensor::from({B, cc.obs_dim}, random_vec(B * cc.obs_dim, 10 + i)));
    std::vector<int> a(B, static_cast<int>(i % cc.n_actions));
    acts.push_back(macaac::one_hot(a, cc.n_actions));
  }
  for (auto _ : state) {
    macaac::ad::NoGradGuard no_grad;
    auto out = critic.forward(obs, acts);
    benchmark::DoNotOptimize(out.q_all.front().data().data());
  }
  macaac::kernels::set_backend(macaac::kernels::Backend::kOpenMP);
}
BENCHMARK(BM_CriticForward)->ArgName("openmp")->Arg(0)->Arg(1);

void BM_VecEnvStep(benchmark::State& state) {
  macaac::envs::EnvConfig cfg;
  cfg.n_agents = 3;
  cfg.n_targets = 3;
  auto vec = macaac::envs::VecEnv::replicate(cfg, static_cast<int>(state.range(0)));
  vec.reset_all();
  std::vector<std::vector<int>> actions(vec.size(), std::vector<int>(3, 1));
  for (auto _ : state) {
    auto r = vec.step_all(actions);
    if (r.front().done) vec.reset_all();
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_VecEnvStep)->Arg(1)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
