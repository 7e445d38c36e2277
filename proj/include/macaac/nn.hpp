#pragma once

// Layers, parameter bookkeeping and the optimizer shared by actors and critics.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "macaac/tensor.hpp"

namespace macaac::nn {

using Rng = std::mt19937_64;
using NamedTensors = std::vector<std::pair<std::string, ad::Tensor>>;

inline constexpr double kLeakySlope = 0.01;

struct Linear {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // 1 x out, undefined when the layer has no bias

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);

  std::size_t in_features() const { return weight.shape()[0]; }
  std::size_t out_features() const { return weight.shape()[1]; }
  ad::Tensor forward(const ad::Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

// Two hidden layers with leaky-relu, linear output.
struct Mlp {
  Linear fc1, fc2, out;

  Mlp() = default;
  Mlp(std::size_t in, std::size_t hidden, std::size_t out_dim, Rng& rng);
  ad::Tensor forward(const ad::Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

std::vector<ad::Tensor> tensors_of(const NamedTensors& named);

// Values of `src` copied into `dst` in place (names and shapes must match).
void copy_values(const NamedTensors& src, const NamedTensors& dst);
// dst <- (1 - tau) * dst + tau * src
void soft_update(const NamedTensors& src, const NamedTensors& dst, double tau);

// Rescales grads so their global L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(const std::vector<ad::Tensor>& params, double max_norm);
void zero_grads(const std::vector<ad::Tensor>& params);
bool grads_finite(const std::vector<ad::Tensor>& params);

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<ad::Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad() { zero_grads(params_); }
  double lr() const { return lr_; }
  const std::vector<ad::Tensor>& params() const { return params_; }

 private:
  std::vector<ad::Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
};

}  // namespace macaac::nn
