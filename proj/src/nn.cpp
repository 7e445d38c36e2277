#include "macaac/nn.hpp"

#include <cmath>

#include "macaac/errors.hpp"

namespace macaac::nn {

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> w(in * out);
  for (auto& v : w) v = u(rng);
  weight = ad::Tensor::from({in, out}, std::move(w), true);
  if (with_bias) {
    std::vector<double> b(out);
    for (auto& v : b) v = u(rng);
    bias = ad::Tensor::from({1, out}, std::move(b), true);
  }
}

ad::Tensor Linear::forward(const ad::Tensor& x) const {
  ad::Tensor y = ad::matmul(x, weight);
  return bias.defined() ? ad::add_bias(y, bias) : y;
}

void Linear::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight);
  if (bias.defined()) out.emplace_back(prefix + ".bias", bias);
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out_dim, Rng& rng)
    : fc1(in, hidden, rng), fc2(hidden, hidden, rng), out(hidden, out_dim, rng) {}

ad::Tensor Mlp::forward(const ad::Tensor& x) const {
  ad::Tensor h = ad::leaky_relu(fc1.forward(x), kLeakySlope);
  h = ad::leaky_relu(fc2.forward(h), kLeakySlope);
  return out.forward(h);
}

void Mlp::collect(const std::string& prefix, NamedTensors& out_params) const {
  fc1.collect(prefix + ".fc1", out_params);
  fc2.collect(prefix + ".fc2", out_params);
  out.collect(prefix + ".out", out_params);
}

std::vector<ad::Tensor> tensors_of(const NamedTensors& named) {
  std::vector<ad::Tensor> out;
  out.reserve(named.size());
  for (const auto& [_, t] : named) out.push_back(t);
  return out;
}

namespace {
void check_pair(const NamedTensors& src, const NamedTensors& dst) {
  if (src.size() != dst.size()) throw ContractError("parameter lists differ in length");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].second.shape() != dst[i].second.shape()) {
      throw DimensionError("parameter " + src[i].first + " shape " +
                           ad::shape_str(src[i].second.shape()) + " vs " +
                           ad::shape_str(dst[i].second.shape()));
    }
  }
}
}  // namespace

void copy_values(const NamedTensors& src, const NamedTensors& dst) {
  check_pair(src, dst);
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto s = src[i].second.data();
    auto d = ad::Tensor(dst[i].second).mutable_data();
    std::copy(s.begin(), s.end(), d.begin());
  }
}

void soft_update(const NamedTensors& src, const NamedTensors& dst, double tau) {
  check_pair(src, dst);
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto s = src[i].second.data();
    auto d = ad::Tensor(dst[i].second).mutable_data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (1.0 - tau) * d[k] + tau * s[k];
  }
}

double clip_grad_norm(const std::vector<ad::Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto p : params) {
      for (auto& g : p.mutable_grad()) g *= f;
    }
  }
  return norm;
}

void zero_grads(const std::vector<ad::Tensor>& params) {
  for (auto p : params) p.zero_grad();
}

bool grads_finite(const std::vector<ad::Tensor>& params) {
  for (const auto& p : params) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) return false;
    }
  }
  return true;
}

Adam::Adam(std::vector<ad::Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto w = params_[k].mutable_data();
    auto g = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

}  // namespace macaac::nn
