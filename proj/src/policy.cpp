#include "macaac/policy.hpp"

#include <algorithm>
#include <cmath>

#include "macaac/errors.hpp"

namespace macaac {

Actor::Actor(std::size_t obs_dim, std::size_t n_actions, std::size_t hidden, Rng& rng)
    : net_(obs_dim, hidden, n_actions, rng) {}

ad::Tensor Actor::logits(const ad::Tensor& obs) const {
  if (obs.cols() != obs_dim()) {
    throw DimensionError("actor expects observations of width " + std::to_string(obs_dim()) +
                         ", got " + ad::shape_str(obs.shape()));
  }
  return net_.forward(obs);
}

ad::Tensor Actor::log_probs(const ad::Tensor& obs) const {
  return ad::log_softmax(logits(obs), 1);
}

std::vector<double> Actor::distribution(std::span<const double> obs) const {
  ad::NoGradGuard no_grad;
  const ad::Tensor z = logits(ad::Tensor::from({1, obs.size()}, {obs.begin(), obs.end()}));
  return categorical_from_logits(z.data());
}

ActResult Actor::act(std::span<const double> obs, Rng& rng, bool greedy) const {
  const std::vector<double> p = distribution(obs);
  const int a = greedy ? static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin())
                       : sample_categorical(p, rng);
  return {a, std::log(p[static_cast<std::size_t>(a)])};
}

nn::NamedTensors Actor::parameters(const std::string& prefix) const {
  nn::NamedTensors out;
  collect(prefix, out);
  return out;
}

std::vector<double> categorical_from_logits(std::span<const double> logits) {
  double mx = -INFINITY;
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("non-finite policy logit (training diverged)");
    mx = std::max(mx, z);
  }
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the running sum; fall back to the last non-zero.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace macaac
