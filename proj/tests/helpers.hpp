#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "macaac/tensor.hpp"

namespace testing {

inline macaac::ad::Tensor random_tensor(macaac::ad::Shape shape, std::mt19937_64& rng, double lo = -1,
                                        double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(macaac::ad::shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return macaac::ad::Tensor::from(std::move(shape), std::move(v));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("macaac_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Upper-tail probability of a chi-square statistic.
inline double chi_square_sf(double x, int dof) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

}  // namespace testing
