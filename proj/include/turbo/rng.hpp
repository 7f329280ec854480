#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace turbo {

/// Caller-owned random stream. One stream per Monte Carlo run or per filter.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic child seed for stream `index` of `base`; independent of the
/// order in which children are requested.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

}  // namespace turbo
