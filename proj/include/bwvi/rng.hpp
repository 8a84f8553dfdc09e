#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace bwvi {

// Single-owner random stream. Identical seeds give identical streams within
// one build; concurrent consumers must each derive their own child stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  double normal();
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  // Independent child stream, seeded with derive_seed(seed(), index).
  Rng child(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// SplitMix64-style mix of (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace bwvi
