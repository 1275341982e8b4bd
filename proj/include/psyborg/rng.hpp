#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace psyborg {

/// Seeded random stream. Every stochastic operation takes one explicitly so
/// that episodes are reproducible and can run on independent threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on the closed range [lo, hi].
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double standard_normal() { return normal_(engine_); }

  /// N(mean, stddev^2); stddev may be zero (point mass).
  double normal(double mean, double stddev) {
    return mean + stddev * standard_normal();
  }

  /// Index drawn proportionally to nonnegative weights. The weights must have
  /// a positive sum.
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

  /// Splittable seed derivation: stream `n` of `master` (splitmix64 mix).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace psyborg
