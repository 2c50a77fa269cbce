#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dmbpp {

/// SplitMix64 finalizer. Replicate r of a run seeded with s uses
/// split_seed(s, r) = splitmix64(s ^ r).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ index);
}

/// Random stream owned by exactly one chain or generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    double u;
    do {
      u = unit_(engine_);
    } while (u <= 0.0);
    return u;
  }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }

  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(engine_);
  }

  /// Index drawn with probability proportional to exp(log_weights[j]).
  /// Entries equal to -inf are never chosen.
  std::size_t categorical_log(std::span<const double> log_weights);

  /// Dirichlet draw returned as the full (m+1)-part composition.
  std::vector<double> dirichlet(std::span<const double> alpha);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dmbpp
