#pragma once

#include <cstdint>
#include <random>

namespace slope {

/// splitmix64 step; used both as a stream-derivation mixer and to seed
/// the per-stream mt19937_64 engines.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic substream seed for (seed, a, b); replicates and roles
/// (design/signal/noise) each get an independent stream so parallel and
/// serial runs agree bitwise.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = seed;
  s ^= splitmix64(s) + a;
  s ^= splitmix64(s) + b;
  return splitmix64(s);
}

double normal_quantile(double alpha);  // weights.hpp

/// mt19937_64-backed stream; Gaussian variates go through the inverse
/// normal CDF so the exact output sequence is part of the contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    const double u = (double(bits) + 0.5) * 0x1.0p-53;
    return u;
  }

  double normal() { return normal_quantile(uniform()); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace slope
