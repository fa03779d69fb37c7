#pragma once
// Deterministic counter-based random streams.
//
// Every stochastic quantity in the simulator comes out of a RandomStream.
// Streams are derived, never shared: derive(label) produces an independent
// child stream from the parent's construction seed, so a given
// (root seed, label path) always yields the same draws no matter how work is
// scheduled across threads. The generator is splitmix64: a Weyl counter fed
// through a 64-bit finalizer, which is exactly the cheap counter construction
// the reproducibility contract asks for.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lhv {

// splitmix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  // Independent child stream. Depends only on the construction seed and the
  // label, not on how much of this stream has already been consumed.
  RandomStream derive(std::uint64_t label) const noexcept {
    return RandomStream(mix64(seed_ ^ mix64(label + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform on (-pi, pi]; the left endpoint is unreachable by construction.
  double uniform_angle() noexcept {
    return std::numbers::pi - 2.0 * std::numbers::pi * uniform01();
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Zero-mean Gaussian via Box-Muller. No second-value caching, so every call
  // consumes exactly two uniforms; sigma == 0 consumes nothing and returns 0.
  double gaussian(double sigma) noexcept {
    if (sigma <= 0.0) return 0.0;
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Normal(mean, sigma) conditioned on > 0, by rejection.
  double positive_normal(double mean, double sigma) noexcept {
    if (sigma <= 0.0) return mean;
    double x;
    do {
      x = mean + gaussian(sigma);
    } while (x <= 0.0);
    return x;
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace lhv
