#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mvrbm {

/// Deterministic pseudo-random stream (SplitMix64). Identical seeds produce
/// identical sequences on every platform; independent parallel streams are
/// obtained with split(). Distribution transforms are implemented here rather
/// than with <random> adaptors, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Child stream keyed on (initial seed, key); independent of how much of
  /// this stream has been consumed.
  RngStream split(std::uint64_t key) const {
    RngStream mixer(seed_ ^ (0x9e3779b97f4a7c15ull * (key + 1)));
    std::uint64_t derived = mixer.next_u64();
    mixer.state_ = derived;
    derived ^= mixer.next_u64() << 1;
    return RngStream(derived);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Plain modulo: the bias is O(n / 2^64),
  /// far below anything the statistical checks here could resolve.
  std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

  /// Box-Muller; the sine companion is discarded to keep the stream stateless
  /// with respect to call history.
  double gaussian(double mean, double sd) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace mvrbm
