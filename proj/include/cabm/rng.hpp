#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace cabm {

/// Splittable 64-bit RNG: xoshiro256++ seeded through splitmix64.
///
/// Replica r of a run with master seed s draws from an independent stream
/// derived from (s, r), so Monte Carlo results are bit-identical for a given
/// seed no matter how replicas are scheduled. Normal variates use Box-Muller
/// (explicit formula, no library distribution) for cross-platform stability.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t z = splitmix(seed);
    z = splitmix(z ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    for (auto& w : state_) {
      z += 0x9e3779b97f4a7c15ULL;
      w = splitmix(z);
    }
  }

  static Rng forReplica(std::uint64_t seed, std::uint64_t replica) {
    return Rng(seed, replica);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in (0,1]; never returns 0, so log() below is safe.
  double uniform() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, one spare cached.
  double normal() {
    if (haveSpare_) {
      haveSpare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    haveSpare_ = true;
    return r * std::cos(a);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static constexpr std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool haveSpare_ = false;
};

}  // namespace cabm
