#pragma once

#include <cmath>
#include <cstdint>

namespace tse {

// SplitMix64 (Steele/Lea/Flood 2014). One 64-bit state word, one avalanche
// mix per draw. Every stochastic element of the toolkit goes through this
// generator, so a (seed, parameters) pair pins the output stream exactly.
// Ports in other languages can replicate streams bit for bit; tests assert
// distributional properties only.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on [0, hi)
  double uniform(double hi) { return uniform() * hi; }

  // uniform on [lo, hi)
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // standard normal, Box-Muller; second value of each pair is cached
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Deterministic sub-stream seed for task `salt` of a run seeded with `seed`
// (e.g. one independent noise stream per eta grid index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ull * (salt + 1)));
  return g.next();
}

}  // namespace tse
