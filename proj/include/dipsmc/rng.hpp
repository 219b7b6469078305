#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace dipsmc::rng {

/// One splitmix64 step; also used to expand keys into stream states.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic counter-keyed random stream (xoshiro256++ core).
///
/// A stream is fully determined by (seed, key words); code that needs
/// scheduling-independent results creates one stream per logical unit of
/// work, e.g. key = {iteration, particle}.  No global state.
class Stream {
 public:
  Stream() { init(0, {}); }
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) { init(seed, key); }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased uniform integer in {0, ..., n-1}.  n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    // reject the top sliver of the 64-bit range so that % n is exact
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via the Marsaglia polar method (second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  void init(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    std::uint64_t st = seed ^ 0x243F6A8885A308D3ull;
    (void)splitmix64(st);
    for (std::uint64_t k : key) {
      st ^= k + 0x9E3779B97F4A7C15ull + (st << 6) + (st >> 2);
      (void)splitmix64(st);
    }
    bool all_zero = true;
    for (auto& s : s_) {
      s = splitmix64(st);
      all_zero = all_zero && s == 0;
    }
    if (all_zero) s_[0] = 1;  // xoshiro state must not be identically zero
  }

  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Stream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
  return Stream(seed, key);
}

}  // namespace dipsmc::rng
