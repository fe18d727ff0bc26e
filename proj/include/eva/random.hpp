#pragma once

// Counter-based random numbers (Philox4x32-10) and the handful of variate
// generators the library needs. Every stream is a pure function of
// (key, counter), so any day of any cell can be regenerated on its own.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace eva {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// SplitMix64 finalizer, used to derive Philox keys from user seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// A sequential view over the Philox stream identified by
/// (seed, domain, a, b). The fourth counter word indexes blocks within the
/// stream; `a` and `b` are typically a cell index and a day index.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t domain, std::uint32_t a,
                std::uint64_t b)
      : key_{}, ctr_{} {
    const std::uint64_t k = mix64(seed ^ mix64(domain));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {a, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), 0};
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      block_ = Philox4x32::generate(ctr_, key_);
      ++ctr_[3];
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    // Box-Muller; the second variate is discarded to keep draws per call fixed.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the U^(1/shape) boost for
  /// shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Binomial(n, p) by CDF inversion; intended for n of at most a few hundred.
  unsigned binomial(unsigned n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    const double q = 1.0 - p;
    const double ratio = p / q;
    double pmf = std::pow(q, static_cast<double>(n));
    double cdf = pmf;
    const double u = uniform();
    unsigned k = 0;
    while (u > cdf && k < n) {
      pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      cdf += pmf;
      ++k;
    }
    return k;
  }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int pos_ = 4;
};

// Stream domains keep independent uses of one seed from colliding.
namespace stream_domain {
inline constexpr std::uint64_t kSample = 0x5a4d504c45ull;      // iid samples
inline constexpr std::uint64_t kDaily = 0x4441494c59ull;       // synthetic days
inline constexpr std::uint64_t kJitter = 0x4a49545445ull;      // per-cell jitter
inline constexpr std::uint64_t kTruth = 0x5452555448ull;       // MC annual maxima
}  // namespace stream_domain

}  // namespace eva
