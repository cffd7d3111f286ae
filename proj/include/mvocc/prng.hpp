#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace mvocc {

/// SplitMix64 finalizer. Used for seeding and stream splitting.
///
///   x += 0x9E3779B97F4A7C15
///   z  = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
///   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Portable xorshift64* generator.
///
/// State update and output, all arithmetic modulo 2^64:
///
///   s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;
///   out = s * 0x2545F4914F6CDD1D
///
/// The initial state is splitmix64(seed ^ splitmix64(stream)), replaced by
/// 0x9E3779B97F4A7C15 if it happens to be zero. A generator for a derived
/// stream is obtained with split(stream), which depends only on the seed the
/// parent was built with, never on how far the parent has advanced.
///
/// below(n) is next() % n. uniform() is (next() >> 11) * 2^-53 in [0, 1).
/// Every value that feeds fold assignment goes through integer operations
/// only, so fold plans are bit-identical on any platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {
    state_ = splitmix64(seed ^ splitmix64(stream));
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  [[nodiscard]] Rng split(std::uint64_t stream) const noexcept {
    return Rng(splitmix64(seed_ ^ splitmix64(stream_)), stream);
  }

  std::uint64_t below(std::uint64_t n) noexcept { return n == 0 ? 0 : next() % n; }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Box-Muller, one variate per call.
  double normal() noexcept {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fisher-Yates, walking i from the end: swap(v[i], v[below(i + 1)]).
  template <class T> void shuffle(std::span<T> v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_;
};

} // namespace mvocc
