#pragma once

#include <cmath>
#include <cstdint>

namespace rrl::rng {

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent substream id from a seed and one or two labels.
// Used for shard substreams, sweep cell seeds, and data/init/shuffle splits.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ mix64(a ^ 0xd1b54a32d192ed03ull));
}
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(derive(seed, a), b);
}

// Stream labels; values are arbitrary but frozen (outputs are reproducibility
// contracts).
inline constexpr std::uint64_t kTagInputs = 0x01;
inline constexpr std::uint64_t kTagNoise = 0x02;
inline constexpr std::uint64_t kTagInit = 0x03;
inline constexpr std::uint64_t kTagShuffle = 0x04;
inline constexpr std::uint64_t kTagTestSet = 0x05;
inline constexpr std::uint64_t kTagTrain = 0x06;
inline constexpr std::uint64_t kTagData = 0x07;
inline constexpr std::uint64_t kTagShard = 0x08;
inline constexpr std::uint64_t kTagAttempt = 0x09;

// SplitMix64 generator. State advances by the golden-gamma increment; the
// sequence for a given seed is fixed forever.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never returns 0 so log() is always finite.
  double next_unit_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection; unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// Standard normals via Box-Muller on a SplitMix64 stream. Pairs are cached,
// so a stream consumes two uniforms per two normals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : uni_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uni_.next_unit_pos();
    const double u2 = uni_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  SplitMix64 uni_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rrl::rng
