#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <random>

namespace vanet {

// 64-bit finalizer (splitmix64) used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for a named sub-stream of a base seed. Streams with different tags
// are statistically independent, so enabling one consumer does not perturb
// the draws seen by another.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_tag) {
  return mix64(base ^ mix64(stream_tag));
}

// Stream tags used across the toolkit.
inline constexpr std::uint64_t kStreamPlacement = 0x706c6163u;  // vehicle placement
inline constexpr std::uint64_t kStreamMobility = 0x6d6f6269u;   // CA mobility draws
inline constexpr std::uint64_t kStreamProtocol = 0x70726f74u;   // protocol coin flips

// Seeded generator with hand-mapped distributions. mt19937_64 output is
// pinned by the standard, and mapping draws ourselves (instead of using
// std::*_distribution) keeps sequences identical across standard library
// implementations. Counts its draws so tests can assert a consumer stayed
// silent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [lo, hi], rejection-sampled so it is unbiased
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % span;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<int>(v % span);
  }

  double exponential(double mean) { return -mean * std::log1p(-next_double()); }

  bool bernoulli(double p) { return next_double() < p; }

  std::uint64_t draw_count() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace vanet
