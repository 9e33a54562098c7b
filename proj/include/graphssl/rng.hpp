#pragma once

#include <cstdint>
#include <vector>

namespace graphssl {

// Deterministic counter-free PRNG built on splitmix64. Streams can be forked
// by key so that augmentation randomness depends only on the keys used to
// derive the stream, never on call order elsewhere in the program.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGamma)) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, n). Rejection sampling keeps the draw unbiased and the
  // output identical across platforms.
  std::uint64_t uniform(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derived stream keyed by (this stream's seed position, key). Forking does
  // not advance this stream.
  Rng fork(std::uint64_t key) const { return Rng(mix(state_ ^ mix(key + kGamma))); }

  // Stream derived from a tuple of keys, e.g. (seed, epoch, batch, graph, view).
  static Rng from_keys(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix(seed + kGamma);
    for (std::uint64_t k : keys) s = mix(s ^ mix(k + kGamma));
    return Rng(s);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace graphssl
