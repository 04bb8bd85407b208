#pragma once

#include <cstdint>
#include <vector>

namespace wheelforge {

/// Deterministic 64-bit generator (splitmix64). Used everywhere randomness
/// appears so that results are bit-identical across platforms and standard
/// library versions; std::uniform_*_distribution is implementation-defined
/// and must not be used for anything that lands in an output file.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for our n << 2^64, but keep
    // the rejection loop so sequences are well defined regardless of n.
    const std::uint64_t limit = n * ((~0ULL) / n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  /// Fisher-Yates shuffle of the index range [0, n).
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

private:
  std::uint64_t state_;
};

/// Stable stream derivation so parallel workers draw independent,
/// order-insensitive sequences keyed by (seed, stream id).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng r(seed ^ (0x5851f42d4c957f2dULL * (stream + 1)));
  return r.next_u64();
}

}  // namespace wheelforge
