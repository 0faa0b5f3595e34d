#pragma once

#include <cstdint>
#include <vector>

namespace modchain {

// splitmix64 (Steele, Lea, Flood 2014). Chosen over std engines because its
// output is pinned by the algorithm, not by the standard library build, so
// identical seeds reproduce identical datasets everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, n) by rejection below 2^64 mod n.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Inclusive integer range.
  int range(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

// Every randomness source draws from its own derived stream, so changing how
// one source is consumed (say, the distractor count) never perturbs another.
enum class Stream : std::uint64_t {
  Instance = 1,
  InitValue = 2,
  Operations = 3,
  Names = 4,
  DistractorCount = 5,
  DistractorValues = 6,
  Permutation = 7,
  Labels = 8,
  Baseline = 9,
  Resample = 10,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(base + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream stream) {
  return derive_seed(base, static_cast<std::uint64_t>(stream));
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index) {
  return derive_seed(derive_seed(base, stream), index);
}

// Fisher-Yates with bounded draws; out[j] is the element placed at position j.
inline std::vector<int> random_permutation(int n, SplitMix64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace modchain
