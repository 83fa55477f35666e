#pragma once

// Seeded shuffling with an explicit algorithm so results are reproducible
// across standard library implementations. std::shuffle and
// std::uniform_int_distribution leave the draw sequence unspecified, which
// would make fold assignments platform-dependent.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace tfcr {

// Recorded in experiment manifests so runs are self-describing.
inline constexpr const char* kRngName = "mt19937_64/fisher-yates";

// Unbiased draw from [0, n) by rejection. n must be >= 1.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t x, r;
  do {
    x = rng();
    r = x % n;
  } while (x - r > std::numeric_limits<std::uint64_t>::max() - (n - 1));
  return r;
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_rand(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fisher_yates(v, rng);
}

}  // namespace tfcr
