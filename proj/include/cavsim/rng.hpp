#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace cavsim {

// std::mt19937_64 is specified bit-for-bit by the standard; the
// distributions are not. Everything seeded goes through these helpers so a
// scenario seed reproduces across standard libraries.
using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits.
inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

// Fisher-Yates with a fixed draw sequence.
template <typename T>
void portable_shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace cavsim
