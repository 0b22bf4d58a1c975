#pragma once

// Array kernels with a scalar reference and vectorised variants.
//
// Every variant of eval_cubic and windowed_mean performs the same floating
// point operations in the same order per element as the scalar reference, so
// results are bit-identical across ISAs. min_max_mean reorders the sum; its
// mean agrees with the reference to rounding only.

#include <cstddef>
#include <cstdint>
#include <span>

namespace cavsim::simd {

enum class Isa { scalar, avx2, neon };

const char* to_string(Isa isa);

// Local-time cubic: p(s) = p0 + v0 s + u0 s^2/2 + jerk s^3/6.
struct Cubic {
  double p0 = 0.0;
  double v0 = 0.0;
  double u0 = 0.0;
  double jerk = 0.0;
};

struct Extrema {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// All output spans must be at least s.size() long.
using EvalCubicFn = void (*)(const Cubic&, std::span<const double> s, std::span<double> p,
                             std::span<double> v, std::span<double> u);
// x must be non-empty.
using MinMaxMeanFn = Extrema (*)(std::span<const double> x);
// Centred mean over x[i-h .. i+h] of samples with keep != 0, where h is
// min(half, i, n-1-i). Windows with no kept sample produce NaN.
using WindowedMeanFn = void (*)(std::span<const double> x, std::span<const std::uint8_t> keep,
                                std::size_t half, std::span<double> out);

struct KernelTable {
  Isa isa = Isa::scalar;
  EvalCubicFn eval_cubic = nullptr;
  MinMaxMeanFn min_max_mean = nullptr;
  WindowedMeanFn windowed_mean = nullptr;
};

namespace scalar {
void eval_cubic(const Cubic& c, std::span<const double> s, std::span<double> p, std::span<double> v,
                std::span<double> u);
Extrema min_max_mean(std::span<const double> x);
void windowed_mean(std::span<const double> x, std::span<const std::uint8_t> keep, std::size_t half,
                   std::span<double> out);
}  // namespace scalar

// Variant tables. A table for an ISA the build or CPU lacks is reported as
// unavailable and never dispatched to.
bool isa_available(Isa isa);
const KernelTable& table_for(Isa isa);  // throws UsageError when unavailable

// Best available table, chosen once at first use. CAVSIM_SIMD=scalar|avx2|neon
// in the environment forces a choice (falls back to scalar when unavailable).
const KernelTable& active();

inline void eval_cubic(const Cubic& c, std::span<const double> s, std::span<double> p, std::span<double> v,
                       std::span<double> u) {
  active().eval_cubic(c, s, p, v, u);
}
inline Extrema min_max_mean(std::span<const double> x) { return active().min_max_mean(x); }
inline void windowed_mean(std::span<const double> x, std::span<const std::uint8_t> keep, std::size_t half,
                          std::span<double> out) {
  active().windowed_mean(x, keep, half, out);
}

}  // namespace cavsim::simd
