#include <algorithm>
#include <cmath>
#include <limits>

#include "cavsim/simd/kernels.hpp"

namespace cavsim::simd::scalar {

void eval_cubic(const Cubic& c, std::span<const double> s, std::span<double> p, std::span<double> v,
                std::span<double> u) {
  const double half_u0 = 0.5 * c.u0;
  const double sixth_j = c.jerk / 6.0;
  const double half_j = 0.5 * c.jerk;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s[i];
    p[i] = c.p0 + x * (c.v0 + x * (half_u0 + x * sixth_j));
    v[i] = c.v0 + x * (c.u0 + x * half_j);
    u[i] = c.u0 + x * c.jerk;
  }
}

Extrema min_max_mean(std::span<const double> x) {
  Extrema e{x[0], x[0], 0.0};
  double sum = 0.0;
  for (double value : x) {
    e.min = std::min(e.min, value);
    e.max = std::max(e.max, value);
    sum += value;
  }
  e.mean = sum / static_cast<double>(x.size());
  return e;
}

void windowed_mean(std::span<const double> x, std::span<const std::uint8_t> keep, std::size_t half,
                   std::span<double> out) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t k = i - h; k <= i + h; ++k) {
      if (keep[k]) {
        sum += x[k];
        count += 1.0;
      }
    }
    out[i] = count > 0.0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace cavsim::simd::scalar
