#include "cavsim/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <algorithm>
#include <limits>
#include <vector>

namespace cavsim::simd::neon {

void eval_cubic(const Cubic& c, std::span<const double> s, std::span<double> p, std::span<double> v,
                std::span<double> u) {
  const std::size_t n = s.size();
  const std::size_t n_vec = n - n % 2;
  const float64x2_t p0 = vdupq_n_f64(c.p0);
  const float64x2_t v0 = vdupq_n_f64(c.v0);
  const float64x2_t u0 = vdupq_n_f64(c.u0);
  const float64x2_t jerk = vdupq_n_f64(c.jerk);
  const float64x2_t half_u0 = vdupq_n_f64(0.5 * c.u0);
  const float64x2_t sixth_j = vdupq_n_f64(c.jerk / 6.0);
  const float64x2_t half_j = vdupq_n_f64(0.5 * c.jerk);
  // vmulq + vaddq (not vfmaq) to match the scalar rounding sequence.
  for (std::size_t i = 0; i < n_vec; i += 2) {
    const float64x2_t x = vld1q_f64(&s[i]);
    float64x2_t pp = vaddq_f64(half_u0, vmulq_f64(x, sixth_j));
    pp = vaddq_f64(v0, vmulq_f64(x, pp));
    pp = vaddq_f64(p0, vmulq_f64(x, pp));
    float64x2_t vv = vaddq_f64(u0, vmulq_f64(x, half_j));
    vv = vaddq_f64(v0, vmulq_f64(x, vv));
    const float64x2_t uu = vaddq_f64(u0, vmulq_f64(x, jerk));
    vst1q_f64(&p[i], pp);
    vst1q_f64(&v[i], vv);
    vst1q_f64(&u[i], uu);
  }
  scalar::eval_cubic(c, s.subspan(n_vec), p.subspan(n_vec), v.subspan(n_vec), u.subspan(n_vec));
}

Extrema min_max_mean(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return scalar::min_max_mean(x);
  const std::size_t n_vec = n - n % 2;
  float64x2_t vmin = vld1q_f64(&x[0]);
  float64x2_t vmax = vmin;
  float64x2_t vsum = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n_vec; i += 2) {
    const float64x2_t a = vld1q_f64(&x[i]);
    vmin = vminq_f64(vmin, a);
    vmax = vmaxq_f64(vmax, a);
    vsum = vaddq_f64(vsum, a);
  }
  Extrema e{vminvq_f64(vmin), vmaxvq_f64(vmax), 0.0};
  double sum = vaddvq_f64(vsum);
  for (std::size_t i = n_vec; i < n; ++i) {
    e.min = std::min(e.min, x[i]);
    e.max = std::max(e.max, x[i]);
    sum += x[i];
  }
  e.mean = sum / static_cast<double>(n);
  return e;
}

void windowed_mean(std::span<const double> x, std::span<const std::uint8_t> keep, std::size_t half,
                   std::span<double> out) {
  const std::size_t n = x.size();
  if (n < 2 * half + 1 + 2) {
    scalar::windowed_mean(x, keep, half, out);
    return;
  }
  std::vector<double> kept(n);
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    kept[i] = keep[i] ? x[i] : 0.0;
    weight[i] = keep[i] ? 1.0 : 0.0;
  }
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t nan = vdupq_n_f64(std::numeric_limits<double>::quiet_NaN());
  const std::size_t first = half;
  const std::size_t last = n - 1 - half;
  std::size_t i = first;
  for (; i + 1 <= last; i += 2) {
    float64x2_t sum = zero;
    float64x2_t count = zero;
    for (std::size_t k = i - half; k <= i + half; ++k) {
      sum = vaddq_f64(sum, vld1q_f64(&kept[k]));
      count = vaddq_f64(count, vld1q_f64(&weight[k]));
    }
    const uint64x2_t has = vcgtq_f64(count, zero);
    vst1q_f64(&out[i], vbslq_f64(has, vdivq_f64(sum, count), nan));
  }
  auto reference_at = [&](std::size_t j) {
    const std::size_t h = std::min({half, j, n - 1 - j});
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t k = j - h; k <= j + h; ++k) {
      sum += kept[k];
      count += weight[k];
    }
    out[j] = count > 0.0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
  };
  for (std::size_t j = 0; j < first; ++j) reference_at(j);
  for (std::size_t j = i; j < n; ++j) reference_at(j);
}

}  // namespace cavsim::simd::neon

#endif  // __aarch64__ && __ARM_NEON
