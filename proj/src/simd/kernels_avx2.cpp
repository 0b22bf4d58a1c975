// Built with -mavx2 (no FMA contraction) when the compiler targets x86-64.
#include "cavsim/simd/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <limits>
#include <vector>

namespace cavsim::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  // ((l0 + l2) + (l1 + l3))
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline double hmin(__m256d v) {
  const __m128d m = _mm_min_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_min_sd(m, _mm_unpackhi_pd(m, m)));
}

inline double hmax(__m256d v) {
  const __m128d m = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

void eval_cubic(const Cubic& c, std::span<const double> s, std::span<double> p, std::span<double> v,
                std::span<double> u) {
  const std::size_t n = s.size();
  const std::size_t n_vec = n - n % 4;
  const __m256d p0 = _mm256_set1_pd(c.p0);
  const __m256d v0 = _mm256_set1_pd(c.v0);
  const __m256d u0 = _mm256_set1_pd(c.u0);
  const __m256d jerk = _mm256_set1_pd(c.jerk);
  const __m256d half_u0 = _mm256_set1_pd(0.5 * c.u0);
  const __m256d sixth_j = _mm256_set1_pd(c.jerk / 6.0);
  const __m256d half_j = _mm256_set1_pd(0.5 * c.jerk);
  for (std::size_t i = 0; i < n_vec; i += 4) {
    const __m256d x = _mm256_loadu_pd(&s[i]);
    __m256d pp = _mm256_add_pd(half_u0, _mm256_mul_pd(x, sixth_j));
    pp = _mm256_add_pd(v0, _mm256_mul_pd(x, pp));
    pp = _mm256_add_pd(p0, _mm256_mul_pd(x, pp));
    __m256d vv = _mm256_add_pd(u0, _mm256_mul_pd(x, half_j));
    vv = _mm256_add_pd(v0, _mm256_mul_pd(x, vv));
    const __m256d uu = _mm256_add_pd(u0, _mm256_mul_pd(x, jerk));
    _mm256_storeu_pd(&p[i], pp);
    _mm256_storeu_pd(&v[i], vv);
    _mm256_storeu_pd(&u[i], uu);
  }
  scalar::eval_cubic(c, s.subspan(n_vec), p.subspan(n_vec), v.subspan(n_vec), u.subspan(n_vec));
}

Extrema min_max_mean(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) return scalar::min_max_mean(x);
  const std::size_t n_vec = n - n % 4;
  __m256d vmin = _mm256_loadu_pd(&x[0]);
  __m256d vmax = vmin;
  __m256d vsum = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n_vec; i += 4) {
    const __m256d a = _mm256_loadu_pd(&x[i]);
    vmin = _mm256_min_pd(vmin, a);
    vmax = _mm256_max_pd(vmax, a);
    vsum = _mm256_add_pd(vsum, a);
  }
  Extrema e{hmin(vmin), hmax(vmax), 0.0};
  double sum = hsum(vsum);
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
  if (n < 2 * half + 1 + 4) {
    scalar::windowed_mean(x, keep, half, out);
    return;
  }
  // Dropped samples contribute +0.0 to both sums, which leaves the running
  // totals bit-identical to skipping them.
  std::vector<double> kept(n);
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    kept[i] = keep[i] ? x[i] : 0.0;
    weight[i] = keep[i] ? 1.0 : 0.0;
  }
  const __m256d zero = _mm256_setzero_pd();
  const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
  const std::size_t first = half;
  const std::size_t last = n - 1 - half;  // inclusive, full-width windows
  std::size_t i = first;
  for (; i + 3 <= last; i += 4) {
    __m256d sum = zero;
    __m256d count = zero;
    for (std::size_t k = i - half; k <= i + half; ++k) {
      sum = _mm256_add_pd(sum, _mm256_loadu_pd(&kept[k]));
      count = _mm256_add_pd(count, _mm256_loadu_pd(&weight[k]));
    }
    const __m256d has = _mm256_cmp_pd(count, zero, _CMP_GT_OQ);
    const __m256d mean = _mm256_div_pd(sum, count);
    _mm256_storeu_pd(&out[i], _mm256_blendv_pd(nan, mean, has));
  }
  // Edges and the ragged interior tail go through the reference loop.
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

}  // namespace cavsim::simd::avx2

#endif  // __AVX2__
