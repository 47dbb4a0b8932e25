#ifdef NANOMAP_HAVE_AVX2

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nanomap/kernels.hpp"

namespace nanomap::kernels::avx2 {

void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z) {
  const __m256d r00 = _mm256_set1_pd(r[0]), r01 = _mm256_set1_pd(r[1]),
                r02 = _mm256_set1_pd(r[2]);
  const __m256d r10 = _mm256_set1_pd(r[3]), r11 = _mm256_set1_pd(r[4]),
                r12 = _mm256_set1_pd(r[5]);
  const __m256d r20 = _mm256_set1_pd(r[6]), r21 = _mm256_set1_pd(r[7]),
                r22 = _mm256_set1_pd(r[8]);
  const __m256d tx = _mm256_set1_pd(t[0]), ty = _mm256_set1_pd(t[1]),
                tz = _mm256_set1_pd(t[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs + i);
    const __m256d y = _mm256_loadu_pd(ys + i);
    const __m256d z = _mm256_loadu_pd(zs + i);
    // Same (a + b) + (c + d) association as the scalar reference; no FMA so
    // that both variants round identically.
    const __m256d ox =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r00, x), _mm256_mul_pd(r01, y)),
                      _mm256_add_pd(_mm256_mul_pd(r02, z), tx));
    const __m256d oy =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r10, x), _mm256_mul_pd(r11, y)),
                      _mm256_add_pd(_mm256_mul_pd(r12, z), ty));
    const __m256d oz =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r20, x), _mm256_mul_pd(r21, y)),
                      _mm256_add_pd(_mm256_mul_pd(r22, z), tz));
    _mm256_storeu_pd(out_x + i, ox);
    _mm256_storeu_pd(out_y + i, oy);
    _mm256_storeu_pd(out_z + i, oz);
  }
  for (; i < n; ++i) {
    const double x = xs[i], y = ys[i], z = zs[i];
    out_x[i] = (r[0] * x + r[1] * y) + (r[2] * z + t[0]);
    out_y[i] = (r[3] * x + r[4] * y) + (r[5] * z + t[1]);
    out_z[i] = (r[6] * x + r[7] * y) + (r[8] * z + t[2]);
  }
}

void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out) {
  const __m256d inv = _mm256_set1_pd(inv_cell);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d scaled = _mm256_mul_pd(_mm256_loadu_pd(v + i), inv);
    const __m256d floored =
        _mm256_round_pd(scaled, _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
    const __m128i cells = _mm256_cvttpd_epi32(floored);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), cells);
  }
  for (; i < n; ++i) {
    out[i] = static_cast<std::int32_t>(std::floor(v[i] * inv_cell));
  }
}

void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]) {
  mins[0] = mins[1] = mins[2] = std::numeric_limits<float>::infinity();
  maxs[0] = maxs[1] = maxs[2] = -std::numeric_limits<float>::infinity();
  std::size_t i = 0;
  if (n >= 2) {
    __m256 vmin = _mm256_set1_ps(std::numeric_limits<float>::infinity());
    __m256 vmax = _mm256_set1_ps(-std::numeric_limits<float>::infinity());
    for (; i + 2 <= n; i += 2) {
      const __m256 rec = _mm256_loadu_ps(records + 4 * i);
      vmin = _mm256_min_ps(vmin, rec);
      vmax = _mm256_max_ps(vmax, rec);
    }
    alignas(32) float lo[8], hi[8];
    _mm256_store_ps(lo, vmin);
    _mm256_store_ps(hi, vmax);
    for (int a = 0; a < 3; ++a) {
      mins[a] = std::min(lo[a], lo[a + 4]);
      maxs[a] = std::max(hi[a], hi[a + 4]);
    }
  }
  for (; i < n; ++i) {
    const float* p = records + 4 * i;
    for (int a = 0; a < 3; ++a) {
      mins[a] = std::min(mins[a], p[a]);
      maxs[a] = std::max(maxs[a], p[a]);
    }
  }
}

}  // namespace nanomap::kernels::avx2

#endif  // NANOMAP_HAVE_AVX2
