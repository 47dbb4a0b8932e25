#include <algorithm>
#include <cmath>
#include <limits>

#include "nanomap/kernels.hpp"

namespace nanomap::kernels::scalar {

void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z) {
  const double r00 = r[0], r01 = r[1], r02 = r[2];
  const double r10 = r[3], r11 = r[4], r12 = r[5];
  const double r20 = r[6], r21 = r[7], r22 = r[8];
  const double tx = t[0], ty = t[1], tz = t[2];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[i], y = ys[i], z = zs[i];
    // Balanced (a + b) + (c + d) trees; the AVX2 variant mirrors this shape.
    out_x[i] = (r00 * x + r01 * y) + (r02 * z + tx);
    out_y[i] = (r10 * x + r11 * y) + (r12 * z + ty);
    out_z[i] = (r20 * x + r21 * y) + (r22 * z + tz);
  }
}

void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int32_t>(std::floor(v[i] * inv_cell));
  }
}

void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]) {
  mins[0] = mins[1] = mins[2] = std::numeric_limits<float>::infinity();
  maxs[0] = maxs[1] = maxs[2] = -std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = records + 4 * i;
    for (int a = 0; a < 3; ++a) {
      mins[a] = std::min(mins[a], p[a]);
      maxs[a] = std::max(maxs[a], p[a]);
    }
  }
}

}  // namespace nanomap::kernels::scalar
