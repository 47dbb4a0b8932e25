#include "nanomap/kernels.hpp"

#include <stdexcept>

namespace nanomap::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(NANOMAP_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

std::optional<Backend>& forced() {
  static std::optional<Backend> value;
  return value;
}

}  // namespace

bool avx2_available() {
  static const bool available = cpu_has_avx2();
  return available;
}

Backend active_backend() {
  if (forced().has_value()) return *forced();
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

void force_backend(std::optional<Backend> backend) {
  if (backend == Backend::avx2 && !avx2_available()) {
    throw std::invalid_argument("kernels: AVX2 backend not available");
  }
  forced() = backend;
}

void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z) {
#ifdef NANOMAP_HAVE_AVX2
  if (active_backend() == Backend::avx2) {
    avx2::transform_points(r, t, xs, ys, zs, n, out_x, out_y, out_z);
    return;
  }
#endif
  scalar::transform_points(r, t, xs, ys, zs, n, out_x, out_y, out_z);
}

void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out) {
#ifdef NANOMAP_HAVE_AVX2
  if (active_backend() == Backend::avx2) {
    avx2::quantize_floor(v, n, inv_cell, out);
    return;
  }
#endif
  scalar::quantize_floor(v, n, inv_cell, out);
}

void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]) {
#ifdef NANOMAP_HAVE_AVX2
  if (active_backend() == Backend::avx2) {
    avx2::minmax3_strided(records, n, mins, maxs);
    return;
  }
#endif
  scalar::minmax3_strided(records, n, mins, maxs);
}

}  // namespace nanomap::kernels
