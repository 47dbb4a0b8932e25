#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace nanomap::kernels {

// Bulk arithmetic kernels for the hot loops (cloud-to-world transforms in
// the fused baseline, voxel quantization, kd-tree extent scans). Each kernel
// has a scalar reference implementation and an AVX2 variant; the dispatcher
// picks one at runtime. Variants evaluate the same expression tree per
// element, so outputs are required to be identical, not merely close — the
// equivalence tests assert exact equality.

enum class Backend { scalar, avx2 };

/// Backend the dispatcher currently resolves to.
Backend active_backend();

/// True when the CPU supports AVX2 and the build carries the AVX2 variant.
bool avx2_available();

/// Overrides backend selection (nullopt restores automatic detection).
/// Throws std::invalid_argument when forcing an unavailable backend.
void force_backend(std::optional<Backend> backend);

/// out = R * p + t applied to n points in structure-of-arrays layout.
/// r is row-major 3x3. In-place use (out == in) is allowed.
void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z);

/// out[i] = (int32) floor(v[i] * inv_cell).
void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out);

/// Componentwise min/max of the first three lanes of n contiguous
/// 4-float records (the kd-tree's {x, y, z, index} build items).
void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]);

namespace scalar {
void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z);
void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out);
void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]);
}  // namespace scalar

#ifdef NANOMAP_HAVE_AVX2
namespace avx2 {
void transform_points(const double r[9], const double t[3], const double* xs,
                      const double* ys, const double* zs, std::size_t n,
                      double* out_x, double* out_y, double* out_z);
void quantize_floor(const double* v, std::size_t n, double inv_cell,
                    std::int32_t* out);
void minmax3_strided(const float* records, std::size_t n, float mins[3],
                     float maxs[3]);
}  // namespace avx2
#endif

}  // namespace nanomap::kernels
