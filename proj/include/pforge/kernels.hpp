#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the pixel pipeline and the metrics.
//
// Every routine exists as a scalar reference and, on x86-64, an AVX2
// variant chosen at runtime. Element-wise routines are bit-identical across
// variants (the build disables FP contraction and both paths perform the
// same IEEE operations in the same order). Reductions accumulate in
// different orders and agree to rounding only.

namespace pforge::kernels {

struct Table {
  const char* name;

  /// dst = src * mul + dst * (1 - alpha * mul); src is premultiplied.
  void (*over)(float* dst, const float* src, const float* alpha, float mul, std::size_t n);

  /// dst = a * (1 - t) + b * t.
  void (*mix)(float* dst, const float* a, const float* b, float t, std::size_t n);

  /// dst = u8(src), exact.
  void (*widen)(float* dst, const std::uint8_t* src, std::size_t n);

  /// dst = clamp(floor(src + 0.5), 0, 255); round half away from zero for src >= 0.
  void (*quantize)(std::uint8_t* dst, const float* src, std::size_t n);

  /// dst = max(dst, src) byte-wise.
  void (*max_u8)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);

  /// sum over i with mask[i] != 0 of (a[i] - b[i])^2.
  double (*masked_sq_diff)(const double* a, const double* b, const std::uint8_t* mask,
                           std::size_t n);

  /// sum over masked pixels of min_c ||(r,g,b)[i] - colors[c]||, colors packed rgb.
  double (*masked_min_dist)(const double* r, const double* g, const double* b,
                            const std::uint8_t* mask, std::size_t n, const double* colors,
                            std::size_t n_colors);
};

const Table& scalar_table();

/// nullptr when the AVX2 table was not built or the CPU lacks AVX2.
const Table* avx2_table();

/// Table used by the library: AVX2 when available, unless the environment
/// variable PFORGE_SIMD=scalar forces the reference path. Resolved once.
const Table& active();

}  // namespace pforge::kernels
