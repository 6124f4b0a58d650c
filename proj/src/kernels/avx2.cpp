// AVX2 variants of the kernel table. Only the functions below are compiled
// for AVX2 (via target pragma) so no AVX2 code leaks into inline library
// functions shared with the rest of the program.

#include <cmath>
#include <limits>

#include "pforge/kernels.hpp"

#if defined(PFORGE_HAVE_AVX2)
#include <immintrin.h>

namespace pforge::kernels {
namespace {

#pragma GCC push_options
#pragma GCC target("avx2")

void over_avx2(float* dst, const float* src, const float* alpha, float mul, std::size_t n) {
  const __m256 m = _mm256_set1_ps(mul);
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 keep = _mm256_sub_ps(one, _mm256_mul_ps(_mm256_loadu_ps(alpha + i), m));
    const __m256 s = _mm256_mul_ps(_mm256_loadu_ps(src + i), m);
    const __m256 d = _mm256_mul_ps(_mm256_loadu_ps(dst + i), keep);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(s, d));
  }
  for (; i < n; ++i) {
    const float keep = 1.0f - alpha[i] * mul;
    dst[i] = src[i] * mul + dst[i] * keep;
  }
}

void mix_avx2(float* dst, const float* a, const float* b, float t, std::size_t n) {
  const float s = 1.0f - t;
  const __m256 vs = _mm256_set1_ps(s);
  const __m256 vt = _mm256_set1_ps(t);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 x = _mm256_mul_ps(_mm256_loadu_ps(a + i), vs);
    const __m256 y = _mm256_mul_ps(_mm256_loadu_ps(b + i), vt);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(x, y));
  }
  for (; i < n; ++i) dst[i] = a[i] * s + b[i] * t;
}

void widen_avx2(float* dst, const std::uint8_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + i));
    _mm256_storeu_ps(dst + i, _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(bytes)));
  }
  for (; i < n; ++i) dst[i] = static_cast<float>(src[i]);
}

__m256i round_clamp_epi32(__m256 x) {
  const __m256 v = _mm256_floor_ps(_mm256_add_ps(x, _mm256_set1_ps(0.5f)));
  const __m256 c = _mm256_min_ps(_mm256_max_ps(v, _mm256_setzero_ps()), _mm256_set1_ps(255.0f));
  return _mm256_cvttps_epi32(c);
}

void quantize_avx2(std::uint8_t* dst, const float* src, std::size_t n) {
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i q0 = round_clamp_epi32(_mm256_loadu_ps(src + i));
    const __m256i q1 = round_clamp_epi32(_mm256_loadu_ps(src + i + 8));
    const __m256i q2 = round_clamp_epi32(_mm256_loadu_ps(src + i + 16));
    const __m256i q3 = round_clamp_epi32(_mm256_loadu_ps(src + i + 24));
    const __m256i w01 = _mm256_packus_epi32(q0, q1);
    const __m256i w23 = _mm256_packus_epi32(q2, q3);
    const __m256i b = _mm256_packus_epi16(w01, w23);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        _mm256_permutevar8x32_epi32(b, order));
  }
  for (; i < n; ++i) {
    float v = std::floor(src[i] + 0.5f);
    v = v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v);
    dst[i] = static_cast<std::uint8_t>(v);
  }
}

void max_u8_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    const auto s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(d, _mm256_max_epu8(_mm256_loadu_si256(d), s));
  }
  for (; i < n; ++i) dst[i] = dst[i] < src[i] ? src[i] : dst[i];
}

/// All-ones double lanes where the four mask bytes at p are nonzero.
__m256d mask_lanes(const std::uint8_t* p) {
  std::uint32_t word;
  __builtin_memcpy(&word, p, 4);
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(word)));
  const __m256i zero = _mm256_cmpeq_epi64(wide, _mm256_setzero_si256());
  return _mm256_castsi256_pd(_mm256_xor_si256(zero, _mm256_set1_epi64x(-1)));
}

double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double masked_sq_diff_avx2(const double* a, const double* b, const std::uint8_t* mask,
                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_mul_pd(d, d), mask_lanes(mask + i)));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    if (!mask[i]) continue;
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double masked_min_dist_avx2(const double* r, const double* g, const double* b,
                            const std::uint8_t* mask, std::size_t n, const double* colors,
                            std::size_t n_colors) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vr = _mm256_loadu_pd(r + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    __m256d best = inf;
    for (std::size_t c = 0; c < n_colors; ++c) {
      const __m256d dr = _mm256_sub_pd(vr, _mm256_set1_pd(colors[3 * c]));
      const __m256d dg = _mm256_sub_pd(vg, _mm256_set1_pd(colors[3 * c + 1]));
      const __m256d db = _mm256_sub_pd(vb, _mm256_set1_pd(colors[3 * c + 2]));
      const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(dg, dg)),
                                       _mm256_mul_pd(db, db));
      best = _mm256_min_pd(best, d2);
    }
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_sqrt_pd(best), mask_lanes(mask + i)));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    if (!mask[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_colors; ++c) {
      const double dr = r[i] - colors[3 * c];
      const double dg = g[i] - colors[3 * c + 1];
      const double db = b[i] - colors[3 * c + 2];
      const double d2 = dr * dr + dg * dg + db * db;
      best = d2 < best ? d2 : best;
    }
    sum += std::sqrt(best);
  }
  return sum;
}

#pragma GCC pop_options

}  // namespace

const Table* avx2_table_impl() {
  static const Table table{"avx2",        over_avx2,     mix_avx2,
                           widen_avx2,    quantize_avx2, max_u8_avx2,
                           masked_sq_diff_avx2, masked_min_dist_avx2};
  return &table;
}

}  // namespace pforge::kernels

#else

namespace pforge::kernels {
const Table* avx2_table_impl() { return nullptr; }
}  // namespace pforge::kernels

#endif
