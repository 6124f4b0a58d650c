#include <algorithm>
#include <cmath>
#include <limits>

#include "pforge/kernels.hpp"

namespace pforge::kernels {
namespace {

void over(float* dst, const float* src, const float* alpha, float mul, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float keep = 1.0f - alpha[i] * mul;
    dst[i] = src[i] * mul + dst[i] * keep;
  }
}

void mix(float* dst, const float* a, const float* b, float t, std::size_t n) {
  const float s = 1.0f - t;
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * s + b[i] * t;
}

void widen(float* dst, const std::uint8_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(src[i]);
}

void quantize(std::uint8_t* dst, const float* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    float v = std::floor(src[i] + 0.5f);
    v = std::min(std::max(v, 0.0f), 255.0f);
    dst[i] = static_cast<std::uint8_t>(v);
  }
}

void max_u8(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::max(dst[i], src[i]);
}

double masked_sq_diff(const double* a, const double* b, const std::uint8_t* mask,
                      std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double masked_min_dist(const double* r, const double* g, const double* b,
                       const std::uint8_t* mask, std::size_t n, const double* colors,
                       std::size_t n_colors) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_colors; ++c) {
      const double dr = r[i] - colors[3 * c];
      const double dg = g[i] - colors[3 * c + 1];
      const double db = b[i] - colors[3 * c + 2];
      best = std::min(best, dr * dr + dg * dg + db * db);
    }
    sum += std::sqrt(best);
  }
  return sum;
}

}  // namespace

const Table& scalar_table() {
  static const Table table{"scalar", over,     mix, widen, quantize, max_u8, masked_sq_diff,
                           masked_min_dist};
  return table;
}

}  // namespace pforge::kernels
