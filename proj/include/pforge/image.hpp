#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pforge/error.hpp"

namespace pforge {

/// Interleaved 8-bit raster with a compile-time channel count.
template <int Channels>
class Image {
 public:
  static constexpr int kChannels = Channels;

  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvariantError("negative image size");
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  std::uint8_t* at(int x, int y) { return data_.data() + index(x, y); }
  const std::uint8_t* at(int x, int y) const { return data_.data() + index(x, y); }

  std::span<std::uint8_t> row(int y) {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_) * Channels};
  }
  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_) * Channels};
  }

  std::span<std::uint8_t> bytes() { return data_; }
  std::span<const std::uint8_t> bytes() const { return data_; }

  void fill(std::span<const std::uint8_t, Channels> value) {
    for (std::size_t i = 0; i < data_.size(); i += Channels)
      std::copy(value.begin(), value.end(), data_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using RgbImage = Image<3>;
using RgbaImage = Image<4>;
using GrayImage = Image<1>;

/// Binary raster; every byte is 0 or 1.
using Mask = Image<1>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Size {
  int width = 0;
  int height = 0;
  bool operator==(const Size&) const = default;
};

/// Half-open integer rectangle [x, x+w) x [y, y+h).
struct Rect {
  int x = 0, y = 0, w = 0, h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  long long area() const { return empty() ? 0 : static_cast<long long>(w) * h; }
  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool operator==(const Rect&) const = default;
};

Rect intersect(const Rect& a, const Rect& b);
bool overlaps(const Rect& a, const Rect& b);
bool contains(const Rect& outer, const Rect& inner);

RgbImage solid_rgb(Size size, Rgb color);

template <int C>
Size size_of(const Image<C>& image) {
  return {image.width(), image.height()};
}

// Mask helpers.
long long mask_area(const Mask& mask);
/// Tight bounding box of the set pixels, or nullopt for an empty mask.
std::optional<Rect> mask_bounds(const Mask& mask);
Mask mask_union(const Mask& a, const Mask& b);
Mask mask_subtract(const Mask& a, const Mask& b);
long long mask_intersection_area(const Mask& a, const Mask& b);
/// Converts a 0/255 grayscale raster to a 0/1 mask (threshold > 127).
Mask mask_from_gray(const GrayImage& gray);
GrayImage mask_to_gray(const Mask& mask);

/// Rounds half away from zero and clamps to [0, 255].
inline std::uint8_t round_to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

}  // namespace pforge
