#include "pforge/image.hpp"

namespace pforge {

Rect intersect(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

bool overlaps(const Rect& a, const Rect& b) { return !intersect(a, b).empty(); }

bool contains(const Rect& outer, const Rect& inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

RgbImage solid_rgb(Size size, Rgb color) {
  RgbImage image(size.width, size.height);
  const std::uint8_t px[3] = {color.r, color.g, color.b};
  image.fill(std::span<const std::uint8_t, 3>(px));
  return image;
}

long long mask_area(const Mask& mask) {
  long long n = 0;
  for (auto v : mask.bytes()) n += v != 0;
  return n;
}

std::optional<Rect> mask_bounds(const Mask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    auto row = mask.row(y);
    for (int x = 0; x < mask.width(); ++x) {
      if (!row[x]) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace {

void require_same_size(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw InvariantError("mask size mismatch");
}

}  // namespace

Mask mask_union(const Mask& a, const Mask& b) {
  require_same_size(a, b);
  Mask out(a.width(), a.height());
  auto o = out.bytes();
  auto pa = a.bytes();
  auto pb = b.bytes();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (pa[i] | pb[i]) ? 1 : 0;
  return out;
}

Mask mask_subtract(const Mask& a, const Mask& b) {
  require_same_size(a, b);
  Mask out(a.width(), a.height());
  auto o = out.bytes();
  auto pa = a.bytes();
  auto pb = b.bytes();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (pa[i] && !pb[i]) ? 1 : 0;
  return out;
}

long long mask_intersection_area(const Mask& a, const Mask& b) {
  require_same_size(a, b);
  long long n = 0;
  auto pa = a.bytes();
  auto pb = b.bytes();
  for (std::size_t i = 0; i < pa.size(); ++i) n += (pa[i] && pb[i]);
  return n;
}

Mask mask_from_gray(const GrayImage& gray) {
  Mask out(gray.width(), gray.height());
  auto o = out.bytes();
  auto g = gray.bytes();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = g[i] > 127 ? 1 : 0;
  return out;
}

GrayImage mask_to_gray(const Mask& mask) {
  GrayImage out(mask.width(), mask.height());
  auto o = out.bytes();
  auto m = mask.bytes();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = m[i] ? 255 : 0;
  return out;
}

}  // namespace pforge
