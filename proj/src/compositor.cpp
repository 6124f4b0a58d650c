#include "pforge/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "pforge/kernels.hpp"
#include "pforge/rng.hpp"

namespace pforge {
namespace {

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

bool has_perspective(const Transform2D& t) {
  for (const auto& o : t.perspective)
    if (o.x != 0.0 || o.y != 0.0) return true;
  return false;
}

/// Source -> canvas point map and its inverse for one transform.
class PointMap {
 public:
  PointMap(Size source, const Transform2D& t) : t_(t) {
    if (!(t.scale > 0.0)) throw InvariantError("transform scale must be > 0");
    half_ = {source.width / 2.0, source.height / 2.0};
    const double th = deg_to_rad(t.rotation_deg);
    cos_ = std::cos(th);
    sin_ = std::sin(th);
    perspective_ = has_perspective(t);
    if (!perspective_) return;

    const Quad dst = destination_quad(source, t);
    const Vec2 src[4] = {{0, 0},
                         {double(source.width), 0},
                         {double(source.width), double(source.height)},
                         {0, double(source.height)}};
    Eigen::Matrix<double, 8, 8> A;
    Eigen::Matrix<double, 8, 1> rhs;
    for (int i = 0; i < 4; ++i) {
      const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
      A.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
      A.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
      rhs(2 * i) = u;
      rhs(2 * i + 1) = v;
    }
    const Eigen::Matrix<double, 8, 1> h = A.fullPivLu().solve(rhs);
    forward_ << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
    inverse_ = forward_.inverse();
  }

  Vec2 to_canvas(Vec2 s) const {
    if (perspective_) {
      const Eigen::Vector3d q = forward_ * Eigen::Vector3d(s.x, s.y, 1.0);
      return {q.x() / q.z(), q.y() / q.z()};
    }
    const double dx = (s.x - half_.x) * t_.scale;
    const double dy = (s.y - half_.y) * t_.scale;
    return {cos_ * dx - sin_ * dy + t_.translation.x, sin_ * dx + cos_ * dy + t_.translation.y};
  }

  /// Returns false for points on the far side of the horizon.
  bool to_source(Vec2 p, Vec2& s) const {
    if (perspective_) {
      const Eigen::Vector3d q = inverse_ * Eigen::Vector3d(p.x, p.y, 1.0);
      if (!(q.z() > 0.0)) return false;
      s = {q.x() / q.z(), q.y() / q.z()};
      return true;
    }
    const double dx = p.x - t_.translation.x;
    const double dy = p.y - t_.translation.y;
    s = {(cos_ * dx + sin_ * dy) / t_.scale + half_.x, (-sin_ * dx + cos_ * dy) / t_.scale + half_.y};
    return true;
  }

 private:
  Transform2D t_;
  Vec2 half_;
  double cos_ = 1.0, sin_ = 0.0;
  bool perspective_ = false;
  Eigen::Matrix3d forward_ = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inverse_ = Eigen::Matrix3d::Identity();
};

}  // namespace

Transform2D Transform2D::identity(Size size) {
  Transform2D t;
  t.translation = {size.width / 2.0, size.height / 2.0};
  return t;
}

Quad destination_quad(Size source, const Transform2D& t) {
  const double hw = source.width / 2.0;
  const double hh = source.height / 2.0;
  const Vec2 corners[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
  const double th = deg_to_rad(t.rotation_deg);
  const double c = std::cos(th), s = std::sin(th);
  Quad q;
  for (int i = 0; i < 4; ++i) {
    const double x = corners[i].x * t.scale;
    const double y = corners[i].y * t.scale;
    q[i] = Vec2{c * x - s * y, s * x + c * y} + t.translation + t.perspective[i];
  }
  return q;
}

bool quad_is_valid(const Quad& q) {
  double sign = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double z = cross(q[(i + 1) % 4] - q[i], q[(i + 2) % 4] - q[(i + 1) % 4]);
    if (std::fabs(z) < 1e-12) return false;
    if (sign == 0.0) sign = z;
    else if ((z > 0) != (sign > 0)) return false;
  }
  double area = 0.0;
  for (int i = 0; i < 4; ++i) area += cross(q[i], q[(i + 1) % 4]);
  return std::fabs(area) > 1e-9;
}

double WarpedLayer::alpha_sum() const {
  double s = 0.0;
  for (float v : a) s += v;
  return s;
}

Vec2 WarpedLayer::alpha_centroid() const {
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (int y = 0; y < region.h; ++y)
    for (int x = 0; x < region.w; ++x) {
      const double v = a[static_cast<std::size_t>(y) * region.w + x];
      s += v;
      sx += v * (region.x + x + 0.5);
      sy += v * (region.y + y + 0.5);
    }
  if (s == 0.0) return {NAN, NAN};
  return {sx / s, sy / s};
}

WarpedLayer rasterize(const RgbaImage& source, const Transform2D& t, std::optional<Rect> clip) {
  if (source.empty()) throw InvariantError("cannot warp an empty raster");
  const Size src_size = size_of(source);
  if (!quad_is_valid(destination_quad(src_size, t)))
    throw InvariantError("degenerate or non-convex destination quadrilateral");
  const PointMap map(src_size, t);

  // Bilinear support extends half a pixel beyond the source rect.
  const Vec2 grown[4] = {{-0.5, -0.5},
                         {src_size.width + 0.5, -0.5},
                         {src_size.width + 0.5, src_size.height + 0.5},
                         {-0.5, src_size.height + 0.5}};
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& g : grown) {
    const Vec2 p = map.to_canvas(g);
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  Rect region{static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0)), 0, 0};
  region.w = static_cast<int>(std::ceil(x1)) - region.x;
  region.h = static_cast<int>(std::ceil(y1)) - region.y;
  if (clip) region = intersect(region, *clip);

  WarpedLayer out;
  out.region = region;
  if (region.empty()) {
    out.region.w = out.region.h = 0;
    return out;
  }
  const std::size_t n = static_cast<std::size_t>(region.w) * region.h;
  out.r.assign(n, 0.0f);
  out.g.assign(n, 0.0f);
  out.b.assign(n, 0.0f);
  out.a.assign(n, 0.0f);

  // Premultiplied source planes.
  const int sw = src_size.width, sh = src_size.height;
  std::vector<double> pr(source.pixel_count()), pg(pr.size()), pb(pr.size()), pa(pr.size());
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const std::uint8_t* s = source.bytes().data() + 4 * i;
    const double al = s[3] / 255.0;
    pa[i] = al;
    pr[i] = s[0] * al;
    pg[i] = s[1] * al;
    pb[i] = s[2] * al;
  }

  for (int y = 0; y < region.h; ++y) {
    for (int x = 0; x < region.w; ++x) {
      Vec2 s;
      if (!map.to_source({region.x + x + 0.5, region.y + y + 0.5}, s)) continue;
      const double fx = s.x - 0.5;
      const double fy = s.y - 0.5;
      if (fx <= -1.0 || fy <= -1.0 || fx >= sw || fy >= sh) continue;
      const int ix = static_cast<int>(std::floor(fx));
      const int iy = static_cast<int>(std::floor(fy));
      const double wx = fx - ix;
      const double wy = fy - iy;
      double acc_r = 0, acc_g = 0, acc_b = 0, acc_a = 0;
      const int tx[4] = {ix, ix + 1, ix, ix + 1};
      const int ty[4] = {iy, iy, iy + 1, iy + 1};
      const double tw[4] = {(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy};
      for (int k = 0; k < 4; ++k) {
        if (tw[k] == 0.0 || tx[k] < 0 || ty[k] < 0 || tx[k] >= sw || ty[k] >= sh) continue;
        const std::size_t si = static_cast<std::size_t>(ty[k]) * sw + tx[k];
        acc_r += tw[k] * pr[si];
        acc_g += tw[k] * pg[si];
        acc_b += tw[k] * pb[si];
        acc_a += tw[k] * pa[si];
      }
      const std::size_t di = static_cast<std::size_t>(y) * region.w + x;
      out.r[di] = static_cast<float>(acc_r);
      out.g[di] = static_cast<float>(acc_g);
      out.b[di] = static_cast<float>(acc_b);
      out.a[di] = static_cast<float>(acc_a);
    }
  }
  return out;
}

RgbaImage warp(const RgbaImage& source, const Transform2D& t, Size out_size) {
  const WarpedLayer layer = rasterize(source, t, Rect{0, 0, out_size.width, out_size.height});
  RgbaImage out(out_size.width, out_size.height);
  for (int y = 0; y < layer.region.h; ++y) {
    for (int x = 0; x < layer.region.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * layer.region.w + x;
      const double al = layer.a[i];
      std::uint8_t* p = out.at(layer.region.x + x, layer.region.y + y);
      p[3] = round_to_u8(al * 255.0);
      if (al <= 0.0) continue;
      p[0] = round_to_u8(layer.r[i] / al);
      p[1] = round_to_u8(layer.g[i] / al);
      p[2] = round_to_u8(layer.b[i] / al);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

FrameCanvas::FrameCanvas(const RgbImage& background) : size_(size_of(background)) {
  const std::size_t n = background.pixel_count();
  std::vector<std::uint8_t> channel(n);
  const auto& k = kernels::active();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) channel[i] = background.bytes()[3 * i + c];
    planes_[c].resize(n);
    k.widen(planes_[c].data(), channel.data(), n);
  }
}

void FrameCanvas::mix_towards(const FrameCanvas& other, float t) {
  if (other.size_ != size_) throw InvariantError("canvas size mismatch");
  const auto& k = kernels::active();
  for (int c = 0; c < 3; ++c)
    k.mix(planes_[c].data(), planes_[c].data(), other.planes_[c].data(), t, planes_[c].size());
}

void FrameCanvas::composite(const WarpedLayer& layer, float alpha_mul) {
  if (!(alpha_mul >= 0.0f && alpha_mul <= 1.0f)) throw InvariantError("alpha_mul must be in [0,1]");
  const Rect vis = intersect(layer.region, Rect{0, 0, size_.width, size_.height});
  if (vis.empty() || alpha_mul == 0.0f) return;
  const auto& k = kernels::active();
  const std::vector<float>* src[3] = {&layer.r, &layer.g, &layer.b};
  for (int y = vis.y; y < vis.bottom(); ++y) {
    const std::size_t so =
        static_cast<std::size_t>(y - layer.region.y) * layer.region.w + (vis.x - layer.region.x);
    const std::size_t dof = static_cast<std::size_t>(y) * size_.width + vis.x;
    for (int c = 0; c < 3; ++c)
      k.over(planes_[c].data() + dof, src[c]->data() + so, layer.a.data() + so, alpha_mul,
             static_cast<std::size_t>(vis.w));
  }
}

void FrameCanvas::composite(const Layer& layer) {
  if (!layer.raster) throw InvariantError("layer without raster");
  if (!(layer.alpha_mul >= 0.0 && layer.alpha_mul <= 1.0))
    throw InvariantError("alpha_mul must be in [0,1]");
  if (layer.alpha_mul == 0.0) return;
  composite(rasterize(*layer.raster, layer.transform, Rect{0, 0, size_.width, size_.height}),
            static_cast<float>(layer.alpha_mul));
}

RgbImage FrameCanvas::to_rgb() const {
  const std::size_t n = static_cast<std::size_t>(size_.width) * size_.height;
  RgbImage out(size_.width, size_.height);
  std::vector<std::uint8_t> q(n);
  const auto& k = kernels::active();
  for (int c = 0; c < 3; ++c) {
    k.quantize(q.data(), planes_[c].data(), n);
    for (std::size_t i = 0; i < n; ++i) out.bytes()[3 * i + c] = q[i];
  }
  return out;
}

RgbImage composite_frame(const RgbImage& background, std::vector<Layer> layers) {
  std::stable_sort(layers.begin(), layers.end(),
                   [](const Layer& a, const Layer& b) { return a.z < b.z; });
  for (std::size_t i = 1; i < layers.size(); ++i)
    if (layers[i].z == layers[i - 1].z)
      throw InvariantError("z-order tie at z=" + std::to_string(layers[i].z));
  FrameCanvas canvas(background);
  for (const auto& layer : layers) canvas.composite(layer);
  return canvas.to_rgb();
}

// ---------------------------------------------------------------------------

RgbaImage white_box_embed(const RgbaImage& cutout, double padding_frac) {
  if (cutout.empty()) throw InvariantError("cannot embed an empty cutout");
  if (!(padding_frac >= 0.0 && padding_frac <= 0.5))
    throw InvariantError("padding_frac must be in [0,0.5]");
  const int px = static_cast<int>(std::lround(padding_frac * cutout.width()));
  const int py = static_cast<int>(std::lround(padding_frac * cutout.height()));
  RgbaImage box(cutout.width() + 2 * px, cutout.height() + 2 * py, 255);
  for (int y = 0; y < cutout.height(); ++y)
    for (int x = 0; x < cutout.width(); ++x) {
      const std::uint8_t* s = cutout.at(x, y);
      std::uint8_t* d = box.at(x + px, y + py);
      const double al = s[3] / 255.0;
      for (int c = 0; c < 3; ++c) d[c] = round_to_u8(s[c] * al + 255.0 * (1.0 - al));
    }
  return box;
}

Rect rect_around(Vec2 center, Size size) {
  return {static_cast<int>(std::lround(center.x - size.width / 2.0)),
          static_cast<int>(std::lround(center.y - size.height / 2.0)), size.width, size.height};
}

std::vector<Vec2> scatter_layout(std::span<const Size> items, Size canvas, std::uint64_t seed,
                                 int max_tries) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].width <= 0 || items[i].height <= 0)
      throw InvariantError("scatter item " + std::to_string(i) + " has no area");
    if (items[i].width > canvas.width || items[i].height > canvas.height)
      throw InvariantError("scatter item " + std::to_string(i) + " does not fit the canvas");
  }
  Rng rng(derive_seed(seed, "scatter"));
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<Rect> placed;
  std::vector<Vec2> centers(items.size());
  for (std::size_t idx : order) {
    const Size s = items[idx];
    bool ok = false;
    for (int attempt = 0; attempt < max_tries && !ok; ++attempt) {
      const Rect r{static_cast<int>(rng.between(0, canvas.width - s.width)),
                   static_cast<int>(rng.between(0, canvas.height - s.height)), s.width, s.height};
      ok = std::none_of(placed.begin(), placed.end(),
                        [&](const Rect& p) { return overlaps(p, r); });
      if (ok) {
        placed.push_back(r);
        centers[idx] = {r.x + s.width / 2.0, r.y + s.height / 2.0};
      }
    }
    if (!ok)
      throw PlacementError("could not place scatter item " + std::to_string(idx) + " after " +
                           std::to_string(max_tries) + " tries");
  }
  return centers;
}

// ---------------------------------------------------------------------------

double FloatPlane::sum() const {
  double s = 0.0;
  for (float v : values) s += v;
  return s;
}

namespace {

int bottom_row(const RgbaImage& cutout) {
  for (int y = cutout.height() - 1; y >= 0; --y)
    for (int x = 0; x < cutout.width(); ++x)
      if (cutout.at(x, y)[3] > 0) return y;
  return -1;
}

}  // namespace

FloatPlane shear_silhouette(const RgbaImage& cutout, double shear, int* x_origin) {
  FloatPlane out;
  const int base = bottom_row(cutout);
  if (x_origin) *x_origin = 0;
  if (base < 0) return out;
  const double lo = std::min(0.0, shear * base);
  const double hi = std::max(0.0, shear * base);
  const int origin = static_cast<int>(std::floor(lo));
  out.width = cutout.width() + static_cast<int>(std::ceil(hi)) - origin + 1;
  out.height = base + 1;
  out.values.assign(static_cast<std::size_t>(out.width) * out.height, 0.0f);
  for (int y = 0; y <= base; ++y) {
    const double shift = shear * (base - y) - origin;
    const int i = static_cast<int>(std::floor(shift));
    const double f = shift - i;
    float* row = out.values.data() + static_cast<std::size_t>(y) * out.width;
    for (int x = 0; x < cutout.width(); ++x) {
      const double v = cutout.at(x, y)[3] / 255.0;
      if (v == 0.0) continue;
      row[x + i] += static_cast<float>((1.0 - f) * v);
      row[x + i + 1] += static_cast<float>(f * v);
    }
  }
  if (x_origin) *x_origin = origin;
  return out;
}

Shadow render_shadow(const RgbaImage& cutout, const Light& light, const ShadowParams& params) {
  if (!(light.elevation_deg > 0.0)) throw InvariantError("light elevation must be > 0 degrees");
  if (!(params.opacity > 0.0 && params.opacity <= 1.0))
    throw InvariantError("shadow opacity must be in (0,1]");
  if (params.blur_px < 0) throw InvariantError("shadow blur must be non-negative");
  if (!(params.flatten > 0.0 && params.flatten <= 1.0))
    throw InvariantError("shadow flatten must be in (0,1]");

  Shadow shadow;
  const int base = bottom_row(cutout);
  if (base < 0) {
    shadow.raster = RgbaImage(cutout.width(), cutout.height());
    return shadow;
  }

  // Cast away from the light: a light on the left throws the shadow right.
  const double cot = 1.0 / std::tan(deg_to_rad(std::min(light.elevation_deg, 90.0)));
  const double shear = std::min(cot, params.max_shear) * -std::cos(deg_to_rad(light.direction_deg));
  int origin = 0;
  const FloatPlane sheared = shear_silhouette(cutout, shear, &origin);

  // Flatten towards the base row with area-weighted resampling.
  const double f = params.flatten;
  const int rows = static_cast<int>(std::ceil(sheared.height * f));
  const int w = sheared.width;
  std::vector<double> flat(static_cast<std::size_t>(w) * rows, 0.0);
  for (int h = 0; h < sheared.height; ++h) {
    const int src_y = base - h;
    const double lo = h * f, hi = (h + 1) * f;
    for (int j = static_cast<int>(std::floor(lo)); j < rows && j < hi; ++j) {
      const double overlap = std::min(hi, j + 1.0) - std::max(lo, static_cast<double>(j));
      if (overlap <= 0.0) continue;
      const float* src = sheared.values.data() + static_cast<std::size_t>(src_y) * w;
      double* dst = flat.data() + static_cast<std::size_t>(rows - 1 - j) * w;
      for (int x = 0; x < w; ++x) dst[x] += overlap * src[x];
    }
  }

  // Separable box blur, padded so no mass is lost.
  const int r = params.blur_px;
  const int bw = w + 2 * r, bh = rows + 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(bw) * rows, 0.0);
  const double norm = 1.0 / (2 * r + 1);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = flat[static_cast<std::size_t>(y) * w + x] * norm;
      if (v == 0.0) continue;
      for (int d = 0; d <= 2 * r; ++d) tmp[static_cast<std::size_t>(y) * bw + x + d] += v;
    }
  std::vector<double> blurred(static_cast<std::size_t>(bw) * bh, 0.0);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < bw; ++x) {
      const double v = tmp[static_cast<std::size_t>(y) * bw + x] * norm;
      if (v == 0.0) continue;
      for (int d = 0; d <= 2 * r; ++d) blurred[static_cast<std::size_t>(y + d) * bw + x] += v;
    }

  shadow.raster = RgbaImage(bw, bh);
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (int y = 0; y < bh; ++y)
    for (int x = 0; x < bw; ++x) {
      const double v = std::min(1.0, blurred[static_cast<std::size_t>(y) * bw + x]);
      const std::uint8_t a = round_to_u8(255.0 * params.opacity * v);
      shadow.raster.at(x, y)[3] = a;
      s += a;
      sx += a * (x + 0.5);
      sy += a * (y + 0.5);
    }
  shadow.offset = {static_cast<double>(origin - r), static_cast<double>(base - (rows - 1) - r)};

  double cs = 0.0, cx = 0.0, cy = 0.0;
  for (int y = 0; y < cutout.height(); ++y)
    for (int x = 0; x < cutout.width(); ++x) {
      const double a = cutout.at(x, y)[3];
      cs += a;
      cx += a * (x + 0.5);
      cy += a * (y + 0.5);
    }
  if (s > 0.0)
    shadow.cast = {sx / s + shadow.offset.x - cx / cs, sy / s + shadow.offset.y - cy / cs};
  return shadow;
}

}  // namespace pforge
