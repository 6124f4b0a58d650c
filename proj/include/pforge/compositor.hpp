#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pforge/geometry.hpp"
#include "pforge/image.hpp"

namespace pforge {

/// Maps a source raster onto the canvas: the source is scaled and rotated
/// about its own center, the center lands on `translation`, and each
/// destination corner is then nudged by `perspective`. Positive rotation is
/// clockwise on screen (y points down).
struct Transform2D {
  double scale = 1.0;
  double rotation_deg = 0.0;
  Vec2 translation;
  CornerOffsets perspective{};

  /// Transform that reproduces a raster of `size` at the canvas origin.
  static Transform2D identity(Size size);
  bool operator==(const Transform2D&) const = default;
};

/// Destination corners (TL, TR, BR, BL) of a source of `source` size.
Quad destination_quad(Size source, const Transform2D& t);

/// Convex with positive area.
bool quad_is_valid(const Quad& q);

/// Premultiplied planar layer covering `region` of the canvas.
/// r/g/b are color * alpha on a 0..255 scale; a is in [0,1].
struct WarpedLayer {
  Rect region;
  std::vector<float> r, g, b, a;

  double alpha_sum() const;
  /// Alpha-weighted centroid in canvas pixel coordinates (pixel centers at +0.5).
  Vec2 alpha_centroid() const;
};

/// Inverse-mapped bilinear resampling into canvas space. `clip` limits the
/// rasterized region (nullopt leaves it unbounded). Throws on a degenerate
/// or non-convex destination quad.
WarpedLayer rasterize(const RgbaImage& source, const Transform2D& t,
                      std::optional<Rect> clip = std::nullopt);

/// Straight-alpha RGBA result of warping onto an `out_size` canvas; outside
/// the source maps to alpha 0. The identity transform is pixel-exact.
RgbaImage warp(const RgbaImage& source, const Transform2D& t, Size out_size);

struct Layer {
  std::shared_ptr<const RgbaImage> raster;
  Transform2D transform;
  double alpha_mul = 1.0;
  int z = 0;
};

/// Planar float RGB accumulator for one frame.
class FrameCanvas {
 public:
  explicit FrameCanvas(const RgbImage& background);

  Size size() const { return size_; }

  /// this = this * (1 - t) + other * t.
  void mix_towards(const FrameCanvas& other, float t);

  /// Standard "over" of a warped layer scaled by alpha_mul.
  void composite(const WarpedLayer& layer, float alpha_mul);
  void composite(const Layer& layer);

  RgbImage to_rgb() const;

 private:
  Size size_;
  std::vector<float> planes_[3];
};

/// Over-composites layers onto the background in ascending z. Throws on
/// z ties or alpha_mul outside [0,1].
RgbImage composite_frame(const RgbImage& background, std::vector<Layer> layers);

/// Opaque white box around the cutout, grown by round(padding_frac * size)
/// per side, with the cutout composited centered on it.
RgbaImage white_box_embed(const RgbaImage& cutout, double padding_frac);

/// Seeded rejection sampling of non-overlapping, fully in-canvas rects.
/// Returns rect centers in input order. Throws InvariantError when an item
/// cannot fit the canvas, PlacementError when max_tries is exhausted.
std::vector<Vec2> scatter_layout(std::span<const Size> items, Size canvas, std::uint64_t seed,
                                 int max_tries);

/// Integer rect of `size` centered on `center` as produced by scatter_layout.
Rect rect_around(Vec2 center, Size size);

struct Light {
  /// Azimuth the light comes from; 0 = from the right, 90 = from above.
  double direction_deg = 135.0;
  double elevation_deg = 45.0;
};

struct ShadowParams {
  int blur_px = 6;
  double opacity = 0.5;
  /// Cap on horizontal shift per pixel of height (cot(elevation) grows fast).
  double max_shear = 2.0;
  /// Vertical squash of the sheared silhouette.
  double flatten = 0.25;
};

struct Shadow {
  RgbaImage raster;
  /// Top-left of `raster` relative to the cutout's top-left.
  Vec2 offset;
  /// Displacement of the shadow's alpha centroid from the silhouette's.
  Vec2 cast;
};

/// Heuristic cast shadow: sheared silhouette, flattened onto the ground
/// line at the silhouette's bottom edge, box-blurred, filled black.
Shadow render_shadow(const RgbaImage& cutout, const Light& light, const ShadowParams& params);

/// Float plane used by the shadow stages.
struct FloatPlane {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  double sum() const;
};

/// Shear stage of render_shadow on its own: each row is shifted right by
/// `shear` pixels per row of height above the silhouette's bottom row.
/// `x_origin` receives the plane's x offset relative to the cutout.
FloatPlane shear_silhouette(const RgbaImage& cutout, double shear, int* x_origin);

}  // namespace pforge
