#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pforge/geometry.hpp"
#include "pforge/image.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

enum class Primitive { linear_gradient, radial_gradient, block_texture };
enum class HarmonyRule { analogous, complementary };

struct Hsv {
  double h = 0.0;  // degrees in [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

Rgb hsv_to_rgb(const Hsv& hsv);

struct Palette {
  std::vector<Rgb> colors;
  /// Hues before quantization to 8-bit RGB, parallel to `colors`.
  std::vector<double> hues;
  HarmonyRule rule = HarmonyRule::analogous;
};

/// 2..4 colors around a uniform base hue: the rest sit at +-30 degrees
/// (analogous) or +180 degrees (complementary); S in [0.2,0.8], V in [0.3,0.95].
Palette sample_palette(std::uint64_t seed, int n);

struct ProceduralBackgroundPlan {
  Primitive primitive = Primitive::linear_gradient;
  std::vector<Rgb> palette;
  double angle_deg = 0.0;  // linear
  Vec2 center;             // radial
  double radius = 1.0;     // radial
  int block_size_px = 16;  // blocks
};

/// Seeded choice of primitive, palette and parameters for a canvas.
ProceduralBackgroundPlan sample_background_plan(std::uint64_t seed, Size canvas);

RgbImage synth_background(const ProceduralBackgroundPlan& plan, Size size, std::uint64_t seed);

/// Uniform random RGB color for the plain-color pool.
Rgb random_plain_color(std::uint64_t seed);

struct BackgroundPools {
  std::optional<std::filesystem::path> photo_dir;
};

/// PNG/JPEG files of a pool directory, sorted by file name bytes.
std::vector<std::filesystem::path> list_photo_pool(const std::filesystem::path& dir);

/// Center-crop to the target aspect, then bilinear rescale. Same-size
/// inputs are returned unchanged.
RgbImage center_crop_resize(const RgbImage& image, Size size);

/// Materializes a background spec on a canvas. Relative paths resolve
/// against `base_dir`.
RgbImage pick_background(const BackgroundSpec& spec, const std::filesystem::path& base_dir,
                         const BackgroundPools& pools, Size canvas, std::uint64_t seed);

}  // namespace pforge
