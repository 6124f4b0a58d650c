#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pforge/captions.hpp"
#include "pforge/compositor.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

struct AugmentProbs {
  double scene = 0.20;
  double design = 0.10;
  double replace = 0.07;
};

struct JitterRanges {
  double scale_lo = 0.7, scale_hi = 1.3;
  double rotation_lo = -15.0, rotation_hi = 15.0;
  /// Largest corner offset as a fraction of the box size per axis.
  double perspective_frac = 0.05;
};

struct Jitter {
  double scale_mul = 1.0;
  double rotation_deg = 0.0;
  /// Corner offsets as fractions of the box width (x) and height (y).
  CornerOffsets perspective_frac{};
  bool operator==(const Jitter&) const = default;
};

/// Uniform independent draws per component.
Jitter sample_jitter(std::uint64_t seed, const JitterRanges& ranges);

/// Jitter applied to an object drawn at `base_scale` from a raster of
/// `raster` size; the result has no translation.
Transform2D jitter_transform(const Jitter& j, double base_scale, Size raster);

struct Replacement {
  std::string victim_id;
  std::string substitute_id;
  bool operator==(const Replacement&) const = default;
};

/// Background pools in draw order.
inline constexpr std::array<BackgroundKind, 3> kBackgroundPools = {
    BackgroundKind::photo, BackgroundKind::plain_color, BackgroundKind::procedural};

struct AugmentationPlan {
  std::map<std::string, Jitter> jitter;
  /// Set only for aleatory backgrounds.
  std::optional<BackgroundKind> bg_pool_choice;
  std::vector<std::string> scene_completion;
  std::vector<std::string> design_elements;
  std::optional<Replacement> replacement;
  bool operator==(const AugmentationPlan&) const = default;
};

Json to_json(const AugmentationPlan& plan);
AugmentationPlan parse_augmentation_plan(const Json& j);

struct AugmentConfig {
  AugmentProbs probs;
  JitterRanges jitter;
  /// Weights over kBackgroundPools.
  std::array<double, 3> bg_pool_weights{1.0, 1.0, 1.0};
};

/// Draws the gates in a fixed order from one stream: scene completion (a
/// uniform nonempty proper subset, needs N >= 2), then design elements per
/// remaining object, then replacement only when nothing was selected.
/// Jitter and pool choice use their own streams.
AugmentationPlan sample_augmentations(const SampleSpec& spec, const AugmentConfig& config,
                                      const std::vector<ObjectAsset>& substitute_pool,
                                      std::uint64_t seed);

struct PlacedAsset {
  ObjectAsset asset;
  Placement placement;
};

struct AppliedSample {
  /// Objects and target of the animated part; the substitute takes the
  /// victim's slot and list position.
  SampleSpec spec;
  /// Conditioning images in caption order.
  std::vector<std::string> conditioning_ids;
  std::vector<std::string> fly_in_ids;
  /// Scene-completion objects drawn into every background state.
  std::vector<PlacedAsset> baked;
  /// Replacement victim shown in the opening scene.
  std::optional<PlacedAsset> fading;
  /// Unwrapped caption text (design elements, edit note).
  std::vector<std::string> extras;
};

/// Applies a plan. Scene-completion descriptions are appended to the
/// background description with a coarse position phrase.
AppliedSample apply_plan(const SampleSpec& spec, const AugmentationPlan& plan,
                         const std::vector<ObjectAsset>& substitute_pool);

/// Caption directives for an applied sample.
CaptionDirectives caption_directives(const AppliedSample& applied);

/// "top left", "center", "bottom right", ... by canvas thirds.
std::string position_phrase(Vec2 center, Size canvas);

}  // namespace pforge
