#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pforge/compositor.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

/// u_k = k / (K - 1).
double frame_param(int k, int K);

/// Transform placing a raster's center on the placement's center.
Transform2D to_transform(const Placement& p);

enum class TrackKind {
  conditioning,  // travels from its scattered start, white box fades out
  fly_in,        // design element entering from off-canvas, no white box
  fading,        // baked into the opening scene, fades out in place
};

struct TrackFrame {
  Transform2D transform;
  double white_box_alpha = 0.0;
  double cutout_alpha = 1.0;
  double shadow_alpha = 0.0;
  double relight_t = 0.0;
};

struct Track {
  std::string object_id;
  TrackKind kind = TrackKind::conditioning;
  /// Compositing slot; ranks follow target z, fading tracks sit below all.
  int rank = 0;
  std::vector<TrackFrame> frames;
};

struct Timeline {
  int K = 0;
  SourceMode mode = SourceMode::manual_design;
  std::vector<Track> tracks;
  std::vector<double> background_fade;
  std::vector<int> supervised_frames;

  const Track* find(const std::string& object_id) const;
};

struct TimelineRequest {
  /// Frame-0 state of every conditioning object (z and relight_t unused).
  std::vector<Placement> initial;
  LayoutTarget target;
  /// Target objects without an initial placement.
  std::vector<std::string> fly_in;
  /// Objects present only in the opening scene, held at these placements.
  std::vector<Placement> fading;
  int K = 9;
  SourceMode mode = SourceMode::manual_design;
  InitialCanvas initial_canvas = InitialCanvas::background;
  Size canvas;
  /// Raster size per fly-in object, used for the off-canvas start.
  std::map<std::string, Size> raster_sizes;
};

Timeline plan_timeline(const TimelineRequest& request);

/// Signed rotation delta from `from` to `to` along the shorter arc. A
/// half-turn tie resolves counter-clockwise (negative in the clockwise-
/// positive screen convention).
double shortest_rotation(double from, double to);

/// Start center for a design element: along the ray from the canvas center
/// through `target`, just far enough for the transformed raster's bounding
/// box to clear the canvas, plus 10% of the canvas diagonal.
Vec2 fly_in_start(const Placement& target, Size raster, Size canvas);

/// Blend of lighting variants (cutout first) at t in [0,1]. Two variants
/// blend premultiplied color and alpha linearly; more than two blend
/// piecewise along the list at t * (m - 1). Endpoints are exact copies.
RgbaImage relight_blend(const std::vector<RgbaImage>& variants, double t);

struct TrackAssets {
  /// Cutout followed by its relit variants.
  std::vector<RgbaImage> variants;
  /// Present for objects that start as an unsegmented white-box image.
  std::shared_ptr<const RgbaImage> white_box;
  std::optional<Shadow> shadow;
};

using AssetMap = std::map<std::string, TrackAssets>;

/// Frame k = mix(initial_canvas, final_background, fade_k) with the track
/// layers composited on top in rank order.
std::vector<RgbImage> render_video(const Timeline& timeline, const AssetMap& assets,
                                   const RgbImage& initial_canvas,
                                   const RgbImage& final_background);

/// Layers of the final composition built straight from the target layout.
std::vector<Layer> target_layers(const LayoutTarget& target, const AssetMap& assets);

/// Shadow layer for an object drawn with `object`: the shadow raster keeps
/// its offset relative to the cutout under the same scale and rotation.
Transform2D shadow_transform(const Transform2D& object, Size cutout, const Shadow& shadow);

struct PairVideo {
  std::vector<RgbImage> frames;
  std::vector<int> supervised_frames;
};

/// Per-pixel crossfade first -> last over K frames; only K-1 is supervised.
PairVideo crossfade_pair(const RgbImage& first, const RgbImage& last, int K);

/// Externally interpolated frames (sorted PNG/JPEG files of `dir`) in place
/// of the crossfade. Checks the frame count and size.
PairVideo load_interpolated_pair(const std::filesystem::path& dir, int K, Size size);

}  // namespace pforge
