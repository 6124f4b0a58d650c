#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pforge/geometry.hpp"
#include "pforge/image.hpp"

namespace pforge {

using Json = nlohmann::json;

inline constexpr std::string_view kSchema = "placid-forge/1";

/// Throws SchemaError unless `value` is "placid-forge/<1>[.minor]".
void check_schema_version(const Json& doc, std::string_view where);

enum class SourceMode { in_the_wild, manual_design, subject_pair, side_by_side };
enum class BackgroundKind { photo, plain_color, procedural, inpainted_original };
enum class InitialCanvas { background, plain_white };

std::string_view to_string(SourceMode mode);
std::string_view to_string(BackgroundKind kind);
SourceMode parse_source_mode(std::string_view text);
BackgroundKind parse_background_kind(std::string_view text);

struct RealDims {
  double width_m = 0.0;
  double height_m = 0.0;
  double depth_m = 0.0;
  bool operator==(const RealDims&) const = default;
};

/// Paths are kept exactly as written in the manifest (relative to it).
struct ObjectAsset {
  std::string id;
  std::string label;
  std::string description;
  std::string cutout;
  std::optional<RealDims> real_dims;
  std::vector<std::string> relit_variants;
  bool operator==(const ObjectAsset&) const = default;
};

struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::plain_color;
  std::optional<std::string> photo_path;
  std::optional<Rgb> color;
  std::optional<std::uint64_t> procedural_seed;
  std::string description;
  /// Draw the background from the augmentation pools instead of `kind`.
  bool aleatory = false;
  bool operator==(const BackgroundSpec&) const = default;

  static BackgroundSpec plain_white(std::string description = {});
};

struct Placement {
  std::string object_id;
  Vec2 center;
  double scale = 1.0;
  double rotation_deg = 0.0;
  CornerOffsets perspective{};
  int z = 0;
  double relight_t = 0.0;
  bool operator==(const Placement&) const = default;
};

struct LayoutTarget {
  std::vector<Placement> placements;

  const Placement* find(std::string_view object_id) const;
  bool operator==(const LayoutTarget&) const = default;
};

/// Inputs of the paired-image source: a catalog shot and a contextual shot.
struct SubjectPair {
  std::string first;
  std::string last;
  double confidence_first = 0.0;
  double confidence_last = 0.0;
  /// Optional directory of K externally interpolated frames.
  std::optional<std::string> interpolated_frames;
  bool operator==(const SubjectPair&) const = default;
};

struct SampleSpec {
  std::string sample_id;
  SourceMode source_mode = SourceMode::manual_design;
  std::vector<ObjectAsset> objects;
  BackgroundSpec background;
  LayoutTarget target;
  std::string caption_template_id;
  int K = 9;
  Size canvas{512, 512};
  std::uint64_t seed = 0;
  InitialCanvas initial_canvas = InitialCanvas::background;
  std::optional<SubjectPair> pair;
  /// Absolute directory all relative paths resolve against.
  std::filesystem::path base_dir;

  const ObjectAsset* find_object(std::string_view id) const;
  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  bool operator==(const SampleSpec&) const = default;
};

/// Largest object count the canvas is considered to hold (one 32x32 cell each).
int canvas_feasible_count(Size canvas);

// JSON conversion. Parsing checks structure and field-level invariants;
// validate_spec covers cross-field and on-disk asset invariants.
Json to_json(const ObjectAsset& asset);
Json to_json(const BackgroundSpec& background);
Json to_json(const Placement& placement);
Json to_json(const SampleSpec& spec);
ObjectAsset parse_object_asset(const Json& j, const std::string& where);
BackgroundSpec parse_background(const Json& j, const std::string& where);
Placement parse_placement(const Json& j, const std::string& where);
SampleSpec parse_sample_spec(const Json& doc, const std::filesystem::path& base_dir);

/// Throws InvariantError (or SchemaError for dangling references).
/// With check_assets, also opens every referenced raster.
void validate_spec(const SampleSpec& spec, bool check_assets);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

SampleSpec load_sample_spec(const std::filesystem::path& path);
void write_sample_spec(const SampleSpec& spec, const std::filesystem::path& path);

/// Asset registry file: {schema, assets:[ObjectAsset...]}.
struct AssetRegistry {
  std::vector<ObjectAsset> assets;
  std::filesystem::path base_dir;
};
AssetRegistry load_asset_registry(const std::filesystem::path& path);

/// Everything one generated sample writes to disk.
struct SampleOutput {
  std::string sample_id;
  std::vector<RgbImage> frames;
  RgbImage first_frame;
  std::vector<RgbImage> object_images;
  std::optional<RgbImage> background;
  std::string caption;
  std::vector<int> supervised_frames;
  /// Spec, resolved seed, augmentation plan and config; written verbatim
  /// (plus layout fields) to provenance.json.
  Json provenance;
};

std::string frame_filename(int index);

/// Writes `<dir>/<sample_id>/...` and returns that directory. Refuses a
/// non-empty target unless `overwrite`.
std::filesystem::path write_sample(const SampleOutput& output, const std::filesystem::path& dir,
                                   bool overwrite = false);

Json read_provenance(const std::filesystem::path& sample_dir);

/// Empty iff the directory satisfies every SampleOutput invariant for `spec`.
std::vector<std::string> validate_output(const std::filesystem::path& sample_dir,
                                         const SampleSpec& spec);

}  // namespace pforge
