#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pforge/detect_clean.hpp"
#include "pforge/image.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

struct ExpectedObject {
  std::string label;
  std::string ref_image;
};

struct EmbeddingPairFiles {
  std::string crops;
  std::string refs;
};

struct EvalCase {
  std::string case_id;
  std::vector<ExpectedObject> expected_objects;
  std::string caption;
  BackgroundKind background_kind = BackgroundKind::plain_color;
  /// plain_color: 1..4 target colors.
  std::vector<Rgb> background_colors;
  /// photo: reference background image.
  std::optional<std::string> background_image;
  std::string generated_image;
  std::optional<std::string> bg_mask;
  std::optional<std::string> detections;
  /// Embeddings from external encoders, row i of crops paired with row i of refs.
  std::optional<EmbeddingPairFiles> clip_i, dino;
  /// {text, image}: one caption and one image embedding.
  std::optional<EmbeddingPairFiles> clip_t;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& rel) const { return base_dir / rel; }
};

/// cases.json: [EvalCase...] or {schema, cases:[...]}.
std::vector<EvalCase> load_eval_cases(const std::filesystem::path& path);

struct Match {
  int expected = -1;
  int detection = -1;
};

struct MissingResult {
  int expected = 0;
  int missing = 0;
  std::vector<Match> matches;
  double rate() const { return static_cast<double>(missing) / expected; }
};

/// Greedy one-to-one matching by descending confidence; a detection counts
/// when its label matches (case-insensitive) and confidence >= threshold.
MissingResult missing_rate(const std::vector<ExpectedObject>& expected,
                           const std::vector<DetectionRecord>& detections, double conf_threshold);

/// Detection box clamped to the image; throws if nothing is left.
Rect clamp_box(const Rect& box, Size image);

struct CropOrder {
  std::string case_id;
  int object_index = 0;
  std::string crop;
  std::string reference;
};

/// Writes one crop PNG per matched object into `crop_dir` and returns the
/// pairs; paths in the result are absolute.
std::vector<CropOrder> prepare_crops(const EvalCase& c, const RgbImage& generated,
                                     const std::vector<DetectionRecord>& detections,
                                     const MissingResult& matched,
                                     const std::filesystem::path& crop_dir);

double cosine(std::span<const float> a, std::span<const float> b);

struct EmbeddingPair {
  std::vector<float> crop;
  std::vector<float> ref;
};

/// Mean cosine over pairs; nullopt for an empty list.
std::optional<double> identity_scores(const std::vector<EmbeddingPair>& pairs);

/// Mean squared difference over masked pixels and channels, channels on [0,1].
double mse_bg(const RgbImage& generated, const RgbImage& reference, const Mask& bg_mask);

/// Same on interleaved RGB values already on [0,1].
double mse_bg_unit(std::span<const double> generated, std::span<const double> reference,
                   const Mask& bg_mask);

/// Mean over masked pixels of the RGB (0-255) distance to the nearest target.
double chamfer_color(const RgbImage& generated, const Mask& bg_mask, std::span<const Rgb> targets);

struct MetricRow {
  std::string case_id;
  BackgroundKind background_kind = BackgroundKind::plain_color;
  int expected = 0;
  std::optional<int> missing;
  std::optional<double> clip_i, dino, clip_t, mse_bg, chamfer;
};

struct MetricSummary {
  std::optional<double> missing, clip_i, dino, clip_t, mse_bg, chamfer;
  int rows = 0;
  int skipped_missing = 0, skipped_clip_i = 0, skipped_dino = 0, skipped_clip_t = 0;
  int skipped_mse_bg = 0, skipped_chamfer = 0;
};

/// Missing micro-averaged over objects, embedding scores macro-averaged over
/// non-null rows, MSE-BG over photo rows, Chamfer over plain-color rows.
MetricSummary aggregate(const std::vector<MetricRow>& rows);

struct Embeddings {
  int dim = 0;
  int count = 0;
  std::string source_tag;
  std::vector<float> values;

  std::span<const float> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

/// Little-endian float32 rows plus `<path>.json` sidecar {dim, count, source_tag}.
Embeddings read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const Embeddings& e);

/// Scores one case from its files.
MetricRow score_case(const EvalCase& c, double conf_threshold);

Json report_json(const std::vector<MetricRow>& rows, const MetricSummary& summary);
std::string report_table(const std::vector<MetricRow>& rows, const MetricSummary& summary);

}  // namespace pforge
