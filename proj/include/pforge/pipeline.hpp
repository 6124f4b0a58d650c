#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pforge/augment.hpp"
#include "pforge/captions.hpp"
#include "pforge/compositor.hpp"
#include "pforge/detect_clean.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

struct GenerationConfig {
  AugmentConfig augment;
  /// Frame count for specs that leave K out.
  int K = 9;
  Light light;
  ShadowParams shadow;
  CleanParams clean;
  int dilation_px = 50;
  double conf_threshold = 0.35;
  int workers = 1;
  std::uint64_t global_seed = 0;
  double white_box_padding = 0.1;
  int scatter_max_tries = 200;
  int max_shrinks = 3;
  double side_by_side_margin = 0.05;
  double pair_min_confidence = 0.55;
  /// Absolute after loading; relative entries resolve against the config file.
  std::optional<std::filesystem::path> photo_pool;
  std::optional<std::filesystem::path> substitute_pool;
  std::optional<std::filesystem::path> templates;
};

/// Throws SchemaError/InvariantError on unknown keys or bad values.
GenerationConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
GenerationConfig load_config(const std::filesystem::path& path);
Json to_json(const GenerationConfig& cfg);
void validate_config(const GenerationConfig& cfg);

/// Shared read-only inputs of a batch.
struct Resources {
  std::vector<ObjectAsset> substitute_pool;
  std::vector<CaptionTemplate> templates;
};
Resources load_resources(const GenerationConfig& cfg);

/// Stable per-sample seed from the global seed, the sample id and the
/// spec's own seed field.
std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& sample_id,
                          std::uint64_t spec_seed);

/// Renders one sample. `seed` is the resolved sample seed.
SampleOutput build_sample(const SampleSpec& spec, const GenerationConfig& cfg, const Resources& res,
                          std::uint64_t seed);

/// Parses a spec file, filling K from the config when absent.
SampleSpec load_spec_for_batch(const std::filesystem::path& path, const GenerationConfig& cfg);

struct BatchFailure {
  std::string manifest;
  std::string reason;
};

struct BatchSummary {
  int built = 0;
  int failed = 0;
  std::vector<BatchFailure> failures;
  double elapsed_s = 0.0;
};

/// Builds every *.json spec of `manifest_dir` into `out_dir` with
/// cfg.workers threads and writes `out_dir/summary.json`. Output bytes do
/// not depend on the worker count.
BatchSummary run_batch(const std::filesystem::path& manifest_dir, const std::filesystem::path& out_dir,
                       const GenerationConfig& cfg);

/// Rebuilds a sample from its provenance.json alone.
SampleOutput regenerate(const std::filesystem::path& sample_dir);

}  // namespace pforge
