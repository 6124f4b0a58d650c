#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pforge/geometry.hpp"
#include "pforge/image.hpp"
#include "pforge/manifest.hpp"

namespace pforge {

struct SizeRecord {
  std::string object_id;
  double feature = 0.0;
};

/// log of the bounding-box diagonal in meters.
double size_feature(const RealDims& dims);

struct KMeansParams {
  int k = 3;
  int max_iter = 100;
  double tol = 1e-9;
  /// Independent k-means++ restarts; the lowest SSE wins.
  int n_init = 10;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<double> centroids;
  double sse = 0.0;
  /// SSE after every Lloyd iteration of the winning restart.
  std::vector<double> sse_history;
  int iterations = 0;
};

/// 1-D Lloyd with k-means++ seeding. Empty clusters take the point
/// farthest from its centroid; identical features leave them empty.
KMeansResult kmeans_sizes(const std::vector<SizeRecord>& records, std::uint64_t seed,
                          const KMeansParams& params = {});

/// Within-cluster sum of squares of a labelling.
double partition_sse(const std::vector<double>& values, const std::vector<int>& assignments);

struct SideBySideScale {
  std::array<double, 2> pixel_heights{};
  /// Cutout scale factors reaching those heights.
  std::array<double, 2> scales{};
};

/// Pixel heights proportional to real heights, with the largest constant
/// that fits both cutouts next to each other inside the margin-shrunk canvas.
SideBySideScale relative_scale(const std::array<const ObjectAsset*, 2>& pair,
                               const std::array<Size, 2>& cutouts, Size canvas, double margin_frac);

/// Centers for the scaled pair: shared baseline on the bottom margin,
/// leftover width split evenly before, between and after the pair.
std::array<Vec2, 2> side_by_side_centers(const SideBySideScale& s, const std::array<Size, 2>& cutouts,
                                         Size canvas, double margin_frac);

}  // namespace pforge
