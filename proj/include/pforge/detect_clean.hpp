#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pforge/image.hpp"

namespace pforge {

/// One grounded detection from an external detector + segmenter.
struct DetectionRecord {
  std::string label;
  double confidence = 0.0;
  Rect box;
  Mask mask;
};

/// Builds a record and checks its invariants: nonempty mask, box equal to
/// the tight bounds of the mask, confidence in [0,1].
DetectionRecord make_detection(std::string label, double confidence, Mask mask);

struct CleanedObject {
  std::string label;
  Mask mask;
  double confidence = 0.0;
  /// Input indices merged into this object.
  std::vector<int> sources;
};

struct Rejection {
  std::string reason;
  std::vector<int> indices;
};

struct CleanedObjectSet {
  Size image_size;
  std::vector<CleanedObject> objects;
  std::vector<Rejection> rejected;
};

struct CleanParams {
  double min_cov = 0.005;
  double max_cov = 0.80;
  double dup_iou = 0.85;
  double containment_frac = 0.5;
};

/// Cleans raw detections in a fixed order:
///   1. same-label merge (case-insensitive; mask union, max confidence)
///   2. cross-label dedup (IoU >= dup_iou keeps the more confident record)
///   3. overlap separation (a smaller mask covering >= containment_frac of
///      its area inside a larger one is subtracted from the larger one;
///      lesser overlaps are removed from the smaller mask)
///   4. coverage gate, inclusive on both ends
/// An empty `objects` list means the image should be dropped.
CleanedObjectSet clean_detections(const std::vector<DetectionRecord>& records, Size image_size,
                                  const CleanParams& params = {});

/// Square dilation (radius `dilation_px`) of the union of all object masks.
Mask inpaint_mask(const CleanedObjectSet& cleaned, int dilation_px = 50);

/// Square dilation of a single mask, clipped to its bounds.
Mask dilate_square(const Mask& mask, int radius);

/// Tight RGBA crop of `image` under `mask`; alpha 255 inside, 0 outside.
RgbaImage extract_cutout(const RgbImage& image, const Mask& mask);

/// Reads `detections.json` ([{label, confidence, box:[x,y,w,h], mask_path}],
/// optionally wrapped as {schema, detections:[...]}); masks are gray PNGs
/// resolved against the file's directory.
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);

}  // namespace pforge
