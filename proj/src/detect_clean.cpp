#include "pforge/detect_clean.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "pforge/image_io.hpp"
#include "pforge/kernels.hpp"
#include "pforge/manifest.hpp"

namespace fs = std::filesystem;

namespace pforge {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string percent(double frac) {
  std::ostringstream os;
  os << frac * 100.0;
  return os.str();
}

struct Working {
  std::string label;
  Mask mask;
  double confidence;
  std::vector<int> sources;
  long long area;
};

double iou(const Working& a, const Working& b) {
  const long long inter = mask_intersection_area(a.mask, b.mask);
  const long long uni = a.area + b.area - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void check_param(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0))
    throw InvariantError(std::string("clean parameter ") + name + " must lie in (0,1)");
}

}  // namespace

DetectionRecord make_detection(std::string label, double confidence, Mask mask) {
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw InvariantError("detection confidence must be in [0,1]");
  auto bounds = mask_bounds(mask);
  if (!bounds) throw InvariantError("detection '" + label + "' has an empty mask");
  return {std::move(label), confidence, *bounds, std::move(mask)};
}

CleanedObjectSet clean_detections(const std::vector<DetectionRecord>& records, Size image_size,
                                  const CleanParams& params) {
  check_param(params.min_cov, "min_cov");
  check_param(params.max_cov, "max_cov");
  check_param(params.dup_iou, "dup_iou");
  check_param(params.containment_frac, "containment_frac");
  if (!(params.min_cov < params.max_cov)) throw InvariantError("min_cov must be below max_cov");
  for (const auto& r : records)
    if (size_of(r.mask) != image_size) throw InvariantError("mask size mismatch");

  CleanedObjectSet out;
  out.image_size = image_size;

  // (1) same-label merge, groups ordered by first appearance.
  std::vector<Working> items;
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    const auto& r = records[i];
    const auto key = lower(r.label);
    auto it = std::find_if(items.begin(), items.end(),
                           [&](const Working& w) { return lower(w.label) == key; });
    if (it == items.end()) {
      items.push_back({r.label, r.mask, r.confidence, {i}, 0});
    } else {
      it->mask = mask_union(it->mask, r.mask);
      it->confidence = std::max(it->confidence, r.confidence);
      it->sources.push_back(i);
    }
  }
  for (auto& w : items) w.area = mask_area(w.mask);

  // (2) cross-label dedup, most confident first.
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].confidence > items[b].confidence;
  });
  std::vector<bool> alive(items.size(), true);
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool duplicate = false;
    for (std::size_t k : kept) {
      if (iou(items[idx], items[k]) >= params.dup_iou) {
        out.rejected.push_back({"duplicate of '" + items[k].label + "'", items[idx].sources});
        duplicate = true;
        break;
      }
    }
    if (duplicate) alive[idx] = false;
    else kept.push_back(idx);
  }
  std::vector<Working> survivors;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (alive[i]) survivors.push_back(std::move(items[i]));

  // (3) overlap separation, smallest first.
  std::vector<std::size_t> by_area(survivors.size());
  std::iota(by_area.begin(), by_area.end(), 0);
  std::stable_sort(by_area.begin(), by_area.end(), [&](std::size_t a, std::size_t b) {
    return survivors[a].area < survivors[b].area;
  });
  for (std::size_t a = 0; a < by_area.size(); ++a) {
    for (std::size_t b = a + 1; b < by_area.size(); ++b) {
      Working& small = survivors[by_area[a]];
      Working& large = survivors[by_area[b]];
      const long long small_area = mask_area(small.mask);
      if (small_area == 0) break;
      const long long inter = mask_intersection_area(small.mask, large.mask);
      if (inter == 0) continue;
      if (static_cast<double>(inter) >= params.containment_frac * static_cast<double>(small_area))
        large.mask = mask_subtract(large.mask, small.mask);
      else
        small.mask = mask_subtract(small.mask, large.mask);
    }
  }

  // (4) coverage gate; small tolerance so exact boundary counts pass.
  const double total = static_cast<double>(image_size.width) * image_size.height;
  const double eps = 1e-9;
  for (auto& w : survivors) {
    const double cov = static_cast<double>(mask_area(w.mask)) / total;
    if (cov < params.min_cov - eps) {
      out.rejected.push_back({"coverage<" + percent(params.min_cov) + "%", w.sources});
    } else if (cov > params.max_cov + eps) {
      out.rejected.push_back({"coverage>" + percent(params.max_cov) + "%", w.sources});
    } else {
      out.objects.push_back({w.label, std::move(w.mask), w.confidence, w.sources});
    }
  }
  return out;
}

Mask dilate_square(const Mask& mask, int radius) {
  if (radius < 0) throw InvariantError("dilation radius must be non-negative");
  const int w = mask.width();
  const int h = mask.height();
  if (radius == 0 || mask.empty()) return mask;
  const auto& k = kernels::active();

  Mask rows = mask;
  const int rx = std::min(radius, w - 1);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* src = mask.row(y).data();
    std::uint8_t* dst = rows.row(y).data();
    for (int d = 1; d <= rx; ++d) {
      k.max_u8(dst, src + d, static_cast<std::size_t>(w - d));
      k.max_u8(dst + d, src, static_cast<std::size_t>(w - d));
    }
  }

  Mask out = rows;
  const int ry = std::min(radius, h - 1);
  const std::size_t stride = static_cast<std::size_t>(w);
  std::uint8_t* dst = out.bytes().data();
  const std::uint8_t* src = rows.bytes().data();
  for (int d = 1; d <= ry; ++d) {
    const std::size_t n = stride * static_cast<std::size_t>(h - d);
    k.max_u8(dst, src + stride * d, n);
    k.max_u8(dst + stride * d, src, n);
  }
  return out;
}

Mask inpaint_mask(const CleanedObjectSet& cleaned, int dilation_px) {
  if (cleaned.objects.empty()) throw InvariantError("inpaint mask requires at least one object");
  Mask uni = cleaned.objects.front().mask;
  for (std::size_t i = 1; i < cleaned.objects.size(); ++i)
    uni = mask_union(uni, cleaned.objects[i].mask);
  return dilate_square(uni, dilation_px);
}

RgbaImage extract_cutout(const RgbImage& image, const Mask& mask) {
  if (size_of(image) != size_of(mask)) throw InvariantError("mask and image sizes differ");
  const auto bounds = mask_bounds(mask);
  if (!bounds) throw InvariantError("cannot extract a cutout from an empty mask");
  RgbaImage out(bounds->w, bounds->h);
  for (int y = 0; y < bounds->h; ++y) {
    for (int x = 0; x < bounds->w; ++x) {
      const int sx = bounds->x + x;
      const int sy = bounds->y + y;
      std::uint8_t* p = out.at(x, y);
      if (*mask.at(sx, sy)) {
        const std::uint8_t* s = image.at(sx, sy);
        p[0] = s[0];
        p[1] = s[1];
        p[2] = s[2];
        p[3] = 255;
      }
    }
  }
  return out;
}

std::vector<DetectionRecord> load_detections(const fs::path& path) {
  Json doc = read_json(path);
  if (doc.is_object()) {
    check_schema_version(doc, "detections");
    doc = doc.at("detections");
  }
  if (!doc.is_array()) throw SchemaError("detections: expected an array");
  const fs::path base = path.parent_path();
  std::vector<DetectionRecord> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& d = doc[i];
    const auto where = "detections[" + std::to_string(i) + "]";
    try {
      const auto label = d.at("label").get<std::string>();
      const double conf = d.at("confidence").get<double>();
      const auto mask_rel = d.at("mask_path").get<std::string>();
      if (fs::path(mask_rel).is_absolute())
        throw SchemaError(where + ".mask_path: absolute path not allowed");
      auto rec = make_detection(label, conf, mask_from_gray(io::read_gray(base / mask_rel)));
      if (d.contains("box")) {
        const Json& b = d["box"];
        if (!b.is_array() || b.size() != 4) throw SchemaError(where + ".box: expected [x,y,w,h]");
        const Rect given{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
        if (given != rec.box) throw InvariantError(where + ".box does not match mask bounds");
      }
      out.push_back(std::move(rec));
    } catch (const Json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pforge
