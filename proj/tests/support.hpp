#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pforge/image.hpp"
#include "pforge/image_io.hpp"
#include "pforge/manifest.hpp"
#include "pforge/rng.hpp"

namespace pforge {
namespace fs = std::filesystem;
}

namespace pforge::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("pforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline RgbaImage solid_rgba(int w, int h, Rgb c, std::uint8_t alpha = 255) {
  RgbaImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t* p = img.at(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
      p[3] = alpha;
    }
  return img;
}

/// Opaque ellipse inscribed in the raster, transparent corners.
inline RgbaImage ellipse_rgba(int w, int h, Rgb c) {
  RgbaImage img(w, h);
  const double cx = w / 2.0, cy = h / 2.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = (x + 0.5 - cx) / cx, dy = (y + 0.5 - cy) / cy;
      if (dx * dx + dy * dy > 1.0) continue;
      std::uint8_t* p = img.at(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
      p[3] = 255;
    }
  return img;
}

inline Mask rect_mask(Size s, Rect r) {
  Mask m(s.width, s.height);
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) *m.at(x, y) = 1;
  return m;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// FNV-1a over sorted relative paths and file bytes.
inline std::uint64_t tree_hash(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    all += f.generic_string();
    all.push_back('\0');
    all += slurp(root / f);
    all.push_back('\0');
  }
  return fnv1a64(all);
}

struct SpecRecipe {
  int n_objects = 3;
  Size canvas{256, 256};
  int K = 9;
  SourceMode mode = SourceMode::manual_design;
  InitialCanvas initial = InitialCanvas::background;
  BackgroundSpec background;
  /// Ellipses (point symmetric) instead of rects.
  bool ellipses = true;
  bool relit = false;
};

/// Writes cutouts under `dir` and returns a random, valid spec using them.
inline SampleSpec random_spec(const fs::path& dir, std::uint64_t seed, const SpecRecipe& r) {
  Rng rng(seed);
  SampleSpec s;
  s.sample_id = "s" + std::to_string(seed);
  s.source_mode = r.mode;
  s.K = r.K;
  s.canvas = r.canvas;
  s.seed = seed;
  s.initial_canvas = r.initial;
  s.base_dir = dir;
  s.caption_template_id = "studio-" + std::to_string(r.n_objects);
  s.background = r.background;
  if (s.background.kind == BackgroundKind::plain_color && !s.background.color)
    s.background.color = Rgb{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                             static_cast<std::uint8_t>(rng.below(256))};
  if (s.background.description.empty()) s.background.description = "a plain studio backdrop";
  std::vector<int> zs;
  for (int i = 0; i < r.n_objects; ++i) zs.push_back(i * 3 - 2);
  rng.shuffle(zs);
  for (int i = 0; i < r.n_objects; ++i) {
    ObjectAsset a;
    a.id = "o" + std::to_string(i);
    a.label = "thing" + std::to_string(i);
    a.description = "a colorful thing number " + std::to_string(i);
    const int w = static_cast<int>(rng.between(12, 40)), h = static_cast<int>(rng.between(12, 40));
    const Rgb c{static_cast<std::uint8_t>(rng.between(20, 235)), static_cast<std::uint8_t>(rng.between(20, 235)),
                static_cast<std::uint8_t>(rng.between(20, 235))};
    a.cutout = s.sample_id + "_" + a.id + ".png";
    io::write_png(dir / a.cutout, r.ellipses ? testing::ellipse_rgba(w, h, c) : testing::solid_rgba(w, h, c));
    if (r.relit) {
      a.relit_variants.push_back(s.sample_id + "_" + a.id + "_lit.png");
      const Rgb lit{static_cast<std::uint8_t>(255 - c.r), c.g, static_cast<std::uint8_t>(255 - c.b)};
      io::write_png(dir / a.relit_variants.back(), r.ellipses ? testing::ellipse_rgba(w, h, lit) : testing::solid_rgba(w, h, lit));
    }
    a.real_dims = RealDims{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
    s.objects.push_back(a);
    Placement p;
    p.object_id = a.id;
    p.center = {rng.uniform(30, r.canvas.width - 30), rng.uniform(30, r.canvas.height - 30)};
    p.scale = rng.uniform(0.8, 1.6);
    p.rotation_deg = rng.uniform(-40, 40);
    for (auto& c2 : p.perspective) c2 = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    p.z = zs[i];
    p.relight_t = r.relit ? rng.uniform01() : 0.0;
    s.target.placements.push_back(p);
  }
  return s;
}

}  // namespace pforge::testing
