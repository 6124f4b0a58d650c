#include "pforge/background_synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pforge/image_io.hpp"
#include "pforge/rng.hpp"

namespace fs = std::filesystem;

namespace pforge {
namespace {

double wrap_hue(double h) {
  h = std::fmod(h, 360.0);
  return h < 0 ? h + 360.0 : h;
}

/// Piecewise-linear palette lookup with evenly spaced stops.
Rgb palette_at(const std::vector<Rgb>& palette, double t) {
  const std::size_t n = palette.size();
  if (n == 1) return palette[0];
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * static_cast<double>(n - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(s), n - 2);
  const double f = s - static_cast<double>(i);
  const Rgb& a = palette[i];
  const Rgb& b = palette[i + 1];
  return {round_to_u8(lerp(a.r, b.r, f)), round_to_u8(lerp(a.g, b.g, f)),
          round_to_u8(lerp(a.b, b.b, f))};
}

void check_plan(const ProceduralBackgroundPlan& plan) {
  if (plan.palette.empty()) throw InvariantError("background palette is empty");
  if (plan.primitive == Primitive::radial_gradient && !(plan.radius > 0))
    throw InvariantError("radial gradient radius must be positive");
  if (plan.primitive == Primitive::block_texture && plan.block_size_px <= 0)
    throw InvariantError("block size must be positive");
}

}  // namespace

Rgb hsv_to_rgb(const Hsv& hsv) {
  const double h = wrap_hue(hsv.h) / 60.0;
  const double c = hsv.v * hsv.s;
  const double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  const double m = hsv.v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {round_to_u8((r + m) * 255.0), round_to_u8((g + m) * 255.0), round_to_u8((b + m) * 255.0)};
}

Palette sample_palette(std::uint64_t seed, int n) {
  if (n < 2 || n > 4) throw InvariantError("palette size must be in [2,4]");
  Rng rng(derive_seed(seed, "palette"));
  Palette p;
  const double base = rng.uniform01() * 360.0;
  p.rule = rng.bernoulli(0.5) ? HarmonyRule::analogous : HarmonyRule::complementary;
  for (int i = 0; i < n; ++i) {
    double hue = base;
    if (i > 0) hue = p.rule == HarmonyRule::analogous ? base + (i % 2 ? 30.0 : -30.0) : base + 180.0;
    hue = wrap_hue(hue);
    const double s = rng.uniform(0.2, 0.8);
    const double v = rng.uniform(0.3, 0.95);
    p.hues.push_back(hue);
    p.colors.push_back(hsv_to_rgb({hue, s, v}));
  }
  return p;
}

ProceduralBackgroundPlan sample_background_plan(std::uint64_t seed, Size canvas) {
  Rng rng(derive_seed(seed, "background-plan"));
  ProceduralBackgroundPlan plan;
  plan.primitive = static_cast<Primitive>(rng.below(3));
  const int n = static_cast<int>(rng.between(2, 4));
  plan.palette = sample_palette(derive_seed(seed, "background-palette"), n).colors;
  plan.angle_deg = rng.uniform01() * 360.0;
  plan.center = {rng.uniform(0.0, canvas.width), rng.uniform(0.0, canvas.height)};
  const double diag = std::hypot(canvas.width, canvas.height);
  plan.radius = rng.uniform(0.3, 1.0) * diag;
  static constexpr int kBlocks[] = {8, 16, 32, 64};
  plan.block_size_px = kBlocks[rng.below(4)];
  return plan;
}

RgbImage synth_background(const ProceduralBackgroundPlan& plan, Size size, std::uint64_t seed) {
  if (size.width <= 0 || size.height <= 0) throw InvariantError("zero-size canvas");
  check_plan(plan);
  RgbImage out(size.width, size.height);
  auto put = [&](int x, int y, Rgb c) {
    std::uint8_t* p = out.at(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  };

  switch (plan.primitive) {
    case Primitive::linear_gradient: {
      const double th = deg_to_rad(plan.angle_deg);
      const double dx = std::cos(th);
      const double dy = std::sin(th);
      const double xs[2] = {0.0, static_cast<double>(size.width - 1)};
      const double ys[2] = {0.0, static_cast<double>(size.height - 1)};
      double lo = INFINITY, hi = -INFINITY;
      for (double x : xs)
        for (double y : ys) {
          lo = std::min(lo, x * dx + y * dy);
          hi = std::max(hi, x * dx + y * dy);
        }
      const double span = hi - lo;
      for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x) {
          const double t = span > 1e-12 ? (x * dx + y * dy - lo) / span : 0.0;
          put(x, y, palette_at(plan.palette, t));
        }
      break;
    }
    case Primitive::radial_gradient: {
      for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x) {
          const double d = std::hypot(x - plan.center.x, y - plan.center.y);
          put(x, y, palette_at(plan.palette, d / plan.radius));
        }
      break;
    }
    case Primitive::block_texture: {
      Rng rng(derive_seed(seed, "blocks"));
      const int bs = plan.block_size_px;
      const int nbx = (size.width + bs - 1) / bs;
      const int nby = (size.height + bs - 1) / bs;
      for (int by = 0; by < nby; ++by)
        for (int bx = 0; bx < nbx; ++bx) {
          const Rgb c = plan.palette[rng.below(plan.palette.size())];
          for (int y = by * bs; y < std::min(size.height, (by + 1) * bs); ++y)
            for (int x = bx * bs; x < std::min(size.width, (bx + 1) * bs); ++x) put(x, y, c);
        }
      break;
    }
  }
  return out;
}

Rgb random_plain_color(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "plain-color"));
  const auto r = static_cast<std::uint8_t>(rng.below(256));
  const auto g = static_cast<std::uint8_t>(rng.below(256));
  const auto b = static_cast<std::uint8_t>(rng.below(256));
  return {r, g, b};
}

std::vector<fs::path> list_photo_pool(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("photo pool is not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

RgbImage center_crop_resize(const RgbImage& image, Size size) {
  if (size.width <= 0 || size.height <= 0) throw InvariantError("zero-size canvas");
  if (image.empty()) throw InvariantError("cannot resize an empty image");
  if (size_of(image) == size) return image;
  const double target = static_cast<double>(size.width) / size.height;
  const double source = static_cast<double>(image.width()) / image.height();
  double cw = image.width(), ch = image.height();
  if (source > target) cw = ch * target;
  else ch = cw / target;
  const double x0 = (image.width() - cw) / 2.0;
  const double y0 = (image.height() - ch) / 2.0;

  RgbImage out(size.width, size.height);
  for (int y = 0; y < size.height; ++y) {
    const double sy = std::clamp(y0 + (y + 0.5) * ch / size.height - 0.5, 0.0,
                                 static_cast<double>(image.height() - 1));
    const int iy = std::min(static_cast<int>(sy), image.height() - 1);
    const int iy1 = std::min(iy + 1, image.height() - 1);
    const double fy = sy - iy;
    for (int x = 0; x < size.width; ++x) {
      const double sx = std::clamp(x0 + (x + 0.5) * cw / size.width - 0.5, 0.0,
                                   static_cast<double>(image.width() - 1));
      const int ix = std::min(static_cast<int>(sx), image.width() - 1);
      const int ix1 = std::min(ix + 1, image.width() - 1);
      const double fx = sx - ix;
      for (int c = 0; c < 3; ++c) {
        const double top = lerp(image.at(ix, iy)[c], image.at(ix1, iy)[c], fx);
        const double bot = lerp(image.at(ix, iy1)[c], image.at(ix1, iy1)[c], fx);
        out.at(x, y)[c] = round_to_u8(lerp(top, bot, fy));
      }
    }
  }
  return out;
}

RgbImage pick_background(const BackgroundSpec& spec, const fs::path& base_dir,
                         const BackgroundPools& pools, Size canvas, std::uint64_t seed) {
  switch (spec.kind) {
    case BackgroundKind::plain_color:
      if (!spec.color) throw InvariantError("plain_color background without a color");
      return solid_rgb(canvas, *spec.color);
    case BackgroundKind::procedural: {
      const std::uint64_t s = spec.procedural_seed.value_or(seed);
      return synth_background(sample_background_plan(s, canvas), canvas, s);
    }
    case BackgroundKind::photo: {
      if (spec.photo_path) return center_crop_resize(io::read_rgb(base_dir / *spec.photo_path), canvas);
      if (!pools.photo_dir) throw InvariantError("photo background requested but no photo pool configured");
      const auto files = list_photo_pool(*pools.photo_dir);
      if (files.empty()) throw InvariantError("photo pool is empty: " + pools.photo_dir->string());
      Rng rng(derive_seed(seed, "photo-pool"));
      return center_crop_resize(io::read_rgb(files[rng.below(files.size())]), canvas);
    }
    case BackgroundKind::inpainted_original: {
      if (!spec.photo_path) throw InvariantError("inpainted_original background without a file");
      auto img = io::read_rgb(base_dir / *spec.photo_path);
      if (size_of(img) != canvas)
        throw InvariantError("inpainted background size does not match the canvas");
      return img;
    }
  }
  throw InvariantError("unknown background kind");
}

}  // namespace pforge
