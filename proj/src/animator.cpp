#include "pforge/animator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pforge/background_synth.hpp"
#include "pforge/image_io.hpp"

namespace pforge {
namespace {

constexpr int kShadowZ = -3000000;
constexpr int kFadingZ = -2000000;

/// Ranks placements by ascending z.
std::map<std::string, int> z_ranks(const LayoutTarget& target) {
  std::vector<const Placement*> order;
  for (const auto& p : target.placements) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const Placement* a, const Placement* b) { return a->z < b->z; });
  std::map<std::string, int> ranks;
  for (std::size_t i = 0; i < order.size(); ++i) ranks[order[i]->object_id] = static_cast<int>(i);
  return ranks;
}

Transform2D lerp_transform(const Transform2D& a, const Transform2D& b, double u) {
  Transform2D t;
  t.translation = lerp(a.translation, b.translation, u);
  t.scale = lerp(a.scale, b.scale, u);
  t.rotation_deg = a.rotation_deg + shortest_rotation(a.rotation_deg, b.rotation_deg) * u;
  for (int i = 0; i < 4; ++i) t.perspective[i] = lerp(a.perspective[i], b.perspective[i], u);
  return t;
}

const TrackAssets& assets_for(const AssetMap& assets, const std::string& id) {
  auto it = assets.find(id);
  if (it == assets.end()) throw InvariantError("no render assets for object '" + id + "'");
  if (it->second.variants.empty()) throw InvariantError("object '" + id + "' has no cutout");
  return it->second;
}

Layer shadow_layer(const TrackAssets& a, const Transform2D& object, double alpha, int rank) {
  Layer l;
  l.raster = std::make_shared<const RgbaImage>(a.shadow->raster);
  l.transform = shadow_transform(object, size_of(a.variants.front()), *a.shadow);
  l.alpha_mul = alpha;
  l.z = kShadowZ + rank;
  return l;
}

}  // namespace

double frame_param(int k, int K) {
  if (K < 2) throw InvariantError("K must be ≥ 2");
  return static_cast<double>(k) / static_cast<double>(K - 1);
}

Transform2D to_transform(const Placement& p) {
  Transform2D t;
  t.translation = p.center;
  t.scale = p.scale;
  t.rotation_deg = p.rotation_deg;
  t.perspective = p.perspective;
  return t;
}

const Track* Timeline::find(const std::string& object_id) const {
  for (const auto& t : tracks)
    if (t.object_id == object_id) return &t;
  return nullptr;
}

double shortest_rotation(double from, double to) {
  double d = std::fmod(to - from, 360.0);
  if (d > 180.0) d -= 360.0;
  else if (d <= -180.0) d += 360.0;
  if (d == 180.0) d = -180.0;
  return d;
}

Vec2 fly_in_start(const Placement& target, Size raster, Size canvas) {
  const Quad q = destination_quad(raster, to_transform(target));
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& c : q) {
    x0 = std::min(x0, c.x);
    y0 = std::min(y0, c.y);
    x1 = std::max(x1, c.x);
    y1 = std::max(y1, c.y);
  }
  const double W = canvas.width, H = canvas.height;
  Vec2 dir = target.center - Vec2{W / 2.0, H / 2.0};
  const double len = norm(dir);
  dir = len > 1e-9 ? dir * (1.0 / len) : Vec2{0.0, -1.0};

  // Distance along dir after which the box clears one canvas edge.
  double d = INFINITY;
  if (dir.x > 1e-12) d = std::min(d, (W - x0) / dir.x);
  if (dir.x < -1e-12) d = std::min(d, x1 / -dir.x);
  if (dir.y > 1e-12) d = std::min(d, (H - y0) / dir.y);
  if (dir.y < -1e-12) d = std::min(d, y1 / -dir.y);
  d = std::max(d, 0.0) + 0.1 * std::hypot(W, H);
  return target.center + dir * d;
}

Timeline plan_timeline(const TimelineRequest& req) {
  if (req.K < 2) throw InvariantError("K must be ≥ 2");
  const int K = req.K;

  std::set<std::string> target_ids, initial_ids, fly_ids;
  for (const auto& p : req.target.placements) target_ids.insert(p.object_id);
  for (const auto& p : req.initial) {
    if (!initial_ids.insert(p.object_id).second)
      throw InvariantError("duplicate initial placement for '" + p.object_id + "'");
    if (!target_ids.count(p.object_id))
      throw InvariantError("object '" + p.object_id + "' has an initial but no target placement");
  }
  for (const auto& id : req.fly_in) {
    if (initial_ids.count(id)) throw InvariantError("fly-in object '" + id + "' has an initial placement");
    if (!target_ids.count(id)) throw InvariantError("fly-in object '" + id + "' has no target placement");
    fly_ids.insert(id);
  }
  for (const auto& id : target_ids)
    if (!initial_ids.count(id) && !fly_ids.count(id))
      throw InvariantError("object '" + id + "' has a target but no initial placement");

  Timeline tl;
  tl.K = K;
  tl.mode = req.mode;
  for (int k = 0; k < K; ++k) {
    tl.background_fade.push_back(req.initial_canvas == InitialCanvas::plain_white ? frame_param(k, K)
                                                                                   : 1.0);
    if (req.mode != SourceMode::subject_pair) tl.supervised_frames.push_back(k);
  }
  if (req.mode == SourceMode::subject_pair) tl.supervised_frames = {K - 1};

  const auto ranks = z_ranks(req.target);
  for (const auto& p : req.target.placements) {
    Track track;
    track.object_id = p.object_id;
    track.kind = fly_ids.count(p.object_id) ? TrackKind::fly_in : TrackKind::conditioning;
    track.rank = ranks.at(p.object_id);
    const Transform2D end = to_transform(p);
    Transform2D start;
    if (track.kind == TrackKind::fly_in) {
      auto it = req.raster_sizes.find(p.object_id);
      if (it == req.raster_sizes.end())
        throw InvariantError("fly-in object '" + p.object_id + "' lacks a raster size");
      start = end;
      start.translation = fly_in_start(p, it->second, req.canvas);
    } else {
      const auto& init = *std::find_if(req.initial.begin(), req.initial.end(),
                                       [&](const Placement& q) { return q.object_id == p.object_id; });
      start = to_transform(init);
    }
    for (int k = 0; k < K; ++k) {
      const double u = frame_param(k, K);
      TrackFrame f;
      f.transform = k == K - 1 ? end : lerp_transform(start, end, u);
      f.white_box_alpha = 1.0 - u;
      f.cutout_alpha = 1.0;
      f.shadow_alpha = u;
      f.relight_t = lerp(0.0, p.relight_t, u);
      track.frames.push_back(f);
    }
    tl.tracks.push_back(std::move(track));
  }

  for (std::size_t i = 0; i < req.fading.size(); ++i) {
    const auto& p = req.fading[i];
    if (target_ids.count(p.object_id))
      throw InvariantError("fading object '" + p.object_id + "' also has a target placement");
    Track track;
    track.object_id = p.object_id;
    track.kind = TrackKind::fading;
    track.rank = static_cast<int>(i);
    for (int k = 0; k < K; ++k) {
      const double u = frame_param(k, K);
      TrackFrame f;
      f.transform = to_transform(p);
      f.white_box_alpha = 0.0;
      f.cutout_alpha = 1.0 - u;
      f.relight_t = p.relight_t;
      track.frames.push_back(f);
    }
    tl.tracks.push_back(std::move(track));
  }
  return tl;
}

RgbaImage relight_blend(const std::vector<RgbaImage>& variants, double t) {
  if (variants.empty()) throw InvariantError("relight_blend needs at least one variant");
  if (!(t >= 0.0 && t <= 1.0)) throw InvariantError("relight t must be in [0,1]");
  for (const auto& v : variants)
    if (size_of(v) != size_of(variants.front()))
      throw InvariantError("relit variant dimensions differ from the cutout");
  const std::size_t m = variants.size();
  if (m == 1 || t == 0.0) return variants.front();
  if (t == 1.0) return variants.back();
  const double s = t * static_cast<double>(m - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(s), m - 2);
  const double f = s - static_cast<double>(i);
  if (f == 0.0) return variants[i];

  const RgbaImage& A = variants[i];
  const RgbaImage& B = variants[i + 1];
  RgbaImage out(A.width(), A.height());
  for (std::size_t p = 0; p < A.pixel_count(); ++p) {
    const std::uint8_t* a = A.bytes().data() + 4 * p;
    const std::uint8_t* b = B.bytes().data() + 4 * p;
    std::uint8_t* o = out.bytes().data() + 4 * p;
    const double aa = a[3] / 255.0, ba = b[3] / 255.0;
    const double al = lerp(aa, ba, f);
    o[3] = round_to_u8(al * 255.0);
    if (al <= 0.0) continue;
    for (int c = 0; c < 3; ++c) o[c] = round_to_u8(lerp(a[c] * aa, b[c] * ba, f) / al);
  }
  return out;
}

Transform2D shadow_transform(const Transform2D& object, Size cutout, const Shadow& shadow) {
  const Vec2 d{shadow.offset.x + shadow.raster.width() / 2.0 - cutout.width / 2.0,
               shadow.offset.y + shadow.raster.height() / 2.0 - cutout.height / 2.0};
  const double th = deg_to_rad(object.rotation_deg);
  const double c = std::cos(th), s = std::sin(th);
  Transform2D t;
  t.scale = object.scale;
  t.rotation_deg = object.rotation_deg;
  t.translation = object.translation +
                  Vec2{c * d.x - s * d.y, s * d.x + c * d.y} * object.scale;
  return t;
}

std::vector<Layer> target_layers(const LayoutTarget& target, const AssetMap& assets) {
  const auto ranks = z_ranks(target);
  std::vector<Layer> layers;
  for (const auto& p : target.placements) {
    const TrackAssets& a = assets_for(assets, p.object_id);
    const int rank = ranks.at(p.object_id);
    const Transform2D t = to_transform(p);
    if (a.shadow) layers.push_back(shadow_layer(a, t, 1.0, rank));
    Layer l;
    l.raster = std::make_shared<const RgbaImage>(relight_blend(a.variants, p.relight_t));
    l.transform = t;
    l.z = 2 * rank + 1;
    layers.push_back(std::move(l));
  }
  return layers;
}

std::vector<RgbImage> render_video(const Timeline& tl, const AssetMap& assets,
                                   const RgbImage& initial_canvas,
                                   const RgbImage& final_background) {
  if (size_of(initial_canvas) != size_of(final_background))
    throw InvariantError("initial canvas and final background sizes differ");
  if (static_cast<int>(tl.background_fade.size()) != tl.K)
    throw InvariantError("timeline fade schedule length differs from K");

  // Relit rasters shared across frames with the same blend parameter.
  std::map<std::pair<std::string, double>, std::shared_ptr<const RgbaImage>> relit;
  auto relit_at = [&](const std::string& id, const TrackAssets& a, double t) {
    auto key = std::make_pair(id, t);
    auto it = relit.find(key);
    if (it != relit.end()) return it->second;
    auto img = std::make_shared<const RgbaImage>(relight_blend(a.variants, t));
    relit.emplace(key, img);
    return img;
  };

  const FrameCanvas initial(initial_canvas);
  const FrameCanvas final_bg(final_background);
  std::vector<RgbImage> frames;
  frames.reserve(tl.K);
  for (int k = 0; k < tl.K; ++k) {
    std::vector<Layer> layers;
    for (const auto& track : tl.tracks) {
      const TrackAssets& a = assets_for(assets, track.object_id);
      const TrackFrame& f = track.frames.at(k);
      if (track.kind == TrackKind::fading) {
        Layer l{relit_at(track.object_id, a, f.relight_t), f.transform, f.cutout_alpha,
                kFadingZ + track.rank};
        layers.push_back(std::move(l));
        continue;
      }
      if (a.shadow) layers.push_back(shadow_layer(a, f.transform, f.shadow_alpha, track.rank));
      if (a.white_box && track.kind == TrackKind::conditioning)
        layers.push_back({a.white_box, f.transform, f.white_box_alpha, 2 * track.rank});
      layers.push_back(
          {relit_at(track.object_id, a, f.relight_t), f.transform, f.cutout_alpha, 2 * track.rank + 1});
    }
    std::stable_sort(layers.begin(), layers.end(),
                     [](const Layer& a, const Layer& b) { return a.z < b.z; });
    for (std::size_t i = 1; i < layers.size(); ++i)
      if (layers[i].z == layers[i - 1].z) throw InvariantError("z-order tie while rendering");

    FrameCanvas canvas = initial;
    canvas.mix_towards(final_bg, static_cast<float>(tl.background_fade[k]));
    for (const auto& l : layers) canvas.composite(l);
    frames.push_back(canvas.to_rgb());
  }
  return frames;
}

PairVideo crossfade_pair(const RgbImage& first, const RgbImage& last, int K) {
  if (K < 2) throw InvariantError("K must be ≥ 2");
  if (size_of(first) != size_of(last)) throw InvariantError("pair images differ in size");
  PairVideo out;
  for (int k = 0; k < K; ++k) {
    const double u = frame_param(k, K);
    if (k == 0) out.frames.push_back(first);
    else if (k == K - 1) out.frames.push_back(last);
    else {
      RgbImage f(first.width(), first.height());
      for (std::size_t i = 0; i < f.bytes().size(); ++i)
        f.bytes()[i] = round_to_u8(lerp(first.bytes()[i], last.bytes()[i], u));
      out.frames.push_back(std::move(f));
    }
  }
  out.supervised_frames = {K - 1};
  return out;
}

PairVideo load_interpolated_pair(const std::filesystem::path& dir, int K, Size size) {
  const auto files = list_photo_pool(dir);
  if (static_cast<int>(files.size()) != K)
    throw InvariantError("interpolated frame count " + std::to_string(files.size()) +
                         " ≠ K=" + std::to_string(K));
  PairVideo out;
  for (const auto& f : files) {
    auto img = io::read_rgb(f);
    if (size_of(img) != size)
      throw InvariantError("interpolated frame " + f.filename().string() + " has the wrong size");
    out.frames.push_back(std::move(img));
  }
  out.supervised_frames = {K - 1};
  return out;
}

}  // namespace pforge
