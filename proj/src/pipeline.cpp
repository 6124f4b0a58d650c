#include "pforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "pforge/animator.hpp"
#include "pforge/background_synth.hpp"
#include "pforge/image_io.hpp"
#include "pforge/rng.hpp"
#include "pforge/sizing.hpp"

namespace fs = std::filesystem;

namespace pforge {
namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (std::find_if(keys.begin(), keys.end(), [&](const char* x) { return k == x; }) == keys.end())
      throw SchemaError(where + (where.empty() ? "" : ".") + k + ": unknown field");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::optional<fs::path> read_path(const Json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const fs::path p = j[key].get<std::string>();
  return p.is_absolute() ? p : fs::absolute(base / p).lexically_normal();
}

std::vector<RgbaImage> load_variants(const SampleSpec& spec, const ObjectAsset& a) {
  std::vector<RgbaImage> v{io::read_rgba(spec.resolve(a.cutout))};
  for (const auto& r : a.relit_variants) v.push_back(io::read_rgba(spec.resolve(r)));
  return v;
}

RgbImage to_rgb(const RgbaImage& img) {
  RgbImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) out.bytes()[3 * i + c] = img.bytes()[4 * i + c];
  return out;
}

struct Bounds {
  Vec2 lo, hi;
};

/// Axis-aligned bounds of a raster drawn with `t` around the origin.
Bounds quad_bounds(Size raster, Transform2D t) {
  t.translation = {};
  Bounds b{{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
  for (const auto& c : destination_quad(raster, t)) {
    b.lo = {std::min(b.lo.x, c.x), std::min(b.lo.y, c.y)};
    b.hi = {std::max(b.hi.x, c.x), std::max(b.hi.y, c.y)};
  }
  return b;
}

struct StartItem {
  std::string id;
  Size raster;  // the white box actually drawn in frame 0
  Transform2D transform;
};

/// Scatters the opening frame, shrinking all items by 10% per failed round.
std::vector<Placement> scatter_starts(std::vector<StartItem> items, Size canvas, std::uint64_t seed,
                                      const GenerationConfig& cfg) {
  for (int round = 0; round <= cfg.max_shrinks; ++round) {
    std::vector<Size> sizes;
    std::vector<Bounds> bounds;
    for (const auto& it : items) {
      const Bounds b = quad_bounds(it.raster, it.transform);
      bounds.push_back(b);
      sizes.push_back({static_cast<int>(std::ceil(b.hi.x - b.lo.x)), static_cast<int>(std::ceil(b.hi.y - b.lo.y))});
    }
    try {
      const auto centers =
          scatter_layout(sizes, canvas, derive_seed(seed, static_cast<std::uint64_t>(round)), cfg.scatter_max_tries);
      std::vector<Placement> out;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const Vec2 box_center = (bounds[i].lo + bounds[i].hi) * 0.5;
        Placement p;
        p.object_id = items[i].id;
        p.center = centers[i] - box_center;
        p.scale = items[i].transform.scale;
        p.rotation_deg = items[i].transform.rotation_deg;
        p.perspective = items[i].transform.perspective;
        out.push_back(p);
      }
      return out;
    } catch (const PlacementError&) {
    } catch (const InvariantError&) {
      // an item larger than the canvas; shrinking may fix it
    }
    for (auto& it : items) {
      it.transform.scale *= 0.9;
      for (auto& c : it.transform.perspective) c = c * 0.9;
    }
  }
  throw PlacementError("could not scatter the opening frame after " + std::to_string(cfg.max_shrinks) +
                       " shrinks");
}

RgbImage resolve_background(const SampleSpec& spec, const AugmentationPlan* plan, const GenerationConfig& cfg,
                            std::uint64_t seed) {
  BackgroundSpec bg = spec.background;
  if (plan && plan->bg_pool_choice) {
    bg.kind = *plan->bg_pool_choice;
    bg.photo_path.reset();
    bg.color.reset();
    bg.procedural_seed.reset();
    if (bg.kind == BackgroundKind::plain_color) bg.color = random_plain_color(derive_seed(seed, "bg.color"));
  }
  return pick_background(bg, spec.base_dir, BackgroundPools{cfg.photo_pool}, spec.canvas,
                         derive_seed(seed, "background"));
}

/// The worker count is left out so batch outputs do not depend on it.
Json base_provenance(const SampleSpec& spec, const GenerationConfig& cfg, std::uint64_t seed) {
  Json config = to_json(cfg);
  config.erase("workers");
  return {{"spec", to_json(spec)}, {"seed", seed}, {"config", config}};
}

Json placements_json(const std::vector<Placement>& ps) {
  Json out = Json::array();
  for (const auto& p : ps) out.push_back(to_json(p));
  return out;
}

std::string make_caption(const Resources& res, const std::string& template_id, const CaptionDirectives& d,
                         std::string* used_id) {
  const auto& lib = res.templates.empty() ? default_templates() : res.templates;
  const CaptionTemplate t = choose_template(lib, template_id, static_cast<int>(d.wrapped.size()));
  *used_id = t.id;
  return render_caption(t, d);
}

SampleOutput build_composite(const SampleSpec& spec, const GenerationConfig& cfg, const Resources& res,
                             std::uint64_t seed) {
  const AugmentationPlan plan =
      sample_augmentations(spec, cfg.augment, res.substitute_pool, derive_seed(seed, "augment"));
  const AppliedSample applied = apply_plan(spec, plan, res.substitute_pool);
  const SampleSpec& s = applied.spec;

  RgbImage final_bg = resolve_background(spec, &plan, cfg, seed);
  RgbImage initial = s.initial_canvas == InitialCanvas::plain_white
                         ? solid_rgb(s.canvas, {255, 255, 255})
                         : final_bg;

  if (!applied.baked.empty()) {
    std::vector<Layer> baked;
    for (const auto& b : applied.baked) {
      auto raster = std::make_shared<const RgbaImage>(relight_blend(load_variants(s, b.asset), b.placement.relight_t));
      baked.push_back({raster, to_transform(b.placement), 1.0, b.placement.z});
    }
    final_bg = composite_frame(final_bg, baked);
    initial = composite_frame(initial, baked);
  }

  AssetMap assets;
  std::vector<StartItem> starts;
  std::map<std::string, Size> raster_sizes;
  for (const auto& o : s.objects) {
    TrackAssets a;
    a.variants = load_variants(s, o);
    raster_sizes[o.id] = size_of(a.variants.front());
    const bool conditioning =
        std::find(applied.conditioning_ids.begin(), applied.conditioning_ids.end(), o.id) !=
        applied.conditioning_ids.end();
    if (conditioning) {
      a.white_box = std::make_shared<const RgbaImage>(white_box_embed(a.variants.front(), cfg.white_box_padding));
      const Placement& p = *s.target.find(o.id);
      starts.push_back({o.id, size_of(*a.white_box),
                        jitter_transform(plan.jitter.at(o.id), p.scale, size_of(*a.white_box))});
    }
    assets[o.id] = std::move(a);
  }
  std::vector<Placement> fading;
  if (applied.fading) {
    assets[applied.fading->asset.id].variants = load_variants(s, applied.fading->asset);
    fading.push_back(applied.fading->placement);
  }

  TimelineRequest req;
  req.initial = scatter_starts(starts, s.canvas, derive_seed(seed, "scatter"), cfg);
  req.target = s.target;
  req.fly_in = applied.fly_in_ids;
  req.fading = fading;
  req.K = s.K;
  req.mode = s.source_mode;
  req.initial_canvas = s.initial_canvas;
  req.canvas = s.canvas;
  req.raster_sizes = raster_sizes;
  const Timeline tl = plan_timeline(req);

  SampleOutput out;
  out.sample_id = spec.sample_id;
  out.frames = render_video(tl, assets, initial, final_bg);
  out.first_frame = out.frames.front();
  for (const auto& id : applied.conditioning_ids) out.object_images.push_back(to_rgb(*assets.at(id).white_box));
  out.background = final_bg;
  out.supervised_frames = tl.supervised_frames;
  std::string template_id;
  out.caption = make_caption(res, s.caption_template_id, caption_directives(applied), &template_id);
  out.provenance = base_provenance(spec, cfg, seed);
  out.provenance["augmentation"] = to_json(plan);
  out.provenance["template_id"] = template_id;
  out.provenance["conditioning_ids"] = applied.conditioning_ids;
  out.provenance["initial_placements"] = placements_json(req.initial);
  return out;
}

SampleOutput build_side_by_side(const SampleSpec& spec, const GenerationConfig& cfg, const Resources& res,
                                std::uint64_t seed) {
  const ObjectAsset& a = spec.objects[0];
  const ObjectAsset& b = spec.objects[1];
  AssetMap assets;
  assets[a.id].variants = load_variants(spec, a);
  assets[b.id].variants = load_variants(spec, b);
  const std::array<Size, 2> sizes{size_of(assets[a.id].variants.front()), size_of(assets[b.id].variants.front())};
  const SideBySideScale sc = relative_scale({&a, &b}, sizes, spec.canvas, cfg.side_by_side_margin);
  const auto centers = side_by_side_centers(sc, sizes, spec.canvas, cfg.side_by_side_margin);

  LayoutTarget target;
  std::vector<StartItem> starts;
  for (int i = 0; i < 2; ++i) {
    const ObjectAsset& o = spec.objects[i];
    Placement p = *spec.target.find(o.id);
    p.center = centers[i];
    p.scale = sc.scales[i];
    p.rotation_deg = 0.0;
    p.perspective = {};
    target.placements.push_back(p);
    TrackAssets& ta = assets[o.id];
    ta.shadow = render_shadow(ta.variants.front(), cfg.light, cfg.shadow);
    ta.white_box = std::make_shared<const RgbaImage>(white_box_embed(ta.variants.front(), cfg.white_box_padding));
    Transform2D t;
    t.scale = p.scale;
    starts.push_back({o.id, size_of(*ta.white_box), t});
  }

  const RgbImage final_bg = resolve_background(spec, nullptr, cfg, seed);
  const RgbImage initial = spec.initial_canvas == InitialCanvas::plain_white
                               ? solid_rgb(spec.canvas, {255, 255, 255})
                               : final_bg;
  TimelineRequest req;
  req.initial = scatter_starts(starts, spec.canvas, derive_seed(seed, "scatter"), cfg);
  req.target = target;
  req.K = spec.K;
  req.mode = spec.source_mode;
  req.initial_canvas = spec.initial_canvas;
  req.canvas = spec.canvas;
  const Timeline tl = plan_timeline(req);

  SampleOutput out;
  out.sample_id = spec.sample_id;
  out.frames = render_video(tl, assets, initial, final_bg);
  out.first_frame = out.frames.front();
  CaptionDirectives d;
  for (const auto& o : spec.objects) {
    out.object_images.push_back(to_rgb(*assets.at(o.id).white_box));
    d.wrapped.push_back(o.description);
  }
  out.background = final_bg;
  out.supervised_frames = tl.supervised_frames;
  if (!spec.background.description.empty()) d.background = spec.background.description;
  std::string template_id;
  out.caption = make_caption(res, spec.caption_template_id, d, &template_id);
  out.provenance = base_provenance(spec, cfg, seed);
  out.provenance["template_id"] = template_id;
  out.provenance["resolved_target"] = placements_json(target.placements);
  out.provenance["initial_placements"] = placements_json(req.initial);
  return out;
}

SampleOutput build_pair(const SampleSpec& spec, const GenerationConfig& cfg, const Resources& res,
                        std::uint64_t seed) {
  const SubjectPair& pair = *spec.pair;
  if (!(pair.confidence_first > cfg.pair_min_confidence && pair.confidence_last > cfg.pair_min_confidence))
    throw InvariantError("subject pair confidence must exceed " + std::to_string(cfg.pair_min_confidence) +
                         " in both images");
  const RgbImage first = center_crop_resize(io::read_rgb(spec.resolve(pair.first)), spec.canvas);
  const RgbImage last = center_crop_resize(io::read_rgb(spec.resolve(pair.last)), spec.canvas);
  const PairVideo video = pair.interpolated_frames
                              ? load_interpolated_pair(spec.resolve(*pair.interpolated_frames), spec.K, spec.canvas)
                              : crossfade_pair(first, last, spec.K);
  SampleOutput out;
  out.sample_id = spec.sample_id;
  out.frames = video.frames;
  out.first_frame = out.frames.front();
  out.object_images = {first};
  out.supervised_frames = video.supervised_frames;
  CaptionDirectives d;
  d.wrapped = {spec.objects[0].description};
  if (!spec.background.description.empty()) d.background = spec.background.description;
  std::string template_id;
  out.caption = make_caption(res, spec.caption_template_id, d, &template_id);
  out.provenance = base_provenance(spec, cfg, seed);
  out.provenance["template_id"] = template_id;
  return out;
}

}  // namespace

GenerationConfig parse_config(const Json& j, const fs::path& base) {
  GenerationConfig c;
  try {
    reject_unknown(j,
                   {"schema", "probs", "jitter", "bg_pool_weights", "K", "light", "shadow", "clean",
                    "dilation_px", "conf_threshold", "workers", "global_seed", "white_box_padding",
                    "scatter_max_tries", "max_shrinks", "side_by_side_margin", "pair_min_confidence",
                    "photo_pool", "substitute_pool", "templates"},
                   "");
    if (j.contains("schema")) check_schema_version(j, "config");
    if (j.contains("probs")) {
      const Json& p = j["probs"];
      reject_unknown(p, {"scene", "design", "replace"}, "probs");
      read_opt(p, "scene", c.augment.probs.scene);
      read_opt(p, "design", c.augment.probs.design);
      read_opt(p, "replace", c.augment.probs.replace);
    }
    if (j.contains("jitter")) {
      const Json& p = j["jitter"];
      reject_unknown(p, {"scale", "rotation_deg", "perspective_frac"}, "jitter");
      if (p.contains("scale")) {
        c.augment.jitter.scale_lo = p["scale"].at(0).get<double>();
        c.augment.jitter.scale_hi = p["scale"].at(1).get<double>();
      }
      if (p.contains("rotation_deg")) {
        c.augment.jitter.rotation_lo = p["rotation_deg"].at(0).get<double>();
        c.augment.jitter.rotation_hi = p["rotation_deg"].at(1).get<double>();
      }
      read_opt(p, "perspective_frac", c.augment.jitter.perspective_frac);
    }
    if (j.contains("bg_pool_weights")) {
      const Json& w = j["bg_pool_weights"];
      reject_unknown(w, {"photo", "plain_color", "procedural"}, "bg_pool_weights");
      read_opt(w, "photo", c.augment.bg_pool_weights[0]);
      read_opt(w, "plain_color", c.augment.bg_pool_weights[1]);
      read_opt(w, "procedural", c.augment.bg_pool_weights[2]);
    }
    read_opt(j, "K", c.K);
    if (j.contains("light")) {
      reject_unknown(j["light"], {"direction_deg", "elevation_deg"}, "light");
      read_opt(j["light"], "direction_deg", c.light.direction_deg);
      read_opt(j["light"], "elevation_deg", c.light.elevation_deg);
    }
    if (j.contains("shadow")) {
      const Json& p = j["shadow"];
      reject_unknown(p, {"blur_px", "opacity", "max_shear", "flatten"}, "shadow");
      read_opt(p, "blur_px", c.shadow.blur_px);
      read_opt(p, "opacity", c.shadow.opacity);
      read_opt(p, "max_shear", c.shadow.max_shear);
      read_opt(p, "flatten", c.shadow.flatten);
    }
    if (j.contains("clean")) {
      const Json& p = j["clean"];
      reject_unknown(p, {"min_cov", "max_cov", "dup_iou", "containment_frac"}, "clean");
      read_opt(p, "min_cov", c.clean.min_cov);
      read_opt(p, "max_cov", c.clean.max_cov);
      read_opt(p, "dup_iou", c.clean.dup_iou);
      read_opt(p, "containment_frac", c.clean.containment_frac);
    }
    read_opt(j, "dilation_px", c.dilation_px);
    read_opt(j, "conf_threshold", c.conf_threshold);
    read_opt(j, "workers", c.workers);
    read_opt(j, "global_seed", c.global_seed);
    read_opt(j, "white_box_padding", c.white_box_padding);
    read_opt(j, "scatter_max_tries", c.scatter_max_tries);
    read_opt(j, "max_shrinks", c.max_shrinks);
    read_opt(j, "side_by_side_margin", c.side_by_side_margin);
    read_opt(j, "pair_min_confidence", c.pair_min_confidence);
    c.photo_pool = read_path(j, "photo_pool", base);
    c.substitute_pool = read_path(j, "substitute_pool", base);
    c.templates = read_path(j, "templates", base);
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

void validate_config(const GenerationConfig& c) {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvariantError(std::string("config: ") + what + " must be in [0,1]");
  };
  prob(c.augment.probs.scene, "probs.scene");
  prob(c.augment.probs.design, "probs.design");
  prob(c.augment.probs.replace, "probs.replace");
  prob(c.conf_threshold, "conf_threshold");
  prob(c.pair_min_confidence, "pair_min_confidence");
  if (c.workers < 1) throw InvariantError("config: workers must be ≥ 1");
  if (c.K < 2) throw InvariantError("config: K must be ≥ 2");
  if (!(c.augment.jitter.scale_lo <= c.augment.jitter.scale_hi) ||
      !(c.augment.jitter.rotation_lo <= c.augment.jitter.rotation_hi))
    throw InvariantError("config: inverted jitter range");
  double w = 0.0;
  for (double x : c.augment.bg_pool_weights) {
    if (!(x >= 0.0)) throw InvariantError("config: bg_pool_weights must be non-negative");
    w += x;
  }
  if (!(w > 0.0)) throw InvariantError("config: bg_pool_weights sum to zero");
  if (c.scatter_max_tries < 1 || c.max_shrinks < 0) throw InvariantError("config: bad scatter retry limits");
  if (!(c.white_box_padding >= 0.0 && c.white_box_padding <= 0.5))
    throw InvariantError("config: white_box_padding must be in [0,0.5]");
  if (c.dilation_px < 0) throw InvariantError("config: dilation_px must be non-negative");
}

GenerationConfig load_config(const fs::path& path) {
  return parse_config(read_json(path), fs::absolute(path).parent_path());
}

Json to_json(const GenerationConfig& c) {
  const auto& j = c.augment.jitter;
  Json out = {
      {"probs", {{"scene", c.augment.probs.scene}, {"design", c.augment.probs.design}, {"replace", c.augment.probs.replace}}},
      {"jitter", {{"scale", {j.scale_lo, j.scale_hi}}, {"rotation_deg", {j.rotation_lo, j.rotation_hi}}, {"perspective_frac", j.perspective_frac}}},
      {"bg_pool_weights",
       {{"photo", c.augment.bg_pool_weights[0]}, {"plain_color", c.augment.bg_pool_weights[1]}, {"procedural", c.augment.bg_pool_weights[2]}}},
      {"K", c.K},
      {"light", {{"direction_deg", c.light.direction_deg}, {"elevation_deg", c.light.elevation_deg}}},
      {"shadow", {{"blur_px", c.shadow.blur_px}, {"opacity", c.shadow.opacity}, {"max_shear", c.shadow.max_shear}, {"flatten", c.shadow.flatten}}},
      {"clean", {{"min_cov", c.clean.min_cov}, {"max_cov", c.clean.max_cov}, {"dup_iou", c.clean.dup_iou}, {"containment_frac", c.clean.containment_frac}}},
      {"dilation_px", c.dilation_px},
      {"conf_threshold", c.conf_threshold},
      {"workers", c.workers},
      {"global_seed", c.global_seed},
      {"white_box_padding", c.white_box_padding},
      {"scatter_max_tries", c.scatter_max_tries},
      {"max_shrinks", c.max_shrinks},
      {"side_by_side_margin", c.side_by_side_margin},
      {"pair_min_confidence", c.pair_min_confidence},
  };
  if (c.photo_pool) out["photo_pool"] = c.photo_pool->string();
  if (c.substitute_pool) out["substitute_pool"] = c.substitute_pool->string();
  if (c.templates) out["templates"] = c.templates->string();
  return out;
}

Resources load_resources(const GenerationConfig& cfg) {
  Resources r;
  if (cfg.substitute_pool) {
    const AssetRegistry reg = load_asset_registry(*cfg.substitute_pool);
    for (auto a : reg.assets) {
      a.cutout = fs::absolute(reg.base_dir / a.cutout).string();
      for (auto& v : a.relit_variants) v = fs::absolute(reg.base_dir / v).string();
      r.substitute_pool.push_back(std::move(a));
    }
  }
  if (cfg.templates) r.templates = load_templates(*cfg.templates);
  return r;
}

std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& sample_id, std::uint64_t spec_seed) {
  return derive_seed(derive_seed(global_seed, sample_id), spec_seed);
}

SampleOutput build_sample(const SampleSpec& spec, const GenerationConfig& cfg, const Resources& res,
                          std::uint64_t seed) {
  validate_spec(spec, true);
  switch (spec.source_mode) {
    case SourceMode::subject_pair: return build_pair(spec, cfg, res, seed);
    case SourceMode::side_by_side: return build_side_by_side(spec, cfg, res, seed);
    case SourceMode::in_the_wild:
    case SourceMode::manual_design: return build_composite(spec, cfg, res, seed);
  }
  throw InvariantError("unknown source mode");
}

SampleSpec load_spec_for_batch(const fs::path& path, const GenerationConfig& cfg) {
  Json doc = read_json(path);
  if (doc.is_object() && !doc.contains("K")) doc["K"] = cfg.K;
  return parse_sample_spec(doc, fs::absolute(path).parent_path());
}

BatchSummary run_batch(const fs::path& manifest_dir, const fs::path& out_dir, const GenerationConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(cfg);
  std::error_code ec;
  if (!fs::is_directory(manifest_dir, ec)) throw IoError("manifest directory unreadable: " + manifest_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(manifest_dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  if (ec) throw IoError("cannot list " + manifest_dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  fs::create_directories(out_dir);
  const Resources res = load_resources(cfg);

  // Specs load serially so duplicate ids resolve the same way every run.
  struct Job {
    std::string name;
    std::optional<SampleSpec> spec;
    std::string error;
  };
  std::vector<Job> jobs;
  std::set<std::string> ids;
  for (const auto& f : files) {
    Job job{f.filename().string(), std::nullopt, {}};
    try {
      SampleSpec s = load_spec_for_batch(f, cfg);
      if (!ids.insert(s.sample_id).second) throw InvariantError("duplicate sample_id '" + s.sample_id + "'");
      job.spec = std::move(s);
    } catch (const std::exception& e) {
      job.error = e.what();
    }
    jobs.push_back(std::move(job));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      if (!job.spec) continue;
      try {
        const SampleSpec& s = *job.spec;
        SampleOutput out = build_sample(s, cfg, res, sample_seed(cfg.global_seed, s.sample_id, s.seed));
        out.provenance["spec_dir"] = fs::relative(s.base_dir, fs::absolute(out_dir / s.sample_id)).generic_string();
        write_sample(out, out_dir);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchSummary sum;
  Json failures = Json::array();
  Json built = Json::array();
  for (const auto& job : jobs) {
    if (job.error.empty()) {
      ++sum.built;
      built.push_back(job.spec->sample_id);
    } else {
      ++sum.failed;
      sum.failures.push_back({job.name, job.error});
      failures.push_back({{"manifest", job.name}, {"reason", job.error}});
    }
  }
  write_json(out_dir / "summary.json",
             {{"schema", kSchema}, {"built", sum.built}, {"failed", sum.failed}, {"samples", built}, {"failures", failures}});
  sum.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sum;
}

SampleOutput regenerate(const fs::path& sample_dir) {
  const Json prov = read_provenance(sample_dir);
  try {
    const fs::path spec_dir = (fs::absolute(sample_dir) / prov.at("spec_dir").get<std::string>()).lexically_normal();
    const SampleSpec spec = parse_sample_spec(prov.at("spec"), spec_dir);
    const GenerationConfig cfg = parse_config(prov.at("config"), spec_dir);
    SampleOutput out = build_sample(spec, cfg, load_resources(cfg), prov.at("seed").get<std::uint64_t>());
    out.provenance["spec_dir"] = prov.at("spec_dir");
    return out;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("provenance: ") + e.what());
  }
}

}  // namespace pforge
