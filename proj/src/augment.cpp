#include "pforge/augment.hpp"

#include <algorithm>
#include <set>

#include "pforge/rng.hpp"

namespace pforge {
namespace {

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvariantError(std::string(name) + " probability must be in [0,1]");
}

void check_range(double lo, double hi, const char* name) {
  if (!(lo <= hi)) throw InvariantError(std::string("inverted ") + name + " jitter range");
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const ObjectAsset& pool_asset(const std::vector<ObjectAsset>& pool, const std::string& id) {
  for (const auto& a : pool)
    if (a.id == id) return a;
  throw InvariantError("substitute '" + id + "' is not in the substitute pool");
}

}  // namespace

Jitter sample_jitter(std::uint64_t seed, const JitterRanges& r) {
  check_range(r.scale_lo, r.scale_hi, "scale");
  check_range(r.rotation_lo, r.rotation_hi, "rotation");
  if (!(r.perspective_frac >= 0.0 && r.perspective_frac < 0.5))
    throw InvariantError("perspective jitter must be in [0,0.5)");
  if (!(r.scale_lo > 0.0)) throw InvariantError("scale jitter must stay positive");
  Rng rng(seed);
  Jitter j;
  j.scale_mul = rng.uniform(r.scale_lo, r.scale_hi);
  j.rotation_deg = rng.uniform(r.rotation_lo, r.rotation_hi);
  for (auto& c : j.perspective_frac) {
    c.x = rng.uniform(-r.perspective_frac, r.perspective_frac);
    c.y = rng.uniform(-r.perspective_frac, r.perspective_frac);
  }
  return j;
}

Transform2D jitter_transform(const Jitter& j, double base_scale, Size raster) {
  Transform2D t;
  t.scale = base_scale * j.scale_mul;
  t.rotation_deg = j.rotation_deg;
  for (int i = 0; i < 4; ++i)
    t.perspective[i] = {j.perspective_frac[i].x * raster.width * t.scale,
                        j.perspective_frac[i].y * raster.height * t.scale};
  return t;
}

Json to_json(const AugmentationPlan& plan) {
  Json jitter = Json::object();
  for (const auto& [id, j] : plan.jitter) {
    Json corners = Json::array();
    for (const auto& c : j.perspective_frac) corners.push_back({c.x, c.y});
    jitter[id] = {{"scale_mul", j.scale_mul}, {"rotation_deg", j.rotation_deg}, {"perspective_frac", corners}};
  }
  Json out = {{"jitter", jitter},
              {"bg_pool_choice", plan.bg_pool_choice ? Json(to_string(*plan.bg_pool_choice)) : Json()},
              {"scene_completion", plan.scene_completion},
              {"design_elements", plan.design_elements},
              {"replacement", Json()}};
  if (plan.replacement)
    out["replacement"] = {{"victim_id", plan.replacement->victim_id},
                          {"substitute_id", plan.replacement->substitute_id}};
  return out;
}

AugmentationPlan parse_augmentation_plan(const Json& j) {
  try {
    AugmentationPlan plan;
    for (const auto& [id, v] : j.at("jitter").items()) {
      Jitter jt;
      jt.scale_mul = v.at("scale_mul").get<double>();
      jt.rotation_deg = v.at("rotation_deg").get<double>();
      const Json& c = v.at("perspective_frac");
      if (!c.is_array() || c.size() != 4) throw SchemaError("augmentation.jitter: 4 corners expected");
      for (int i = 0; i < 4; ++i) jt.perspective_frac[i] = {c[i].at(0).get<double>(), c[i].at(1).get<double>()};
      plan.jitter[id] = jt;
    }
    if (!j.at("bg_pool_choice").is_null())
      plan.bg_pool_choice = parse_background_kind(j["bg_pool_choice"].get<std::string>());
    plan.scene_completion = j.at("scene_completion").get<std::vector<std::string>>();
    plan.design_elements = j.at("design_elements").get<std::vector<std::string>>();
    if (!j.at("replacement").is_null())
      plan.replacement = Replacement{j["replacement"].at("victim_id").get<std::string>(),
                                     j["replacement"].at("substitute_id").get<std::string>()};
    return plan;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("augmentation plan: ") + e.what());
  }
}

AugmentationPlan sample_augmentations(const SampleSpec& spec, const AugmentConfig& cfg,
                                      const std::vector<ObjectAsset>& pool, std::uint64_t seed) {
  check_prob(cfg.probs.scene, "scene");
  check_prob(cfg.probs.design, "design");
  check_prob(cfg.probs.replace, "replace");
  double wsum = 0.0;
  for (double w : cfg.bg_pool_weights) {
    if (!(w >= 0.0)) throw InvariantError("bg_pool_weights must be non-negative");
    wsum += w;
  }

  AugmentationPlan plan;
  const std::size_t n = spec.objects.size();
  Rng gates(derive_seed(seed, "aug.gates"));

  if (gates.bernoulli(cfg.probs.scene) && n >= 2) {
    std::vector<bool> pick(n);
    std::size_t count = 0;
    do {
      count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        pick[i] = gates.bernoulli(0.5);
        count += pick[i];
      }
    } while (count == 0 || count == n);
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) plan.scene_completion.push_back(spec.objects[i].id);
  }

  for (const auto& o : spec.objects) {
    if (contains(plan.scene_completion, o.id)) continue;
    if (gates.bernoulli(cfg.probs.design)) plan.design_elements.push_back(o.id);
  }

  if (plan.scene_completion.empty() && plan.design_elements.empty() &&
      gates.bernoulli(cfg.probs.replace)) {
    const auto& victim = spec.objects[gates.below(n)];
    std::vector<const ObjectAsset*> candidates;
    for (const auto& a : pool)
      if (!spec.find_object(a.id)) candidates.push_back(&a);
    if (candidates.empty())
      throw InvariantError("replacement drawn but the substitute pool has no eligible asset");
    plan.replacement = Replacement{victim.id, candidates[gates.below(candidates.size())]->id};
  }

  for (const auto& o : spec.objects)
    plan.jitter[o.id] = sample_jitter(derive_seed(seed, "aug.jitter." + o.id), cfg.jitter);
  if (plan.replacement)
    plan.jitter[plan.replacement->substitute_id] =
        sample_jitter(derive_seed(seed, "aug.jitter." + plan.replacement->substitute_id), cfg.jitter);

  if (spec.background.aleatory) {
    if (!(wsum > 0.0)) throw InvariantError("bg_pool_weights sum to zero");
    Rng rng(derive_seed(seed, "aug.bg"));
    const double r = rng.uniform01() * wsum;
    double acc = 0.0;
    std::size_t pick = kBackgroundPools.size() - 1;
    for (std::size_t i = 0; i < kBackgroundPools.size(); ++i) {
      acc += cfg.bg_pool_weights[i];
      if (r < acc && cfg.bg_pool_weights[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (cfg.bg_pool_weights[pick] == 0.0) --pick;
    plan.bg_pool_choice = kBackgroundPools[pick];
  }
  return plan;
}

std::string position_phrase(Vec2 c, Size canvas) {
  const int col = std::clamp(static_cast<int>(3.0 * c.x / canvas.width), 0, 2);
  const int row = std::clamp(static_cast<int>(3.0 * c.y / canvas.height), 0, 2);
  static const char* rows[] = {"top", "middle", "bottom"};
  static const char* cols[] = {"left", "center", "right"};
  if (row == 1 && col == 1) return "center";
  if (row == 1) return std::string("middle ") + cols[col];
  if (col == 1) return std::string(rows[row]) + " center";
  return std::string(rows[row]) + " " + cols[col];
}

AppliedSample apply_plan(const SampleSpec& spec, const AugmentationPlan& plan,
                         const std::vector<ObjectAsset>& pool) {
  std::set<std::string> used;
  auto claim = [&](const std::string& id, const char* what) {
    if (!spec.find_object(id)) throw InvariantError(std::string(what) + " '" + id + "' is not in the sample spec");
    if (!used.insert(id).second) throw InvariantError("inconsistent plan: '" + id + "' selected twice");
  };
  for (const auto& id : plan.scene_completion) claim(id, "scene-completion object");
  for (const auto& id : plan.design_elements) claim(id, "design element");
  if (plan.replacement) {
    if (!plan.scene_completion.empty() || !plan.design_elements.empty())
      throw InvariantError("inconsistent plan: replacement alongside other augmentations");
    claim(plan.replacement->victim_id, "replacement victim");
    if (spec.find_object(plan.replacement->substitute_id))
      throw InvariantError("inconsistent plan: substitute already present");
  }
  if (!plan.scene_completion.empty() && plan.scene_completion.size() >= spec.objects.size())
    throw InvariantError("inconsistent plan: scene completion must leave an animated object");

  AppliedSample out;
  out.spec = spec;
  out.spec.objects.clear();
  out.spec.target.placements.clear();

  std::string bg_extra;
  for (const auto& o : spec.objects) {
    const Placement& p = *spec.target.find(o.id);
    if (contains(plan.scene_completion, o.id)) {
      out.baked.push_back({o, p});
      bg_extra += ", with " + o.description + " at the " + position_phrase(p.center, spec.canvas);
      continue;
    }
    if (plan.replacement && plan.replacement->victim_id == o.id) {
      const ObjectAsset& sub = pool_asset(pool, plan.replacement->substitute_id);
      out.fading = PlacedAsset{o, p};
      out.spec.objects.push_back(sub);
      out.conditioning_ids.push_back(sub.id);
      out.extras.push_back("replacing the " + o.label);
      continue;
    }
    out.spec.objects.push_back(o);
    if (contains(plan.design_elements, o.id)) {
      out.fly_in_ids.push_back(o.id);
      out.extras.push_back(o.description);
    } else {
      out.conditioning_ids.push_back(o.id);
    }
  }
  for (const auto& p : spec.target.placements) {
    if (contains(plan.scene_completion, p.object_id)) continue;
    Placement kept = p;
    if (plan.replacement && plan.replacement->victim_id == p.object_id) {
      kept.object_id = plan.replacement->substitute_id;
      kept.relight_t = 0.0;
    }
    out.spec.target.placements.push_back(kept);
  }
  if (!bg_extra.empty()) {
    auto& desc = out.spec.background.description;
    desc = (desc.empty() ? std::string("a background") : desc) + bg_extra;
  }
  return out;
}

CaptionDirectives caption_directives(const AppliedSample& a) {
  CaptionDirectives d;
  for (const auto& id : a.conditioning_ids) d.wrapped.push_back(a.spec.find_object(id)->description);
  if (!a.spec.background.description.empty()) d.background = a.spec.background.description;
  d.extras = a.extras;
  return d;
}

}  // namespace pforge
