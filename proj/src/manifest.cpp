#include "pforge/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pforge/image_io.hpp"

namespace fs = std::filesystem;

namespace pforge {
namespace {

std::string field(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

const Json& require(const Json& j, std::string_view key, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(field(where, key) + ": missing");
  return *it;
}

std::string get_string(const Json& j, std::string_view key, const std::string& where) {
  const Json& v = require(j, key, where);
  if (!v.is_string()) throw SchemaError(field(where, key) + ": expected a string");
  return v.get<std::string>();
}

double as_number(const Json& v, const std::string& name) {
  if (!v.is_number()) throw SchemaError(name + ": expected a number");
  return v.get<double>();
}

double get_number(const Json& j, std::string_view key, const std::string& where) {
  return as_number(require(j, key, where), field(where, key));
}

long long as_integer(const Json& v, const std::string& name) {
  if (!v.is_number_integer()) throw SchemaError(name + ": expected an integer");
  return v.get<long long>();
}

std::uint64_t as_u64(const Json& v, const std::string& name) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  throw SchemaError(name + ": expected a non-negative integer");
}

Vec2 as_vec2(const Json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(name + ": expected [x, y]");
  return {as_number(v[0], name + "[0]"), as_number(v[1], name + "[1]")};
}

Rgb as_rgb(const Json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 3) throw SchemaError(name + ": expected [r, g, b]");
  std::uint8_t c[3];
  for (int i = 0; i < 3; ++i) {
    const auto x = as_integer(v[i], name);
    if (x < 0 || x > 255) throw InvariantError(name + ": color components must be in [0,255]");
    c[i] = static_cast<std::uint8_t>(x);
  }
  return {c[0], c[1], c[2]};
}

std::string relative_path(const Json& j, std::string_view key, const std::string& where) {
  std::string p = get_string(j, key, where);
  if (p.empty()) throw SchemaError(field(where, key) + ": empty path");
  if (fs::path(p).is_absolute())
    throw SchemaError(field(where, key) + ": absolute path not allowed ('" + p + "')");
  return p;
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw SchemaError(field(where, it.key()) + ": unknown field");
  }
}

}  // namespace

void check_schema_version(const Json& doc, std::string_view where) {
  if (!doc.is_object() || !doc.contains("schema"))
    throw SchemaError(std::string(where) + ": missing schema version");
  if (!doc["schema"].is_string()) throw SchemaError(std::string(where) + ": schema must be a string");
  const auto s = doc["schema"].get<std::string>();
  const std::string prefix = "placid-forge/";
  if (s.rfind(prefix, 0) != 0)
    throw SchemaError(std::string(where) + ": unknown schema '" + s + "'");
  const std::string version = s.substr(prefix.size());
  const std::string major = version.substr(0, version.find('.'));
  if (major != "1")
    throw SchemaError(std::string(where) + ": unsupported schema '" + s +
                      "' (expected major version 1)");
}

std::string_view to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::in_the_wild: return "in_the_wild";
    case SourceMode::manual_design: return "manual_design";
    case SourceMode::subject_pair: return "subject_pair";
    case SourceMode::side_by_side: return "side_by_side";
  }
  return "?";
}

std::string_view to_string(BackgroundKind kind) {
  switch (kind) {
    case BackgroundKind::photo: return "photo";
    case BackgroundKind::plain_color: return "plain_color";
    case BackgroundKind::procedural: return "procedural";
    case BackgroundKind::inpainted_original: return "inpainted_original";
  }
  return "?";
}

SourceMode parse_source_mode(std::string_view text) {
  for (auto m : {SourceMode::in_the_wild, SourceMode::manual_design, SourceMode::subject_pair,
                 SourceMode::side_by_side})
    if (to_string(m) == text) return m;
  throw SchemaError("source_mode: unknown value '" + std::string(text) + "'");
}

BackgroundKind parse_background_kind(std::string_view text) {
  for (auto k : {BackgroundKind::photo, BackgroundKind::plain_color, BackgroundKind::procedural,
                 BackgroundKind::inpainted_original})
    if (to_string(k) == text) return k;
  throw SchemaError("background.kind: unknown value '" + std::string(text) + "'");
}

BackgroundSpec BackgroundSpec::plain_white(std::string description) {
  BackgroundSpec b;
  b.kind = BackgroundKind::plain_color;
  b.color = Rgb{255, 255, 255};
  b.description = std::move(description);
  return b;
}

const Placement* LayoutTarget::find(std::string_view object_id) const {
  for (const auto& p : placements)
    if (p.object_id == object_id) return &p;
  return nullptr;
}

const ObjectAsset* SampleSpec::find_object(std::string_view id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

int canvas_feasible_count(Size canvas) { return (canvas.width / 32) * (canvas.height / 32); }

// ---------------------------------------------------------------------------
// JSON <-> types

Json to_json(const ObjectAsset& a) {
  Json j{{"id", a.id}, {"label", a.label}, {"description", a.description}, {"cutout", a.cutout}};
  if (a.real_dims)
    j["real_dims"] = {{"width_m", a.real_dims->width_m},
                      {"height_m", a.real_dims->height_m},
                      {"depth_m", a.real_dims->depth_m}};
  if (!a.relit_variants.empty()) j["relit_variants"] = a.relit_variants;
  return j;
}

Json to_json(const BackgroundSpec& b) {
  Json j{{"kind", to_string(b.kind)}, {"description", b.description}};
  if (b.photo_path) j["photo_path"] = *b.photo_path;
  if (b.color) j["color"] = {b.color->r, b.color->g, b.color->b};
  if (b.procedural_seed) j["procedural_seed"] = *b.procedural_seed;
  if (b.aleatory) j["aleatory"] = true;
  return j;
}

Json to_json(const Placement& p) {
  Json persp = Json::array();
  for (const auto& c : p.perspective) persp.push_back({c.x, c.y});
  return {{"object_id", p.object_id},
          {"center", {p.center.x, p.center.y}},
          {"scale", p.scale},
          {"rotation_deg", p.rotation_deg},
          {"perspective", persp},
          {"z", p.z},
          {"relight_t", p.relight_t}};
}

Json to_json(const SampleSpec& s) {
  Json objects = Json::array();
  for (const auto& o : s.objects) objects.push_back(to_json(o));
  Json placements = Json::array();
  for (const auto& p : s.target.placements) placements.push_back(to_json(p));
  Json j{{"schema", kSchema},
         {"sample_id", s.sample_id},
         {"source_mode", to_string(s.source_mode)},
         {"objects", objects},
         {"background", to_json(s.background)},
         {"target", {{"placements", placements}}},
         {"caption_template_id", s.caption_template_id},
         {"K", s.K},
         {"canvas", {{"w", s.canvas.width}, {"h", s.canvas.height}}},
         {"seed", s.seed}};
  if (s.initial_canvas == InitialCanvas::plain_white) j["initial_canvas"] = "plain_white";
  if (s.pair) {
    Json p{{"first", s.pair->first},
           {"last", s.pair->last},
           {"confidence", {s.pair->confidence_first, s.pair->confidence_last}}};
    if (s.pair->interpolated_frames) p["interpolated_frames"] = *s.pair->interpolated_frames;
    j["pair"] = p;
  }
  return j;
}

ObjectAsset parse_object_asset(const Json& j, const std::string& where) {
  reject_unknown(j, {"id", "label", "description", "cutout", "real_dims", "relit_variants"}, where);
  ObjectAsset a;
  a.id = get_string(j, "id", where);
  if (a.id.empty()) throw SchemaError(field(where, "id") + ": empty");
  a.label = get_string(j, "label", where);
  a.description = get_string(j, "description", where);
  a.cutout = relative_path(j, "cutout", where);
  if (j.contains("real_dims")) {
    const auto w = field(where, "real_dims");
    const Json& d = j["real_dims"];
    RealDims dims{get_number(d, "width_m", w), get_number(d, "height_m", w),
                  get_number(d, "depth_m", w)};
    if (!(dims.width_m > 0 && dims.height_m > 0 && dims.depth_m > 0))
      throw InvariantError(w + ": dimensions must be strictly positive");
    a.real_dims = dims;
  }
  if (j.contains("relit_variants")) {
    const Json& v = j["relit_variants"];
    if (!v.is_array()) throw SchemaError(field(where, "relit_variants") + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto w = field(where, "relit_variants");
      Json holder{{"p", v[i]}};
      a.relit_variants.push_back(relative_path(holder, "p", w + "[" + std::to_string(i) + "]"));
    }
  }
  return a;
}

BackgroundSpec parse_background(const Json& j, const std::string& where) {
  reject_unknown(j, {"kind", "photo_path", "color", "procedural_seed", "description", "aleatory"},
                 where);
  BackgroundSpec b;
  b.kind = parse_background_kind(get_string(j, "kind", where));
  if (j.contains("description")) b.description = get_string(j, "description", where);
  if (j.contains("aleatory")) {
    if (!j["aleatory"].is_boolean()) throw SchemaError(field(where, "aleatory") + ": expected bool");
    b.aleatory = j["aleatory"].get<bool>();
  }
  const bool has_photo = j.contains("photo_path");
  const bool has_color = j.contains("color");
  const bool has_seed = j.contains("procedural_seed");
  auto forbid = [&](bool present, std::string_view key) {
    if (present)
      throw InvariantError(field(where, key) + ": not allowed for kind " +
                           std::string(to_string(b.kind)));
  };
  switch (b.kind) {
    case BackgroundKind::photo:
      // Without photo_path the photo is drawn from the configured pool.
      forbid(has_color, "color");
      forbid(has_seed, "procedural_seed");
      break;
    case BackgroundKind::plain_color:
      forbid(has_photo, "photo_path");
      forbid(has_seed, "procedural_seed");
      if (!has_color) throw SchemaError(field(where, "color") + ": missing");
      break;
    case BackgroundKind::procedural:
      forbid(has_photo, "photo_path");
      forbid(has_color, "color");
      break;
    case BackgroundKind::inpainted_original:
      forbid(has_color, "color");
      forbid(has_seed, "procedural_seed");
      if (!has_photo) throw SchemaError(field(where, "photo_path") + ": missing");
      break;
  }
  if (has_photo) b.photo_path = relative_path(j, "photo_path", where);
  if (has_color) b.color = as_rgb(j["color"], field(where, "color"));
  if (has_seed) b.procedural_seed = as_u64(j["procedural_seed"], field(where, "procedural_seed"));
  return b;
}

Placement parse_placement(const Json& j, const std::string& where) {
  reject_unknown(j,
                 {"object_id", "center", "scale", "rotation_deg", "perspective", "z", "relight_t"},
                 where);
  Placement p;
  p.object_id = get_string(j, "object_id", where);
  p.center = as_vec2(require(j, "center", where), field(where, "center"));
  if (j.contains("scale")) p.scale = get_number(j, "scale", where);
  if (!(p.scale > 0)) throw InvariantError(field(where, "scale") + ": must be > 0");
  if (j.contains("rotation_deg")) p.rotation_deg = get_number(j, "rotation_deg", where);
  if (j.contains("perspective")) {
    const Json& v = j["perspective"];
    const auto w = field(where, "perspective");
    if (!v.is_array() || v.size() != 4) throw SchemaError(w + ": expected 4 [dx, dy] pairs");
    for (int i = 0; i < 4; ++i) p.perspective[i] = as_vec2(v[i], w + "[" + std::to_string(i) + "]");
  }
  p.z = static_cast<int>(as_integer(require(j, "z", where), field(where, "z")));
  if (j.contains("relight_t")) p.relight_t = get_number(j, "relight_t", where);
  if (!(p.relight_t >= 0.0 && p.relight_t <= 1.0))
    throw InvariantError(field(where, "relight_t") + ": must be in [0,1]");
  return p;
}

SampleSpec parse_sample_spec(const Json& doc, const fs::path& base_dir) {
  check_schema_version(doc, "sample spec");
  reject_unknown(doc,
                 {"schema", "sample_id", "source_mode", "objects", "background", "target",
                  "caption_template_id", "K", "canvas", "seed", "initial_canvas", "pair"},
                 "");
  SampleSpec s;
  s.base_dir = fs::absolute(base_dir).lexically_normal();
  s.sample_id = get_string(doc, "sample_id", "");
  if (s.sample_id.empty() || s.sample_id.find('/') != std::string::npos ||
      s.sample_id == "." || s.sample_id == "..")
    throw SchemaError("sample_id: must be a non-empty file name");
  s.source_mode = parse_source_mode(get_string(doc, "source_mode", ""));

  const Json& objs = require(doc, "objects", "");
  if (!objs.is_array()) throw SchemaError("objects: expected an array");
  for (std::size_t i = 0; i < objs.size(); ++i)
    s.objects.push_back(parse_object_asset(objs[i], "objects[" + std::to_string(i) + "]"));

  s.background = parse_background(require(doc, "background", ""), "background");

  const Json& target = require(doc, "target", "");
  const Json& placements = require(target, "placements", "target");
  if (!placements.is_array()) throw SchemaError("target.placements: expected an array");
  for (std::size_t i = 0; i < placements.size(); ++i)
    s.target.placements.push_back(
        parse_placement(placements[i], "target.placements[" + std::to_string(i) + "]"));

  s.caption_template_id = get_string(doc, "caption_template_id", "");
  s.K = static_cast<int>(as_integer(require(doc, "K", ""), "K"));
  const Json& canvas = require(doc, "canvas", "");
  s.canvas.width = static_cast<int>(as_integer(require(canvas, "w", "canvas"), "canvas.w"));
  s.canvas.height = static_cast<int>(as_integer(require(canvas, "h", "canvas"), "canvas.h"));
  s.seed = as_u64(require(doc, "seed", ""), "seed");

  if (doc.contains("initial_canvas")) {
    const auto v = get_string(doc, "initial_canvas", "");
    if (v == "plain_white") s.initial_canvas = InitialCanvas::plain_white;
    else if (v == "background") s.initial_canvas = InitialCanvas::background;
    else throw SchemaError("initial_canvas: unknown value '" + v + "'");
  }
  if (doc.contains("pair")) {
    const Json& p = doc["pair"];
    reject_unknown(p, {"first", "last", "confidence", "interpolated_frames"}, "pair");
    SubjectPair pair;
    pair.first = relative_path(p, "first", "pair");
    pair.last = relative_path(p, "last", "pair");
    const Json& c = require(p, "confidence", "pair");
    if (!c.is_array() || c.size() != 2) throw SchemaError("pair.confidence: expected [c1, c2]");
    pair.confidence_first = as_number(c[0], "pair.confidence[0]");
    pair.confidence_last = as_number(c[1], "pair.confidence[1]");
    if (p.contains("interpolated_frames"))
      pair.interpolated_frames = relative_path(p, "interpolated_frames", "pair");
    s.pair = pair;
  }
  validate_spec(s, false);
  return s;
}

void validate_spec(const SampleSpec& s, bool check_assets) {
  if (s.K < 2) throw InvariantError("K must be ≥ 2");
  if (s.canvas.width <= 0 || s.canvas.height <= 0)
    throw InvariantError("canvas dimensions must be positive");
  const int n = static_cast<int>(s.objects.size());
  if (s.source_mode == SourceMode::subject_pair && n != 1)
    throw InvariantError("subject_pair requires exactly 1 object");
  if (s.source_mode == SourceMode::side_by_side && n != 2)
    throw InvariantError("side_by_side requires exactly 2 objects");
  if (n < 1) throw InvariantError("at least one object is required");
  if (n > canvas_feasible_count(s.canvas))
    throw InvariantError("object count " + std::to_string(n) + " exceeds canvas capacity " +
                         std::to_string(canvas_feasible_count(s.canvas)));
  if (s.source_mode == SourceMode::subject_pair && !s.pair)
    throw SchemaError("pair: missing (required for subject_pair)");
  if (s.source_mode != SourceMode::subject_pair && s.pair)
    throw InvariantError("pair: only allowed for subject_pair");
  if (s.source_mode == SourceMode::side_by_side) {
    for (const auto& o : s.objects)
      if (!o.real_dims)
        throw InvariantError("side_by_side object '" + o.id + "' lacks real_dims");
  }

  std::set<std::string> ids;
  for (const auto& o : s.objects)
    if (!ids.insert(o.id).second) throw InvariantError("duplicate object id '" + o.id + "'");

  std::set<std::string> placed;
  std::set<int> zs;
  for (std::size_t i = 0; i < s.target.placements.size(); ++i) {
    const auto& p = s.target.placements[i];
    const auto where = "target.placements[" + std::to_string(i) + "]";
    if (!ids.count(p.object_id))
      throw SchemaError(where + ".object_id: '" + p.object_id + "' references no declared object");
    if (!placed.insert(p.object_id).second)
      throw InvariantError(where + ".object_id: duplicate placement for '" + p.object_id + "'");
    if (!zs.insert(p.z).second)
      throw InvariantError(where + ".z: z_order tie at " + std::to_string(p.z));
    if (!(p.scale > 0)) throw InvariantError(where + ".scale: must be > 0");
  }
  if (s.source_mode != SourceMode::subject_pair) {
    for (const auto& o : s.objects)
      if (!placed.count(o.id)) throw InvariantError("object '" + o.id + "' has no target placement");
  }

  if (!check_assets) return;
  auto must_exist = [&](const std::string& rel, const std::string& what) {
    if (!fs::is_regular_file(s.resolve(rel)))
      throw SchemaError("dangling asset reference: " + what + " '" + rel + "'");
  };
  for (const auto& o : s.objects) {
    must_exist(o.cutout, "objects." + o.id + ".cutout");
    const auto cutout = io::read_rgba(s.resolve(o.cutout));
    bool any_alpha = false;
    for (std::size_t i = 3; i < cutout.bytes().size() && !any_alpha; i += 4)
      any_alpha = cutout.bytes()[i] > 0;
    if (!any_alpha) throw InvariantError("cutout of '" + o.id + "' has an empty alpha channel");
    for (const auto& v : o.relit_variants) {
      must_exist(v, "objects." + o.id + ".relit_variants");
      if (io::read_size(s.resolve(v)) != size_of(cutout))
        throw InvariantError("relit variant '" + v + "' does not match cutout dimensions");
    }
  }
  if (s.background.photo_path) must_exist(*s.background.photo_path, "background.photo_path");
  if (s.pair) {
    must_exist(s.pair->first, "pair.first");
    must_exist(s.pair->last, "pair.last");
  }
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SampleSpec load_sample_spec(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("no such spec file: " + path.string());
  auto spec = parse_sample_spec(read_json(path), path.parent_path());
  validate_spec(spec, true);
  return spec;
}

void write_sample_spec(const SampleSpec& spec, const fs::path& path) {
  write_json(path, to_json(spec));
}

AssetRegistry load_asset_registry(const fs::path& path) {
  const Json doc = read_json(path);
  check_schema_version(doc, "asset registry");
  const Json& assets = require(doc, "assets", "");
  if (!assets.is_array()) throw SchemaError("assets: expected an array");
  AssetRegistry reg;
  reg.base_dir = fs::absolute(path.parent_path()).lexically_normal();
  std::set<std::string> ids;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    auto a = parse_object_asset(assets[i], "assets[" + std::to_string(i) + "]");
    if (!ids.insert(a.id).second) throw InvariantError("duplicate asset id '" + a.id + "'");
    if (!fs::is_regular_file(reg.base_dir / a.cutout))
      throw SchemaError("dangling asset reference: assets." + a.id + ".cutout");
    reg.assets.push_back(std::move(a));
  }
  return reg;
}

// ---------------------------------------------------------------------------
// Sample output

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.png", index);
  return buf;
}

namespace {

std::string object_image_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "obj_%02zu.png", i);
  return buf;
}

}  // namespace

fs::path write_sample(const SampleOutput& output, const fs::path& dir, bool overwrite) {
  if (output.sample_id.empty()) throw InvariantError("sample output has no sample_id");
  if (output.frames.empty()) throw InvariantError("sample output has no frames");
  const fs::path root = dir / output.sample_id;
  std::error_code ec;
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!overwrite) throw IoError("output directory not empty: " + root.string());
    fs::remove_all(root, ec);
    if (ec) throw IoError("cannot clear " + root.string() + ": " + ec.message());
  }
  fs::create_directories(root / "frames", ec);
  if (!ec) fs::create_directories(root / "conditioning", ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  for (std::size_t k = 0; k < output.frames.size(); ++k)
    io::write_png(root / "frames" / frame_filename(static_cast<int>(k)), output.frames[k]);
  io::write_png(root / "conditioning" / "first_frame.png", output.first_frame);
  Json object_paths = Json::array();
  for (std::size_t i = 0; i < output.object_images.size(); ++i) {
    const auto name = object_image_name(i);
    io::write_png(root / "conditioning" / name, output.object_images[i]);
    object_paths.push_back("conditioning/" + name);
  }
  if (output.background) io::write_png(root / "conditioning" / "background.png", *output.background);

  {
    std::ofstream cap(root / "caption.txt", std::ios::binary | std::ios::trunc);
    cap << output.caption << '\n';
    if (!cap) throw IoError("cannot write caption for " + output.sample_id);
  }

  Json prov = output.provenance.is_null() ? Json::object() : output.provenance;
  prov["schema"] = kSchema;
  prov["sample_id"] = output.sample_id;
  prov["frames"] = output.frames.size();
  prov["supervised_frames"] = output.supervised_frames;
  prov["conditioning"] = {{"first_frame", "conditioning/first_frame.png"},
                          {"object_images", object_paths}};
  if (output.background) prov["conditioning"]["background"] = "conditioning/background.png";
  prov["caption"] = output.caption;
  write_json(root / "provenance.json", prov);
  return root;
}

Json read_provenance(const fs::path& sample_dir) {
  const Json doc = read_json(sample_dir / "provenance.json");
  check_schema_version(doc, "provenance");
  return doc;
}

std::vector<std::string> validate_output(const fs::path& sample_dir, const SampleSpec& spec) {
  std::error_code ec;
  if (!fs::is_directory(sample_dir, ec)) throw IoError("unreadable directory: " + sample_dir.string());
  std::vector<std::string> v;
  const int K = spec.K;

  int frame_count = 0;
  const fs::path frames = sample_dir / "frames";
  if (fs::is_directory(frames)) {
    for (const auto& entry : fs::directory_iterator(frames, ec)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".png") ++frame_count;
    }
  }
  if (frame_count != K)
    v.push_back("frame count " + std::to_string(frame_count) + " ≠ K=" + std::to_string(K));
  for (int k = 0; k < frame_count; ++k) {
    const auto path = frames / frame_filename(k);
    if (!fs::is_regular_file(path)) {
      v.push_back("missing " + frame_filename(k));
      continue;
    }
    try {
      const Size s = io::read_size(path);
      if (s != spec.canvas)
        v.push_back(frame_filename(k) + " size " + std::to_string(s.width) + "x" +
                    std::to_string(s.height) + " ≠ canvas " + std::to_string(spec.canvas.width) +
                    "x" + std::to_string(spec.canvas.height));
    } catch (const Error& e) {
      v.push_back(std::string("unreadable ") + frame_filename(k) + ": " + e.what());
    }
  }

  if (!fs::is_regular_file(sample_dir / "conditioning" / "first_frame.png"))
    v.push_back("missing conditioning/first_frame.png");
  if (!fs::is_regular_file(sample_dir / "caption.txt")) v.push_back("missing caption.txt");

  Json prov;
  try {
    prov = read_provenance(sample_dir);
  } catch (const Error& e) {
    v.push_back(std::string("provenance.json: ") + e.what());
    return v;
  }
  if (!prov.contains("supervised_frames") || !prov["supervised_frames"].is_array()) {
    v.push_back("provenance.json: missing supervised_frames");
    return v;
  }
  std::vector<int> sup;
  for (const auto& x : prov["supervised_frames"]) {
    if (!x.is_number_integer()) {
      v.push_back("supervised_frames: non-integer entry");
      return v;
    }
    sup.push_back(x.get<int>());
  }
  if (sup.empty()) v.push_back("supervised_frames is empty");
  for (int k : sup)
    if (k < 0 || k > K - 1)
      v.push_back("supervised frame " + std::to_string(k) + " outside [0, " + std::to_string(K - 1) +
                  "]");
  if (std::find(sup.begin(), sup.end(), K - 1) == sup.end())
    v.push_back("supervised_frames must include the last frame K-1=" + std::to_string(K - 1));
  std::vector<int> sorted = sup;
  std::sort(sorted.begin(), sorted.end());
  if (spec.source_mode == SourceMode::subject_pair) {
    if (sorted != std::vector<int>{K - 1})
      v.push_back("subject_pair supervises only the last frame: expected [" + std::to_string(K - 1) +
                  "]");
  } else {
    std::vector<int> all(K);
    for (int k = 0; k < K; ++k) all[k] = k;
    if (sorted != all) v.push_back("non-pair modes supervise every frame");
  }
  return v;
}

}  // namespace pforge
