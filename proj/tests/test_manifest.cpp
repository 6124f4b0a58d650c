#include <doctest.h>

#include "pforge/manifest.hpp"
#include "support.hpp"

using namespace pforge;
using testing::TempDir;

namespace {

Json minimal_doc() {
  return Json::parse(R"({
    "schema": "placid-forge/1",
    "sample_id": "mug-01",
    "source_mode": "manual_design",
    "objects": [{"id": "mug", "label": "mug", "description": "a red mug", "cutout": "mug.png"}],
    "background": {"kind": "plain_color", "color": [240, 240, 240], "description": "grey"},
    "target": {"placements": [{"object_id": "mug", "center": [64, 64], "z": 0}]},
    "caption_template_id": "studio-1",
    "K": 9,
    "canvas": {"w": 128, "h": 128},
    "seed": 3
  })");
}

std::string schema_error(const Json& doc) {
  try {
    parse_sample_spec(doc, ".");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("manifest") {

TEST_CASE("minimal spec parses with defaults") {
  const SampleSpec s = parse_sample_spec(minimal_doc(), "/tmp");
  CHECK(s.sample_id == "mug-01");
  CHECK(s.source_mode == SourceMode::manual_design);
  CHECK(s.objects.size() == 1);
  CHECK(s.background.color == Rgb{240, 240, 240});
  CHECK(s.target.placements[0].scale == 1.0);
  CHECK(s.target.placements[0].relight_t == 0.0);
  CHECK(s.initial_canvas == InitialCanvas::background);
  CHECK(s.canvas == Size{128, 128});
}

TEST_CASE("json round trip is lossless") {
  Json doc = minimal_doc();
  doc["objects"][0]["real_dims"] = {{"width_m", 0.1}, {"height_m", 0.12}, {"depth_m", 0.1}};
  doc["objects"][0]["relit_variants"] = {"mug_warm.png"};
  doc["target"]["placements"][0]["perspective"] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  doc["target"]["placements"][0]["relight_t"] = 0.5;
  doc["initial_canvas"] = "plain_white";
  const SampleSpec a = parse_sample_spec(doc, "/tmp");
  const SampleSpec b = parse_sample_spec(to_json(a), "/tmp");
  CHECK(a == b);
}

TEST_CASE("schema versions") {
  Json doc = minimal_doc();
  doc["schema"] = "placid-forge/1.3";
  CHECK(schema_error(doc).empty());
  doc["schema"] = "placid-forge/2";
  CHECK(schema_error(doc).find("unsupported schema") != std::string::npos);
  doc.erase("schema");
  CHECK(schema_error(doc).find("missing schema") != std::string::npos);
}

TEST_CASE("structural errors name the field") {
  Json doc = minimal_doc();
  doc["surprise"] = 1;
  CHECK(schema_error(doc).find("surprise") != std::string::npos);

  doc = minimal_doc();
  doc["objects"][0]["cutout"] = "/abs/mug.png";
  CHECK(schema_error(doc).find("absolute path") != std::string::npos);

  doc = minimal_doc();
  doc["source_mode"] = "dream";
  CHECK(schema_error(doc).find("source_mode") != std::string::npos);

  doc = minimal_doc();
  doc["background"] = {{"kind", "inpainted_original"}};
  CHECK(schema_error(doc).find("photo_path") != std::string::npos);

  doc = minimal_doc();
  doc["background"]["photo_path"] = "x.jpg";
  CHECK(schema_error(doc).find("not allowed") != std::string::npos);
}

TEST_CASE("invariants") {
  Json doc = minimal_doc();
  doc["K"] = 1;
  CHECK(schema_error(doc) == "K must be ≥ 2");

  doc = minimal_doc();
  doc["source_mode"] = "side_by_side";
  CHECK(schema_error(doc) == "side_by_side requires exactly 2 objects");

  doc = minimal_doc();
  doc["objects"].push_back(doc["objects"][0]);
  doc["objects"][1]["id"] = "cup";
  doc["target"]["placements"].push_back({{"object_id", "cup"}, {"center", {10, 10}}, {"z", 0}});
  CHECK(schema_error(doc).find("z_order tie") != std::string::npos);

  doc["target"]["placements"][1]["z"] = 1;
  doc["target"]["placements"][1]["object_id"] = "ghost";
  CHECK_THROWS_AS(parse_sample_spec(doc, "."), SchemaError);

  doc = minimal_doc();
  doc["canvas"] = {{"w", 40}, {"h", 40}};
  doc["objects"].push_back(doc["objects"][0]);
  doc["objects"][1]["id"] = "cup";
  doc["target"]["placements"].push_back({{"object_id", "cup"}, {"center", {10, 10}}, {"z", 1}});
  CHECK(schema_error(doc).find("exceeds canvas capacity 1") != std::string::npos);

  doc = minimal_doc();
  doc["target"]["placements"][0]["relight_t"] = 1.5;
  CHECK(schema_error(doc).find("relight_t") != std::string::npos);

  doc = minimal_doc();
  doc["target"]["placements"] = Json::array();
  CHECK(schema_error(doc).find("no target placement") != std::string::npos);
}

TEST_CASE("subject_pair needs its pair block") {
  Json doc = minimal_doc();
  doc["source_mode"] = "subject_pair";
  CHECK_THROWS_AS(parse_sample_spec(doc, "."), SchemaError);
  doc["pair"] = {{"first", "a.png"}, {"last", "b.png"}, {"confidence", {0.9, 0.8}}};
  const SampleSpec s = parse_sample_spec(doc, ".");
  REQUIRE(s.pair);
  CHECK(s.pair->confidence_last == 0.8);
  doc["source_mode"] = "manual_design";
  CHECK_THROWS_AS(parse_sample_spec(doc, "."), InvariantError);
}

TEST_CASE("asset checks catch dangling and transparent cutouts") {
  TempDir tmp;
  SampleSpec s = parse_sample_spec(minimal_doc(), tmp.path());
  CHECK_THROWS_WITH_AS(validate_spec(s, true), doctest::Contains("dangling asset reference"), SchemaError);
  io::write_png(tmp / "mug.png", testing::solid_rgba(8, 8, {1, 2, 3}, 0));
  CHECK_THROWS_WITH_AS(validate_spec(s, true), doctest::Contains("empty alpha"), InvariantError);
  io::write_png(tmp / "mug.png", testing::solid_rgba(8, 8, {1, 2, 3}));
  CHECK_NOTHROW(validate_spec(s, true));
  s.objects[0].relit_variants = {"warm.png"};
  io::write_png(tmp / "warm.png", testing::solid_rgba(9, 8, {1, 2, 3}));
  CHECK_THROWS_WITH_AS(validate_spec(s, true), doctest::Contains("does not match"), InvariantError);
}

TEST_CASE("file io and malformed json") {
  TempDir tmp;
  const SampleSpec s = parse_sample_spec(minimal_doc(), tmp.path());
  io::write_png(tmp / "mug.png", testing::solid_rgba(4, 4, {1, 2, 3}));
  write_sample_spec(s, tmp / "spec.json");
  CHECK(load_sample_spec(tmp / "spec.json") == s);
  std::ofstream(tmp / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_sample_spec(tmp / "bad.json"), SchemaError);
  CHECK_THROWS_AS(load_sample_spec(tmp / "none.json"), IoError);
}

TEST_CASE("write_sample layout and validate_output") {
  TempDir tmp;
  SampleSpec spec = parse_sample_spec(minimal_doc(), tmp.path());
  spec.K = 3;
  SampleOutput out;
  out.sample_id = spec.sample_id;
  for (int k = 0; k < 3; ++k) out.frames.push_back(solid_rgb(spec.canvas, {0, 0, 0}));
  out.first_frame = out.frames[0];
  out.object_images.push_back(solid_rgb({4, 4}, {255, 255, 255}));
  out.caption = "<OBJ>a red mug</OBJ> on <BG>grey</BG>.";
  out.supervised_frames = {0, 1, 2};
  const auto dir = write_sample(out, tmp / "out");
  CHECK(fs::is_regular_file(dir / "frames" / "frame_0002.png"));
  CHECK(fs::is_regular_file(dir / "conditioning" / "obj_00.png"));
  CHECK(testing::slurp(dir / "caption.txt") == out.caption + "\n");
  CHECK(validate_output(dir, spec).empty());
  CHECK_THROWS_AS(write_sample(out, tmp / "out"), IoError);
  CHECK_NOTHROW(write_sample(out, tmp / "out", true));

  out.supervised_frames = {2};
  write_sample(out, tmp / "out", true);
  const auto v = validate_output(dir, spec);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "non-pair modes supervise every frame");

  out.supervised_frames = {0, 1};
  write_sample(out, tmp / "out", true);
  CHECK(validate_output(dir, spec)[0] == "supervised_frames must include the last frame K-1=2");

  spec.K = 4;
  out.supervised_frames = {0, 1, 2};
  write_sample(out, tmp / "out", true);
  CHECK(validate_output(dir, spec)[0] == "frame count 3 ≠ K=4");
}

}  // TEST_SUITE
