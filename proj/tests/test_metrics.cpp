#include <doctest.h>

#include <cmath>

#include "pforge/metrics.hpp"
#include "support.hpp"

using namespace pforge;
using testing::rect_mask;
using testing::TempDir;

namespace {

DetectionRecord det(const std::string& label, double conf, Rect box, Size img = {64, 64}) {
  return make_detection(label, conf, rect_mask(img, box));
}

double oracle_chamfer(const RgbImage& img, const Mask& m, const std::vector<Rgb>& targets) {
  double sum = 0.0;
  long long n = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!*m.at(x, y)) continue;
      const std::uint8_t* p = img.at(x, y);
      double best = INFINITY;
      for (const auto& t : targets)
        best = std::min(best, std::sqrt(std::pow(p[0] - t.r, 2) + std::pow(p[1] - t.g, 2) + std::pow(p[2] - t.b, 2)));
      sum += best;
      ++n;
    }
  return sum / n;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("missing rate matching") {
  const std::vector<ExpectedObject> exp = {{"Mug", ""}, {"spoon", ""}, {"mug", ""}};
  const std::vector<DetectionRecord> dets = {det("mug", 0.9, {0, 0, 5, 5}), det("MUG", 0.3, {10, 0, 5, 5}),
                                             det("spoon", 0.5, {20, 0, 5, 5}), det("bowl", 0.99, {30, 0, 5, 5})};
  const MissingResult r = missing_rate(exp, dets, 0.35);
  CHECK(r.expected == 3);
  CHECK(r.missing == 1);
  REQUIRE(r.matches.size() == 2);
  CHECK(r.matches[0].expected == 0);
  CHECK(r.matches[0].detection == 0);
  CHECK(r.matches[1].detection == 2);
  CHECK(r.rate() == doctest::Approx(1.0 / 3.0));
  CHECK(missing_rate(exp, dets, 0.3).missing == 0);
  CHECK(missing_rate(exp, {}, 0.3).rate() == 1.0);
  CHECK_THROWS_AS(missing_rate({}, dets, 0.3), InvariantError);
}

TEST_CASE("cosine and identity scores") {
  const std::vector<float> a = {1, 2, 3}, b = {-1, -2, -3}, c = {3, 0, -1};
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(cosine(a, b) == doctest::Approx(-1.0));
  CHECK(cosine(a, c) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine(a, std::vector<float>{1, 2}), InvariantError);
  CHECK_THROWS_AS(cosine(a, std::vector<float>{0, 0, 0}), InvariantError);
  CHECK_FALSE(identity_scores({}).has_value());
  CHECK(*identity_scores({{a, a}, {a, b}}) == doctest::Approx(0.0));
}

TEST_CASE("mse over the background mask") {
  const RgbImage a = solid_rgb({4, 4}, {0, 0, 0});
  RgbImage b = a;
  b.at(0, 0)[0] = 255;
  Mask m(4, 4, 1);
  CHECK(mse_bg(a, b, m) == doctest::Approx(1.0 / 48.0));
  *m.at(0, 0) = 0;
  CHECK(mse_bg(a, b, m) == 0.0);
  CHECK_THROWS_AS(mse_bg(a, b, Mask(4, 4)), InvariantError);
  CHECK_THROWS_AS(mse_bg(a, solid_rgb({3, 4}, {}), m), InvariantError);
}

TEST_CASE("chamfer to colors") {
  Rng rng(6);
  RgbImage img(8, 8);
  for (auto& v : img.bytes()) v = static_cast<std::uint8_t>(rng.below(256));
  Mask m(8, 8);
  for (auto& v : m.bytes()) v = static_cast<std::uint8_t>(rng.below(2));
  *m.at(0, 0) = 1;
  const std::vector<Rgb> targets = {{10, 200, 30}, {250, 5, 90}, {0, 0, 0}};
  CHECK(chamfer_color(img, m, targets) == doctest::Approx(oracle_chamfer(img, m, targets)).epsilon(1e-12));
  CHECK(chamfer_color(solid_rgb({2, 2}, {3, 4, 0}), Mask(2, 2, 1), std::vector<Rgb>{{0, 0, 0}}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(chamfer_color(img, m, {}), InvariantError);
}

TEST_CASE("aggregation rules") {
  MetricRow a, b, c;
  a.background_kind = BackgroundKind::photo;
  a.expected = 4;
  a.missing = 1;
  a.clip_i = 0.8;
  a.mse_bg = 0.02;
  b.background_kind = BackgroundKind::plain_color;
  b.expected = 1;
  b.missing = 1;
  b.clip_i = 0.6;
  b.chamfer = 12.0;
  c.background_kind = BackgroundKind::plain_color;
  c.expected = 2;
  const MetricSummary s = aggregate({a, b, c});
  CHECK(*s.missing == doctest::Approx(2.0 / 5.0));
  CHECK(*s.clip_i == doctest::Approx(0.7));
  CHECK_FALSE(s.dino);
  CHECK(*s.mse_bg == doctest::Approx(0.02));
  CHECK(*s.chamfer == doctest::Approx(12.0));
  CHECK(s.skipped_missing == 1);
  CHECK(s.skipped_clip_i == 1);
  CHECK(s.skipped_dino == 3);
  CHECK(s.skipped_chamfer == 1);
  CHECK(s.skipped_mse_bg == 0);
  const std::string table = report_table({a, b, c}, s);
  CHECK(table.find("ALL") != std::string::npos);
  CHECK(table.find("0.4000") != std::string::npos);
  const Json j = report_json({a, b, c}, s);
  CHECK(j["aggregate"]["dino"].is_null());
  CHECK(j["cases"][0]["background"] == "photo");
}

TEST_CASE("embedding files round trip") {
  TempDir tmp;
  Embeddings e{3, 2, "clip-vit", {1.0f, -2.5f, 0.0f, 3.25f, 1e-7f, -0.0f}};
  write_embeddings(tmp / "e.bin", e);
  CHECK(fs::file_size(tmp / "e.bin") == 24);
  const Embeddings r = read_embeddings(tmp / "e.bin");
  CHECK(r.dim == 3);
  CHECK(r.count == 2);
  CHECK(r.source_tag == "clip-vit");
  CHECK(r.values == e.values);
  std::ofstream(tmp / "e.bin", std::ios::app) << "x";
  CHECK_THROWS_AS(read_embeddings(tmp / "e.bin"), IoError);
}

TEST_CASE("crops come from clamped detection boxes") {
  TempDir tmp;
  RgbImage gen = solid_rgb({64, 64}, {0, 0, 0});
  gen.at(60, 60)[0] = 77;
  EvalCase c;
  c.case_id = "c1";
  c.expected_objects = {{"mug", "refs/mug.png"}};
  c.base_dir = tmp.path();
  const std::vector<DetectionRecord> dets = {det("mug", 0.9, {58, 58, 6, 6})};
  const auto matched = missing_rate(c.expected_objects, dets, 0.35);
  const auto orders = prepare_crops(c, gen, dets, matched, tmp / "crops");
  REQUIRE(orders.size() == 1);
  CHECK(fs::path(orders[0].crop).is_absolute());
  CHECK(fs::path(orders[0].crop).filename() == "c1_obj00.png");
  const RgbImage crop = io::read_rgb(orders[0].crop);
  CHECK(size_of(crop) == Size{6, 6});
  CHECK(crop.at(2, 2)[0] == 77);
  CHECK(clamp_box({-5, -5, 10, 10}, {64, 64}) == Rect{0, 0, 5, 5});
  CHECK_THROWS_AS(clamp_box({70, 0, 5, 5}, {64, 64}), InvariantError);
}

TEST_CASE("score_case end to end") {
  TempDir tmp;
  RgbImage gen = solid_rgb({16, 16}, {10, 0, 0});
  io::write_png(tmp / "gen.png", gen);
  io::write_png(tmp / "ref.png", solid_rgb({16, 16}, {10, 0, 0}));
  io::write_png(tmp / "m.png", mask_to_gray(rect_mask({16, 16}, {2, 2, 4, 4})));
  write_json(tmp / "det.json", Json::parse(R"([{"label":"mug","confidence":0.8,"mask_path":"m.png"}])"));
  write_embeddings(tmp / "crops.bin", {2, 1, "t", {1, 0}});
  write_embeddings(tmp / "refs.bin", {2, 1, "t", {1, 1}});
  write_json(tmp / "cases.json", Json::parse(R"({"schema":"placid-forge/1","cases":[
    {"case_id":"plain","expected_objects":[{"label":"mug"},{"label":"cup"}],
     "background":{"kind":"plain_color","color":[0,0,0]},"generated_image":"gen.png",
     "detections":"det.json","clip_i":{"crops":"crops.bin","refs":"refs.bin"}},
    {"case_id":"photo","expected_objects":[{"label":"mug"}],
     "background":{"kind":"photo","path":"ref.png"},"generated_image":"gen.png","bg_mask":"m.png"}]})"));
  const auto cases = load_eval_cases(tmp / "cases.json");
  REQUIRE(cases.size() == 2);
  const MetricRow plain = score_case(cases[0], 0.35);
  CHECK(*plain.missing == 1);
  CHECK(*plain.clip_i == doctest::Approx(std::sqrt(0.5)));
  CHECK(*plain.chamfer == doctest::Approx(10.0));
  CHECK_FALSE(plain.mse_bg);
  const MetricRow photo = score_case(cases[1], 0.35);
  CHECK_FALSE(photo.missing);
  CHECK(*photo.mse_bg == 0.0);

  write_json(tmp / "bad.json", Json::parse(R"([{"case_id":"x","expected_objects":[],
    "background":{"kind":"procedural"},"generated_image":"gen.png"}])"));
  CHECK_THROWS_AS(load_eval_cases(tmp / "bad.json"), SchemaError);
}

}  // TEST_SUITE
