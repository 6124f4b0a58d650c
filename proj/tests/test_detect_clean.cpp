#include <doctest.h>

#include "pforge/detect_clean.hpp"
#include "support.hpp"

using namespace pforge;
using testing::rect_mask;
using testing::TempDir;

namespace {

constexpr Size kImg{100, 100};

DetectionRecord det(const std::string& label, double conf, Rect r) {
  return make_detection(label, conf, rect_mask(kImg, r));
}

Mask brute_dilate(const Mask& m, int r) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      for (int dy = -r; dy <= r && !*out.at(x, y); ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = x + dx, sy = y + dy;
          if (sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && *m.at(sx, sy)) {
            *out.at(x, y) = 1;
            break;
          }
        }
  return out;
}

}  // namespace

TEST_SUITE("detect_clean") {

TEST_CASE("make_detection derives the tight box") {
  const auto d = det("mug", 0.9, {10, 20, 5, 6});
  CHECK(d.box == Rect{10, 20, 5, 6});
  CHECK_THROWS_AS(make_detection("x", 0.5, Mask(4, 4)), InvariantError);
  CHECK_THROWS_AS(make_detection("x", 1.5, rect_mask({4, 4}, {0, 0, 1, 1})), InvariantError);
}

TEST_CASE("same-label records merge case-insensitively") {
  const auto out = clean_detections({det("Mug", 0.4, {0, 0, 10, 10}), det("mug", 0.8, {50, 50, 10, 10})}, kImg);
  REQUIRE(out.objects.size() == 1);
  CHECK(out.objects[0].label == "Mug");
  CHECK(out.objects[0].confidence == 0.8);
  CHECK(mask_area(out.objects[0].mask) == 200);
  CHECK(out.objects[0].sources == std::vector<int>{0, 1});
}

TEST_CASE("cross-label duplicates keep the more confident record") {
  const auto out = clean_detections({det("cup", 0.5, {0, 0, 20, 20}), det("mug", 0.9, {0, 0, 20, 19})}, kImg);
  REQUIRE(out.objects.size() == 1);
  CHECK(out.objects[0].label == "mug");
  REQUIRE(out.rejected.size() == 1);
  CHECK(out.rejected[0].reason == "duplicate of 'mug'");
  CHECK(out.rejected[0].indices == std::vector<int>{0});
}

TEST_CASE("contained small object is cut out of the larger one") {
  const auto out = clean_detections({det("table", 0.9, {0, 0, 60, 60}), det("mug", 0.8, {10, 10, 10, 10})}, kImg);
  REQUIRE(out.objects.size() == 2);
  const auto& table = out.objects[0].label == "table" ? out.objects[0] : out.objects[1];
  const auto& mug = out.objects[0].label == "mug" ? out.objects[0] : out.objects[1];
  CHECK(mask_area(table.mask) == 3600 - 100);
  CHECK(mask_area(mug.mask) == 100);
  CHECK(mask_intersection_area(table.mask, mug.mask) == 0);
}

TEST_CASE("minor overlap is removed from the smaller mask") {
  // 10x10 mug sharing a 2-px strip (20 px, below half) with a 30x30 box.
  const auto out = clean_detections({det("box", 0.9, {0, 0, 30, 30}), det("mug", 0.8, {28, 0, 10, 10})}, kImg);
  REQUIRE(out.objects.size() == 2);
  const auto& box = out.objects[0].label == "box" ? out.objects[0] : out.objects[1];
  const auto& mug = out.objects[0].label == "mug" ? out.objects[0] : out.objects[1];
  CHECK(mask_area(box.mask) == 900);
  CHECK(mask_area(mug.mask) == 80);
}

TEST_CASE("coverage gate is inclusive") {
  // 100x100 image: 50 px = 0.5%, 8000 px = 80%.
  CHECK(clean_detections({det("a", 0.9, {0, 0, 50, 1})}, kImg).objects.size() == 1);
  CHECK(clean_detections({det("a", 0.9, {0, 0, 49, 1})}, kImg).objects.empty());
  CHECK(clean_detections({det("a", 0.9, {0, 0, 100, 80})}, kImg).objects.size() == 1);
  const auto big = clean_detections({make_detection("a", 0.9, mask_union(rect_mask(kImg, {0, 0, 100, 80}),
                                                                          rect_mask(kImg, {0, 80, 1, 1})))},
                                    kImg);
  CHECK(big.objects.empty());
  REQUIRE(big.rejected.size() == 1);
  CHECK(big.rejected[0].reason == "coverage>80%");
}

TEST_CASE("bad parameters throw") {
  CleanParams p;
  p.min_cov = 0.9;
  CHECK_THROWS_AS(clean_detections({}, kImg, p), InvariantError);
  CHECK_THROWS_AS(clean_detections({make_detection("a", 0.5, rect_mask({5, 5}, {0, 0, 1, 1}))}, kImg),
                  InvariantError);
}

TEST_CASE("dilation matches a brute-force oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Mask m(37, 23);
    for (int i = 0; i < 6; ++i) *m.at(static_cast<int>(rng.below(37)), static_cast<int>(rng.below(23))) = 1;
    for (int r : {0, 1, 3, 7, 40}) CHECK(dilate_square(m, r) == brute_dilate(m, r));
  }
  CHECK_THROWS_AS(dilate_square(Mask(3, 3), -1), InvariantError);
}

TEST_CASE("inpaint mask dilates the union") {
  const auto out = clean_detections({det("a", 0.9, {10, 10, 10, 10}), det("b", 0.9, {70, 70, 8, 8})}, kImg);
  REQUIRE(out.objects.size() == 2);
  const Mask want = brute_dilate(mask_union(out.objects[0].mask, out.objects[1].mask), 5);
  CHECK(inpaint_mask(out, 5) == want);
}

TEST_CASE("extract_cutout crops tight with binary alpha") {
  RgbImage img = solid_rgb({10, 10}, {9, 8, 7});
  Mask m = rect_mask({10, 10}, {2, 3, 4, 2});
  *m.at(2, 3) = 0;
  const RgbaImage c = extract_cutout(img, m);
  CHECK(size_of(c) == Size{4, 2});
  CHECK(c.at(0, 0)[3] == 0);
  CHECK(c.at(1, 0)[3] == 255);
  CHECK(c.at(1, 0)[0] == 9);
}

TEST_CASE("load_detections reads masks and checks boxes") {
  TempDir tmp;
  io::write_png(tmp / "m0.png", mask_to_gray(rect_mask({20, 20}, {2, 2, 5, 5})));
  write_json(tmp / "d.json", Json::parse(R"([{"label":"mug","confidence":0.7,"box":[2,2,5,5],"mask_path":"m0.png"}])"));
  const auto d = load_detections(tmp / "d.json");
  REQUIRE(d.size() == 1);
  CHECK(d[0].box == Rect{2, 2, 5, 5});
  write_json(tmp / "e.json", Json::parse(R"({"schema":"placid-forge/1","detections":[{"label":"mug","confidence":0.7,"box":[2,2,5,6],"mask_path":"m0.png"}]})"));
  CHECK_THROWS_AS(load_detections(tmp / "e.json"), InvariantError);
}

}  // TEST_SUITE
