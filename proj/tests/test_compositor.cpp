#include <doctest.h>

#include <cmath>

#include "pforge/compositor.hpp"
#include "support.hpp"

using namespace pforge;

namespace {

RgbaImage noise_rgba(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  RgbaImage img(w, h);
  for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

Transform2D at(Vec2 center, double scale = 1.0, double rot = 0.0) {
  Transform2D t;
  t.translation = center;
  t.scale = scale;
  t.rotation_deg = rot;
  return t;
}

Layer layer_of(const RgbaImage& img, Transform2D t, int z, double alpha = 1.0) {
  return {std::make_shared<const RgbaImage>(img), t, alpha, z};
}

double shoelace(const Quad& q) {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) a += q[i].x * q[(i + 1) % 4].y - q[(i + 1) % 4].x * q[i].y;
  return std::fabs(a) / 2.0;
}

}  // namespace

TEST_SUITE("compositor") {

TEST_CASE("identity warp reproduces the raster") {
  const RgbaImage src = noise_rgba(17, 11, 1);
  const RgbaImage out = warp(src, Transform2D::identity({17, 11}), {17, 11});
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 17; ++x) {
      const std::uint8_t* a = src.at(x, y);
      const std::uint8_t* b = out.at(x, y);
      REQUIRE(a[3] == b[3]);
      if (a[3] > 0) REQUIRE(std::equal(a, a + 3, b));
    }
}

TEST_CASE("integer translation shifts pixels exactly") {
  const RgbaImage src = testing::solid_rgba(4, 3, {10, 200, 30});
  const RgbaImage out = warp(src, at({7.0, 4.5}), {12, 10});
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x) {
      const bool inside = x >= 5 && x < 9 && y >= 3 && y < 6;
      CHECK(out.at(x, y)[3] == (inside ? 255 : 0));
      if (inside) CHECK(out.at(x, y)[1] == 200);
    }
}

TEST_CASE("positive rotation is clockwise on screen") {
  RgbaImage src(3, 1);
  const Rgb colors[3] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}};
  for (int x = 0; x < 3; ++x) {
    std::uint8_t* p = src.at(x, 0);
    p[0] = colors[x].r;
    p[1] = colors[x].g;
    p[2] = colors[x].b;
    p[3] = 255;
  }
  const RgbaImage out = warp(src, at({5.5, 5.5}, 1.0, 90.0), {10, 10});
  CHECK(out.at(5, 4)[0] == 255);
  CHECK(out.at(5, 5)[1] == 255);
  CHECK(out.at(5, 6)[2] == 255);
  CHECK(out.at(4, 5)[3] == 0);
  CHECK(out.at(6, 5)[3] == 0);
}

TEST_CASE("destination quad and validity") {
  Transform2D t = at({50, 50}, 2.0);
  const Quad q = destination_quad({10, 6}, t);
  CHECK(q[0] == Vec2{40, 44});
  CHECK(q[2] == Vec2{60, 56});
  CHECK(quad_is_valid(q));
  Quad bow = q;
  std::swap(bow[1], bow[2]);
  CHECK_FALSE(quad_is_valid(bow));
  t.perspective[0] = {25, 13};
  CHECK_FALSE(quad_is_valid(destination_quad({10, 6}, t)));
  CHECK_THROWS_AS(rasterize(testing::solid_rgba(10, 6, {1, 1, 1}), t), InvariantError);
}

TEST_CASE("warped alpha mass matches the destination area") {
  const RgbaImage src = testing::solid_rgba(40, 30, {9, 9, 9});
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Transform2D t = at({100, 100}, rng.uniform(0.5, 2.0), rng.uniform(-180, 180));
    if (trial % 2)
      for (auto& c : t.perspective) c = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const WarpedLayer l = rasterize(src, t);
    CHECK(l.alpha_sum() == doctest::Approx(shoelace(destination_quad({40, 30}, t))).epsilon(0.01));
  }
}

TEST_CASE("centroid of a symmetric cutout lands on the translation") {
  const RgbaImage src = testing::ellipse_rgba(21, 14, {200, 10, 10});
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec2 c{rng.uniform(40, 60), rng.uniform(40, 60)};
    const WarpedLayer l = rasterize(src, at(c, rng.uniform(0.6, 1.8), rng.uniform(-90, 90)));
    const Vec2 got = l.alpha_centroid();
    CHECK(norm(got - c) < 0.1);
  }
}

TEST_CASE("over operator matches a double-precision oracle") {
  const RgbImage bg = solid_rgb({3, 3}, {40, 80, 120});
  const RgbaImage fg = testing::solid_rgba(3, 3, {200, 100, 0}, 128);
  const RgbImage out = composite_frame(bg, {layer_of(fg, Transform2D::identity({3, 3}), 0, 0.5)});
  const double a = 128.0 / 255.0 * 0.5;
  CHECK(out.at(1, 1)[0] == round_to_u8(200 * a + 40 * (1 - a)));
  CHECK(out.at(1, 1)[1] == round_to_u8(100 * a + 80 * (1 - a)));
  CHECK(out.at(1, 1)[2] == round_to_u8(0 * a + 120 * (1 - a)));
}

TEST_CASE("layers stack by z, not list order") {
  const RgbImage bg = solid_rgb({6, 6}, {0, 0, 0});
  const RgbaImage red = testing::solid_rgba(4, 4, {255, 0, 0});
  const RgbaImage blue = testing::solid_rgba(4, 4, {0, 0, 255});
  const RgbImage a = composite_frame(bg, {layer_of(red, at({3, 3}), 5), layer_of(blue, at({3, 3}), -1)});
  CHECK(a.at(3, 3)[0] == 255);
  const RgbImage b = composite_frame(bg, {layer_of(blue, at({3, 3}), -1), layer_of(red, at({3, 3}), 5)});
  CHECK(a == b);
  CHECK_THROWS_WITH(composite_frame(bg, {layer_of(red, at({3, 3}), 2), layer_of(blue, at({3, 3}), 2)}),
                    "z-order tie at z=2");
  CHECK_THROWS_AS(composite_frame(bg, {layer_of(red, at({3, 3}), 0, 1.5)}), InvariantError);
  CHECK(composite_frame(bg, {layer_of(red, at({3, 3}), 0, 0.0)}) == bg);
}

TEST_CASE("layers partly off canvas are clipped") {
  const RgbImage bg = solid_rgb({8, 8}, {0, 0, 0});
  const RgbaImage red = testing::solid_rgba(4, 4, {255, 0, 0});
  const RgbImage out = composite_frame(bg, {layer_of(red, at({0, 0}), 0), layer_of(red, at({-50, 3}), 1)});
  CHECK(out.at(1, 1)[0] == 255);
  CHECK(out.at(2, 2)[0] == 0);
}

TEST_CASE("canvas mix endpoints") {
  const RgbImage a = solid_rgb({5, 5}, {10, 20, 30});
  const RgbImage b = solid_rgb({5, 5}, {200, 210, 220});
  FrameCanvas c(a);
  c.mix_towards(FrameCanvas(b), 0.0f);
  CHECK(c.to_rgb() == a);
  c.mix_towards(FrameCanvas(b), 1.0f);
  CHECK(c.to_rgb() == b);
  FrameCanvas d(a);
  d.mix_towards(FrameCanvas(b), 0.5f);
  CHECK(d.to_rgb().at(0, 0)[0] == 105);
}

TEST_CASE("white box embed") {
  RgbaImage cut = testing::ellipse_rgba(20, 10, {0, 0, 255});
  const RgbaImage box = white_box_embed(cut, 0.1);
  CHECK(size_of(box) == Size{24, 12});
  for (std::size_t i = 3; i < box.bytes().size(); i += 4) REQUIRE(box.bytes()[i] == 255);
  CHECK(box.at(0, 0)[2] == 255);
  CHECK(box.at(0, 0)[0] == 255);
  CHECK(box.at(12, 6)[0] == 0);
  CHECK(box.at(12, 6)[2] == 255);
  CHECK(box.at(2, 2)[0] == 255);
  CHECK_THROWS_AS(white_box_embed(cut, 0.7), InvariantError);
}

TEST_CASE("scatter layout is disjoint, in bounds and seeded") {
  const std::vector<Size> items = {{30, 20}, {25, 25}, {10, 40}, {40, 10}};
  const Size canvas{128, 96};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = scatter_layout(items, canvas, seed, 500);
    CHECK(c == scatter_layout(items, canvas, seed, 500));
    std::vector<Rect> rects;
    for (std::size_t i = 0; i < items.size(); ++i) {
      rects.push_back(rect_around(c[i], items[i]));
      CHECK(contains(Rect{0, 0, canvas.width, canvas.height}, rects.back()));
    }
    for (std::size_t i = 0; i < rects.size(); ++i)
      for (std::size_t j = i + 1; j < rects.size(); ++j) CHECK_FALSE(overlaps(rects[i], rects[j]));
  }
  const std::vector<Size> huge = {{200, 10}};
  CHECK_THROWS_WITH_AS(scatter_layout(huge, canvas, 0, 10), doctest::Contains("does not fit the canvas"),
                       InvariantError);
  const std::vector<Size> crowd = {{100, 90}, {100, 90}};
  CHECK_THROWS_AS(scatter_layout(crowd, canvas, 0, 50), PlacementError);
}

TEST_CASE("shear preserves silhouette mass") {
  const RgbaImage cut = testing::ellipse_rgba(15, 22, {1, 1, 1});
  double mass = 0.0;
  for (std::size_t i = 3; i < cut.bytes().size(); i += 4) mass += cut.bytes()[i] / 255.0;
  for (double shear : {-2.0, -0.3, 0.0, 0.77, 2.0}) {
    int origin = 0;
    const FloatPlane p = shear_silhouette(cut, shear, &origin);
    CHECK(p.sum() == doctest::Approx(mass).epsilon(1e-6));
    CHECK(origin <= 0);
  }
  int origin = 0;
  const FloatPlane flat = shear_silhouette(cut, 0.0, &origin);
  CHECK(origin == 0);
  CHECK(flat.values[static_cast<std::size_t>(11) * flat.width + 7] == 1.0f);
}

TEST_CASE("shadows fall away from the light") {
  const RgbaImage cut = testing::solid_rgba(20, 40, {50, 50, 50});
  ShadowParams params;
  const Shadow from_left = render_shadow(cut, {180.0, 40.0}, params);
  const Shadow from_right = render_shadow(cut, {0.0, 40.0}, params);
  const Shadow overhead = render_shadow(cut, {180.0, 90.0}, params);
  CHECK(from_left.cast.x > 5.0);
  CHECK(from_right.cast.x < -5.0);
  CHECK(from_left.cast.x == doctest::Approx(-from_right.cast.x).epsilon(0.02));
  CHECK(std::fabs(overhead.cast.x) < 0.5);
  // Shadow centroid sits near the base, below the silhouette centroid.
  CHECK(overhead.cast.y > 10.0);
  for (std::size_t i = 0; i < from_left.raster.bytes().size(); i += 4)
    REQUIRE(from_left.raster.bytes()[i] == 0);
  CHECK_THROWS_AS(render_shadow(cut, {90.0, 0.0}, params), InvariantError);
  params.opacity = 0.0;
  CHECK_THROWS_AS(render_shadow(cut, {90.0, 30.0}, params), InvariantError);
}

TEST_CASE("transparent cutout casts no shadow") {
  const RgbaImage cut = testing::solid_rgba(8, 8, {1, 1, 1}, 0);
  const Shadow s = render_shadow(cut, {}, {});
  CHECK(size_of(s.raster) == Size{8, 8});
  for (std::size_t i = 3; i < s.raster.bytes().size(); i += 4) CHECK(s.raster.bytes()[i] == 0);
}

}  // TEST_SUITE
