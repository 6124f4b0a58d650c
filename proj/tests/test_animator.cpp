#include <doctest.h>

#include <cmath>

#include "pforge/animator.hpp"
#include "support.hpp"

using namespace pforge;
using testing::TempDir;

namespace {

Placement place(const std::string& id, Vec2 c, double scale = 1.0, double rot = 0.0, int z = 0,
                double relight = 0.0) {
  Placement p;
  p.object_id = id;
  p.center = c;
  p.scale = scale;
  p.rotation_deg = rot;
  p.z = z;
  p.relight_t = relight;
  return p;
}

TimelineRequest two_objects(int K) {
  TimelineRequest r;
  r.K = K;
  r.canvas = {200, 100};
  r.initial = {place("a", {20, 20}, 0.5, 350.0), place("b", {180, 80})};
  r.target.placements = {place("a", {100, 50}, 1.5, 10.0, 4), place("b", {60, 40}, 1.0, 0.0, -2, 1.0)};
  return r;
}

}  // namespace

TEST_SUITE("animator") {

TEST_CASE("frame parameter") {
  CHECK(frame_param(0, 9) == 0.0);
  CHECK(frame_param(4, 9) == 0.5);
  CHECK(frame_param(8, 9) == 1.0);
  CHECK_THROWS_AS(frame_param(0, 1), InvariantError);
}

TEST_CASE("shortest rotation") {
  CHECK(shortest_rotation(350.0, 10.0) == doctest::Approx(20.0));
  CHECK(shortest_rotation(10.0, 350.0) == doctest::Approx(-20.0));
  CHECK(shortest_rotation(0.0, 180.0) == -180.0);
  CHECK(shortest_rotation(90.0, -90.0) == -180.0);
  CHECK(shortest_rotation(0.0, 720.0 + 45.0) == doctest::Approx(45.0));
  CHECK(shortest_rotation(30.0, 30.0) == 0.0);
}

TEST_CASE("linear schedule with exact endpoints") {
  const Timeline tl = plan_timeline(two_objects(9));
  REQUIRE(tl.tracks.size() == 2);
  const Track& a = *tl.find("a");
  CHECK(a.kind == TrackKind::conditioning);
  CHECK(a.frames.front().transform == to_transform(place("a", {20, 20}, 0.5, 350.0)));
  CHECK(a.frames.back().transform == to_transform(two_objects(9).target.placements[0]));
  CHECK(a.frames[4].white_box_alpha == 0.5);
  CHECK(a.frames[4].transform.translation == Vec2{60, 35});
  CHECK(a.frames[4].transform.scale == doctest::Approx(1.0));
  CHECK(a.frames[4].transform.rotation_deg == doctest::Approx(360.0));
  for (int k = 1; k < 9; ++k) CHECK(a.frames[k].white_box_alpha < a.frames[k - 1].white_box_alpha);
  CHECK(a.frames.back().white_box_alpha == 0.0);

  const Track& b = *tl.find("b");
  CHECK(b.rank == 0);
  CHECK(a.rank == 1);
  CHECK(b.frames[0].relight_t == 0.0);
  CHECK(b.frames[4].relight_t == 0.5);
  CHECK(b.frames[8].relight_t == 1.0);
  CHECK(b.frames[2].shadow_alpha == 0.25);

  CHECK(tl.background_fade == std::vector<double>(9, 1.0));
  CHECK(tl.supervised_frames.size() == 9);
}

TEST_CASE("plain white opening fades the background in") {
  TimelineRequest r = two_objects(5);
  r.initial_canvas = InitialCanvas::plain_white;
  const Timeline tl = plan_timeline(r);
  CHECK(tl.background_fade == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("subject pair supervises only the last frame") {
  TimelineRequest r = two_objects(7);
  r.mode = SourceMode::subject_pair;
  CHECK(plan_timeline(r).supervised_frames == std::vector<int>{6});
}

TEST_CASE("inconsistent requests are rejected") {
  TimelineRequest r = two_objects(5);
  r.initial.pop_back();
  CHECK_THROWS_WITH(plan_timeline(r), "object 'b' has a target but no initial placement");
  r = two_objects(5);
  r.fly_in = {"b"};
  CHECK_THROWS_AS(plan_timeline(r), InvariantError);
  r = two_objects(5);
  r.initial.push_back(place("ghost", {1, 1}));
  CHECK_THROWS_AS(plan_timeline(r), InvariantError);
  r = two_objects(5);
  r.initial.pop_back();
  r.fly_in = {"b"};
  CHECK_THROWS_WITH(plan_timeline(r), "fly-in object 'b' lacks a raster size");
}

TEST_CASE("fly-in starts fully off canvas on the outward ray") {
  Rng rng(4);
  const Size canvas{200, 120};
  for (int trial = 0; trial < 200; ++trial) {
    const Placement p = place("d", {rng.uniform(0, 200), rng.uniform(0, 120)}, rng.uniform(0.5, 2),
                              rng.uniform(-60, 60));
    const Size raster{static_cast<int>(rng.between(5, 60)), static_cast<int>(rng.between(5, 60))};
    const Vec2 s = fly_in_start(p, raster, canvas);
    Placement moved = p;
    moved.center = s;
    const Quad q = destination_quad(raster, to_transform(moved));
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    for (const auto& c : q) {
      x0 = std::min(x0, c.x);
      y0 = std::min(y0, c.y);
      x1 = std::max(x1, c.x);
      y1 = std::max(y1, c.y);
    }
    CHECK((x1 <= 0.0 || y1 <= 0.0 || x0 >= 200.0 || y0 >= 120.0));
    const Vec2 out = p.center - Vec2{100, 60};
    const Vec2 step = s - p.center;
    if (norm(out) > 1e-6) CHECK(std::fabs(out.x * step.y - out.y * step.x) < 1e-6 * norm(out) * norm(step));
  }
  const Vec2 up = fly_in_start(place("d", {100, 60}), {10, 10}, canvas);
  CHECK(up.x == 100.0);
  CHECK(up.y < -5.0);
}

TEST_CASE("fly-in and fading tracks") {
  TimelineRequest r = two_objects(5);
  r.initial.pop_back();
  r.fly_in = {"b"};
  r.raster_sizes["b"] = {20, 20};
  r.fading = {place("old", {150, 50}, 1.0, 0.0, 99)};
  const Timeline tl = plan_timeline(r);
  CHECK(tl.find("b")->kind == TrackKind::fly_in);
  const Track& old = *tl.find("old");
  CHECK(old.kind == TrackKind::fading);
  CHECK(old.frames[0].cutout_alpha == 1.0);
  CHECK(old.frames[4].cutout_alpha == 0.0);
  CHECK(old.frames[2].transform == old.frames[0].transform);
  r.fading = {place("a", {1, 1})};
  CHECK_THROWS_AS(plan_timeline(r), InvariantError);
}

TEST_CASE("relight blend") {
  const RgbaImage a = testing::solid_rgba(4, 4, {0, 100, 200});
  const RgbaImage b = testing::solid_rgba(4, 4, {100, 100, 0});
  const RgbaImage c = testing::solid_rgba(4, 4, {250, 0, 0});
  CHECK(relight_blend({a, b}, 0.0) == a);
  CHECK(relight_blend({a, b}, 1.0) == b);
  const RgbaImage mid = relight_blend({a, b}, 0.5);
  CHECK(mid.at(1, 1)[0] == 50);
  CHECK(mid.at(1, 1)[2] == 100);
  CHECK(relight_blend({a, b, c}, 0.5) == b);
  CHECK(relight_blend({a, b, c}, 1.0) == c);
  CHECK(relight_blend({a}, 0.7) == a);

  // Premultiplied: a transparent endpoint does not tint the color.
  const RgbaImage clear = testing::solid_rgba(4, 4, {255, 255, 255}, 0);
  const RgbaImage half = relight_blend({a, clear}, 0.5);
  CHECK(half.at(0, 0)[3] == 128);
  CHECK(half.at(0, 0)[2] == 200);
  CHECK_THROWS_AS(relight_blend({a, testing::solid_rgba(3, 4, {})}, 0.5), InvariantError);
}

TEST_CASE("rendered endpoints") {
  TimelineRequest r = two_objects(6);
  const Timeline tl = plan_timeline(r);
  AssetMap assets;
  const RgbaImage cut_a = testing::ellipse_rgba(30, 20, {200, 30, 30});
  assets["a"].variants = {cut_a};
  assets["a"].white_box = std::make_shared<const RgbaImage>(white_box_embed(cut_a, 0.1));
  assets["b"].variants = {testing::solid_rgba(16, 16, {30, 30, 200}), testing::solid_rgba(16, 16, {30, 200, 30})};
  assets["b"].shadow = render_shadow(assets["b"].variants[0], {}, {});
  const RgbImage bg = solid_rgb(r.canvas, {120, 120, 120});
  const auto frames = render_video(tl, assets, bg, bg);
  REQUIRE(frames.size() == 6);
  CHECK(frames.back() == composite_frame(bg, target_layers(r.target, assets)));

  // Frame 0: white box fully opaque under the cutout, no shadow, first lighting variant.
  std::vector<Layer> first;
  first.push_back({assets["a"].white_box, to_transform(r.initial[0]), 1.0, 2});
  first.push_back({std::make_shared<const RgbaImage>(cut_a), to_transform(r.initial[0]), 1.0, 3});
  first.push_back({std::make_shared<const RgbaImage>(assets["b"].variants[0]), to_transform(r.initial[1]), 1.0, 1});
  CHECK(frames.front() == composite_frame(bg, first));
  CHECK_THROWS_AS(render_video(tl, {}, bg, bg), InvariantError);
}

TEST_CASE("shadow transform keeps the offset at identity pose") {
  const RgbaImage cut = testing::solid_rgba(10, 20, {1, 1, 1});
  const Shadow s = render_shadow(cut, {180.0, 45.0}, {});
  const Transform2D obj = Transform2D::identity({10, 20});
  const Transform2D st = shadow_transform(obj, {10, 20}, s);
  const Quad q = destination_quad(size_of(s.raster), st);
  CHECK(q[0].x == doctest::Approx(s.offset.x));
  CHECK(q[0].y == doctest::Approx(s.offset.y));
}

TEST_CASE("crossfade pair") {
  const RgbImage a = solid_rgb({3, 2}, {0, 0, 0});
  const RgbImage b = solid_rgb({3, 2}, {100, 200, 255});
  const PairVideo v = crossfade_pair(a, b, 5);
  REQUIRE(v.frames.size() == 5);
  CHECK(v.frames.front() == a);
  CHECK(v.frames.back() == b);
  CHECK(v.frames[2].at(0, 0)[0] == 50);
  CHECK(v.frames[1].at(0, 0)[2] == 64);
  CHECK(v.supervised_frames == std::vector<int>{4});
  CHECK_THROWS_AS(crossfade_pair(a, solid_rgb({2, 2}, {}), 5), InvariantError);
}

TEST_CASE("interpolated pair frames are checked") {
  TempDir tmp;
  for (int k = 0; k < 3; ++k) io::write_png(tmp / ("f" + std::to_string(k) + ".png"), solid_rgb({4, 4}, {}));
  CHECK(load_interpolated_pair(tmp.path(), 3, {4, 4}).frames.size() == 3);
  CHECK_THROWS_WITH(load_interpolated_pair(tmp.path(), 4, {4, 4}), "interpolated frame count 3 ≠ K=4");
  CHECK_THROWS_AS(load_interpolated_pair(tmp.path(), 3, {5, 4}), InvariantError);
}

}  // TEST_SUITE
