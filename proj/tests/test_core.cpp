#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "plot/core.hpp"

using namespace plot;

namespace {

InstanceMask block(int u0, int v0, int w, int h) {
  std::vector<Pixel> px;
  for (int v = v0; v < v0 + h; ++v)
    for (int u = u0; u < u0 + w; ++u) px.push_back({u, v});
  return InstanceMask(0, px, {64, 64}, 0.9, "Car");
}

}  // namespace

TEST_CASE("mask_iou") {
  const InstanceMask a = block(0, 0, 2, 2);
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, block(10, 10, 3, 3)) == 0.0);
  CHECK(mask_iou(a, block(1, 0, 2, 2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mask_iou(block(1, 0, 2, 2), a) == mask_iou(a, block(1, 0, 2, 2)));
  CHECK_THROWS_AS(mask_iou(std::vector<Pixel>{}, std::vector<Pixel>{}), Error);
}

TEST_CASE("mask pixels are sorted, deduplicated and bounds-checked") {
  InstanceMask m(0, {{3, 1}, {0, 0}, {3, 1}, {1, 0}}, {8, 8}, 0.5, "Car");
  REQUIRE(m.area() == 3);
  CHECK(m.pixels()[0] == Pixel{0, 0});
  CHECK(m.pixels()[2] == Pixel{3, 1});
  CHECK(m.contains({1, 0}));
  CHECK_FALSE(m.contains({2, 0}));
  CHECK_THROWS_AS(InstanceMask(0, {{8, 0}}, {8, 8}, 0.5, "Car"), Error);
  CHECK_THROWS_AS(InstanceMask(0, {}, {8, 8}, 0.5, "Car"), Error);
  CHECK_THROWS_AS(InstanceMask(0, {{0, 0}}, {8, 8}, 1.5, "Car"), Error);
}

TEST_CASE("box2d_iou") {
  const Box2D a(0, 0, 1, 1);
  CHECK(box2d_iou(a, a) == 1.0);
  CHECK(box2d_iou(a, Box2D(5, 5, 1, 1)) == 0.0);
  CHECK(box2d_iou(a, Box2D(0.5, 0, 1, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // touching edges
  CHECK(box2d_iou(a, Box2D(1, 0, 1, 1)) == 0.0);
}

TEST_CASE("box_from_mask uses inclusive extents") {
  const Box2D one = box_from_mask(std::vector<Pixel>{{5, 7}});
  CHECK(one.u_c() == 5.0);
  CHECK(one.v_c() == 7.0);
  CHECK(one.w() == 1.0);
  CHECK(one.h() == 1.0);

  const Box2D two = box_from_mask(std::vector<Pixel>{{0, 0}, {4, 2}});
  CHECK(two.u_c() == 2.0);
  CHECK(two.v_c() == 1.0);
  CHECK(two.w() == 5.0);
  CHECK(two.h() == 3.0);

  const Box2D full = box_from_mask(block(0, 0, 10, 10));
  CHECK(full.u_c() == 4.5);
  CHECK(full.v_c() == 4.5);
  CHECK(full.w() == 10.0);
  CHECK(full.h() == 10.0);
}

TEST_CASE("normalize_angle") {
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(kPi + 0.01) == doctest::Approx(-kPi + 0.01));
  CHECK(normalize_angle(7.0) == doctest::Approx(7.0 - 2 * kPi));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(d(rng));
    CHECK(a > -kPi);
    CHECK(a <= kPi);
    CHECK(normalize_angle(a) == a);
  }
}

TEST_CASE("rot_y maps the length axis to (cos, 0, -sin)") {
  const Mat3 r = rot_y(0.3);
  const Vec3 x = r * Vec3::UnitX();
  CHECK(x.x() == doctest::Approx(std::cos(0.3)));
  CHECK(x.z() == doctest::Approx(-std::sin(0.3)));
  CHECK(r.determinant() == doctest::Approx(1.0));
}

TEST_CASE("similarity transforms compose") {
  SimilarityTransform a;
  a.scale = 1.5;
  a.rotation = rot_y(0.3);
  a.translation = Vec3(1, 2, 3);
  SimilarityTransform b;
  b.scale = 0.5;
  b.rotation = Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  b.translation = Vec3(-1, 0, 4);
  const SimilarityTransform ab = a * b;
  CHECK(ab.is_valid());
  CHECK(ab.scale == doctest::Approx(0.75));
  const Vec3 p(0.3, -2, 5);
  CHECK((ab.apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-12);

  SimilarityTransform bad;
  bad.rotation = Vec3(1, 1, -1).asDiagonal();
  CHECK_FALSE(bad.is_valid());
  bad = SimilarityTransform{};
  bad.scale = 0.0;
  CHECK_FALSE(bad.is_valid());
}

TEST_CASE("tracked mask rasterization") {
  TrackedMask tm;
  tm.points = {{{0, 0}, 1.4, 2.6, true},
               {{1, 0}, 1.6, 2.6, true},
               {{2, 0}, 3.0, 3.0, false},
               {{3, 0}, -4.0, 1.0, true}};
  const auto px = tm.rasterize({8, 8});
  REQUIRE(px.size() == 2);
  CHECK(px[0] == Pixel{1, 3});
  CHECK(px[1] == Pixel{2, 3});
  CHECK(tm.visible_fraction() == 0.75);
}

TEST_CASE("box and prior validation") {
  Box3D b;
  b.class_label = "Car";
  b.width = 1.6;
  b.height = 1.5;
  b.length = 4.0;
  CHECK_NOTHROW(b.validate());
  b.height = -1;
  CHECK_THROWS_AS(b.validate(), Error);
  DimensionPrior p{"Car", 1.53, 1.63, 3.88};
  CHECK_NOTHROW(p.validate());
  p.width = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_THROWS_AS((CameraIntrinsics{0, 1, 0, 0}.validate()), Error);
}
