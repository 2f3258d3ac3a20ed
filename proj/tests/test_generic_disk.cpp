#include <gtest/gtest.h>

#include <random>

#include "feqtee/generic_disk.hpp"

using namespace feqtee;

TEST(GenericDisk, VertexCounts) {
  EXPECT_EQ(GenericDisk(1).vertex_count(), 9u);
  EXPECT_EQ(GenericDisk(26).vertex_count(), 2809u);
  EXPECT_EQ(GenericDisk(32).vertex_count(), 4225u);
  for (int r = 1; r < 10; ++r) {
    std::size_t sum = 1;
    for (int k = 1; k <= r; ++k) sum += 8 * k;
    EXPECT_EQ(GenericDisk(r).vertex_count(), sum);
    EXPECT_EQ(GenericDisk::count_for(r), sum);
  }
}

TEST(GenericDisk, LayoutIsDeterministic) {
  GenericDisk a(12), b(12);
  EXPECT_EQ(a.vertices(), b.vertices());
  EXPECT_EQ(a.triangles(), b.triangles());
  EXPECT_EQ(a.vertices()[0], Vec2(0, 0));
  for (int r = 1; r <= 12; ++r)
    for (int j = 0; j < 8 * r; ++j) {
      const Vec2& p = a.vertices()[GenericDisk::ring_start(r) + j];
      EXPECT_NEAR(p.norm(), r / 12.0, 1e-15);
      EXPECT_NEAR(angle_of(p), kTwoPi * j / (8.0 * r), 1e-12);
    }
}

TEST(GenericDisk, TrianglesTileTheInscribedPolygon) {
  for (int R : {1, 3, 8}) {
    GenericDisk d(R);
    double area = 0;
    for (const auto& t : d.triangles()) {
      const double a = signed_area(d.vertices()[t[0]], d.vertices()[t[1]], d.vertices()[t[2]]);
      EXPECT_GT(a, 0);
      area += a;
    }
    // Regular 8R-gon inscribed in the unit circle.
    const double n = 8.0 * R;
    EXPECT_NEAR(area, 0.5 * n * std::sin(kTwoPi / n), 1e-12);
    std::size_t expected = 8;
    for (int r = 2; r <= R; ++r) expected += 8 * (r - 1) + 8 * r;
    EXPECT_EQ(d.triangles().size(), expected);
    EXPECT_EQ(d.boundary_loop_faces().size(), static_cast<std::size_t>(8 * R));
  }
}

TEST(GenericDisk, QuantizeBasics) {
  const GenericDisk& d = default_generic_disk();
  EXPECT_EQ(d.nearest(Vec2(0, 0)), 0);
  EXPECT_EQ(d.nearest(Vec2(1, 0)), GenericDisk::ring_start(32));
  EXPECT_EQ(d.nearest(Vec2(3, 0)), GenericDisk::ring_start(32));
  EXPECT_EQ(d.dequantize({0}), std::vector<Vec2>{Vec2(0, 0)});
  EXPECT_THROW(d.dequantize({static_cast<int>(d.vertex_count())}), Error);
  EXPECT_THROW(d.dequantize({-1}), Error);
  EXPECT_EQ(d.quantize({Vec2(0, 0), Vec2(1e-6, 0), Vec2(1, 0)}).size(), 2u);
}

TEST(GenericDisk, QuantizeDequantizeIdentityOnIds) {
  const GenericDisk& d = default_generic_disk();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> id(0, static_cast<int>(d.vertex_count()) - 1);
  std::vector<int> ids;
  for (int k = 0; k < 300; ++k) {
    const int v = id(rng);
    if (ids.empty() || ids.back() != v) ids.push_back(v);
  }
  EXPECT_EQ(d.quantize(d.dequantize(ids)), ids);
}

TEST(GenericDisk, SquareCurveWithinGridSpacing) {
  const GenericDisk& d = default_generic_disk();
  std::vector<Vec2> curve;
  for (int k = 0; k < 64; ++k) {
    const double t = 4.0 * k / 64.0;
    const int side = static_cast<int>(t);
    const double s = t - side;
    const Vec2 corners[5] = {{0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}};
    curve.push_back(corners[side] + s * (corners[side + 1] - corners[side]));
  }
  auto back = d.dequantize(d.quantize(curve));
  const double spacing = 1.0 / 32;
  for (const auto& p : curve) {
    double best = 1e9;
    for (const auto& q : back) best = std::min(best, (p - q).norm());
    EXPECT_LE(best, spacing);
  }
  for (const auto& q : back) {
    double best = 1e9;
    for (const auto& p : curve) best = std::min(best, (p - q).norm());
    EXPECT_LE(best, spacing);
  }
}

TEST(GenericDisk, NearestMatchesBruteForceAndErrorBound) {
  GenericDisk d(10);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 3000; ++k) {
    Vec2 p(u(rng), u(rng));
    if (p.norm() > 1) continue;
    const int got = d.nearest(p);
    double best = 1e9;
    for (const auto& v : d.vertices()) best = std::min(best, (v - p).norm());
    EXPECT_DOUBLE_EQ((d.vertices()[got] - p).norm(), best);
    EXPECT_LE(best, 1.0 / 10);
  }
}
