#include <gtest/gtest.h>

#include <random>

#include "feqtee/cut.hpp"
#include "fixtures.hpp"

using namespace feqtee;
using namespace feqtee::testing;

namespace {

double uv_area(const UvDomain& d, const PolyMesh& m, const std::vector<int>& faces) {
  double a = 0;
  for (int f : faces) {
    std::vector<Vec2> poly;
    for (int v : m.face(f)) poly.push_back(d.uv.at(v));
    a += signed_area(poly);
  }
  return a;
}

}  // namespace

TEST(QuadDominant, CurveAlongEdgesIsANoOp) {
  PolyMesh g = planar_grid(4);
  UvDomain d = make_domain(g, make_patch(g, all_faces(g)));
  const std::vector<int> centre{5, 6, 9, 10};
  std::vector<Vec2> loop;
  for (int v : make_patch(g, centre).boundary) loop.push_back(d.uv.at(v));
  CutResult cut = select_patch_quad_dominant(g, d, loop);
  EXPECT_EQ(cut.mesh.num_vertices(), g.num_vertices());
  EXPECT_EQ(cut.mesh.faces(), g.faces());
  EXPECT_EQ(cut.selection.faces, centre);
  EXPECT_EQ(select_patch_pure_quad(d, loop).faces, cut.selection.faces);
}

TEST(QuadDominant, DiagonalCutKeepsCurveEdges) {
  PolyMesh g = planar_grid(3);
  UvDomain d = make_domain(g, make_patch(g, all_faces(g)));
  // Triangle through a boundary corner whose long side crosses the central quad diagonally.
  const Vec2 c = d.uv.at(10);
  CutResult cut = select_patch_quad_dominant(g, d, {d.uv.at(0), d.uv.at(2), c});
  EXPECT_GT(cut.mesh.num_faces(), g.num_faces());
  // Every piece of the cut curve is an edge of the new mesh.
  const auto& cyc = cut.selection.cycle;
  for (std::size_t i = 0; i < cyc.size(); ++i)
    EXPECT_TRUE(cut.mesh.find_edge(cyc[i], cyc[(i + 1) % cyc.size()]).has_value());
  for (const auto& p : cut.mesh.positions()) EXPECT_NEAR(p.z(), 0.0, 1e-15);
}

TEST(QuadDominant, CircleAreaShare) {
  PolyMesh g = planar_grid(12);
  UvDomain d = make_domain(g, make_patch(g, all_faces(g)));
  std::vector<Vec2> circle;
  for (int k = 0; k < 48; ++k) circle.emplace_back(0.5 * std::cos(kTwoPi * k / 48), 0.5 * std::sin(kTwoPi * k / 48));
  const GenericDisk& disk = default_generic_disk();
  CutResult cut = select_patch_quad_dominant(g, d, disk.dequantize(disk.quantize(circle)));
  const double area = uv_area(cut.domain, cut.mesh, cut.selection.faces);
  const double target = kTwoPi / 2 * 0.25;
  EXPECT_NEAR(area, target, 0.1 * target);
  EXPECT_TRUE(is_disk(cut.mesh, cut.selection.faces));
}

TEST(QuadDominant, RandomCurvesGiveManifoldMeshesOrErrors) {
  std::mt19937_64 rng(8);
  int ok = 0;
  for (int trial = 0; trial < 80; ++trial) {
    PolyMesh m = subdivided_box(4);
    Patch p = make_patch(m, random_disk_patch(m, rng, 8 + trial % 16));
    UvDomain d = make_domain(m, p);
    std::uniform_real_distribution<double> r(0.2, 0.9), c(-0.3, 0.3);
    const Vec2 centre(c(rng), c(rng));
    const int n = 5 + trial % 9;
    std::vector<Vec2> loop;
    for (int k = 0; k < n; ++k) {
      const double ang = kTwoPi * k / n;
      loop.push_back(centre + r(rng) * Vec2(std::cos(ang), std::sin(ang)));
    }
    const GenericDisk& disk = default_generic_disk();
    try {
      CutResult cut = select_patch_quad_dominant(m, d, disk.dequantize(disk.quantize(loop)));
      EXPECT_TRUE(cut.mesh.is_closed());
      EXPECT_TRUE(is_disk(cut.mesh, cut.selection.faces));
      // Faces outside the domain are untouched.
      std::vector<char> in_domain(m.num_faces(), 0);
      for (int f : p.faces) in_domain[f] = 1;
      for (std::size_t f = 0; f < m.num_faces(); ++f)
        if (!in_domain[f]) EXPECT_EQ(cut.mesh.face(static_cast<int>(f)), m.face(static_cast<int>(f)));
      ++ok;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Selection) << e.what();
    }
  }
  RecordProperty("succeeded", ok);
  EXPECT_GT(ok, 60);
}
