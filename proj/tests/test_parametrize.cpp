#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "feqtee/parametrize.hpp"
#include "fixtures.hpp"

using namespace feqtee;
using namespace feqtee::testing;

namespace {

// Three quads in a row capped by a triangle.
PolyMesh strip_with_triangle() {
  std::vector<Vec3> pos;
  for (int i = 0; i < 4; ++i) pos.emplace_back(i, 0, 0);
  for (int i = 0; i < 4; ++i) pos.emplace_back(i, 1, 0);
  pos.emplace_back(4, 0.5, 0);
  std::vector<std::vector<int>> faces;
  for (int i = 0; i < 3; ++i) faces.push_back({i, i + 1, i + 5, i + 4});
  faces.push_back({3, 8, 7});
  return PolyMesh(std::move(pos), std::move(faces));
}

double max_harmonic_residual(const ParamPatch& p) {
  std::vector<std::vector<int>> adj(p.uv.size());
  for (const auto& t : p.split.tris)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) adj[a].push_back(b);
      if (std::find(adj[b].begin(), adj[b].end(), a) == adj[b].end()) adj[b].push_back(a);
    }
  std::vector<char> on_boundary(p.uv.size(), 0);
  for (int b : p.split.boundary) on_boundary[b] = 1;
  double worst = 0;
  for (std::size_t v = 0; v < p.uv.size(); ++v) {
    if (on_boundary[v]) continue;
    Vec2 s = Vec2::Zero();
    for (int w : adj[v]) s += p.uv[w];
    worst = std::max(worst, (p.uv[v] - s / static_cast<double>(adj[v].size())).norm());
  }
  return worst;
}

}  // namespace

TEST(CenterSplit, Counts) {
  PolyMesh q = planar_grid(1);
  auto s1 = center_split(q, make_patch(q, {0}));
  EXPECT_EQ(s1.tris.size(), 4u);
  EXPECT_EQ(s1.center_vertex_ids().size(), 1u);
  PolyMesh g = planar_grid(2);
  auto s2 = center_split(g, make_patch(g, all_faces(g)));
  EXPECT_EQ(s2.tris.size(), 16u);
  EXPECT_EQ(s2.center_vertex_ids().size(), 4u);
  PolyMesh m = strip_with_triangle();
  auto s3 = center_split(m, make_patch(m, all_faces(m)));
  EXPECT_EQ(s3.tris.size(), 13u);
  EXPECT_EQ(s3.center_vertex_ids().size(), 3u);
  EXPECT_EQ(s3.boundary.size(), 9u);
}

TEST(Smoothing, NoInteriorLeavesMeshUnchanged) {
  PolyMesh q = planar_grid(1);
  q.set_position(0, Vec3(0.1, 0.2, 0.3));
  auto r = smooth_interior(q, make_patch(q, {0}), 50);
  EXPECT_EQ(r.mesh.positions(), q.positions());
  EXPECT_TRUE(r.converged);
}

TEST(Smoothing, SingleInteriorVertexMovesToRingCentroid) {
  PolyMesh g = planar_grid(2);
  g.set_position(4, Vec3(0.3, -0.2, 0.7));
  auto r = smooth_interior(g, make_patch(g, all_faces(g)), 1);
  EXPECT_NEAR((r.mesh.position(4) - Vec3(0, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Smoothing, BumpedGridFlattens) {
  const PolyMesh flat = planar_grid(3);
  PolyMesh g = flat;
  for (int v : {5, 6, 9, 10}) g.set_position(v, g.position(v) + Vec3(0.05 * v, -0.03, 0.5));
  Patch p = make_patch(g, all_faces(g));
  auto r = smooth_interior(g, p, 100);
  // The planar grid itself is the discrete harmonic solution.
  for (int v = 0; v < 16; ++v) EXPECT_LT((r.mesh.position(v) - flat.position(v)).norm(), 1e-6) << v;
  PolyMesh exact = smooth_interior_exact(g, p);
  for (int v = 0; v < 16; ++v) EXPECT_LT((exact.position(v) - flat.position(v)).norm(), 1e-12) << v;
}

TEST(Smoothing, ExactSolveIsTheIterationLimit) {
  std::mt19937_64 rng(3);
  PolyMesh m = subdivided_box(4);
  for (int trial = 0; trial < 5; ++trial) {
    Patch p = make_patch(m, random_disk_patch(m, rng, 10));
    PolyMesh bumped = m;
    std::normal_distribution<double> noise(0, 0.1);
    for (int v : patch_interior_vertices(m, p))
      bumped.set_position(v, m.position(v) + Vec3(noise(rng), noise(rng), noise(rng)));
    auto iter = smooth_interior(bumped, p, 5000);
    PolyMesh exact = smooth_interior_exact(bumped, p);
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
      EXPECT_LT((iter.mesh.position(v) - exact.position(v)).norm(), 1e-5);
  }
}

TEST(HarmonicMap, SingleQuad) {
  PolyMesh q = planar_grid(1);
  ParamPatch p = harmonic_disk_map(q, make_patch(q, {0}));
  ASSERT_EQ(p.boundary_angles.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.boundary_angles[i], i * std::numbers::pi / 2, 1e-12);
  EXPECT_EQ(p.uv[p.split.boundary[0]], Vec2(1, 0));
  EXPECT_LT(p.uv[p.center_vertex_ids()[0]].norm(), 1e-12);
  EXPECT_GT(p.min_signed_area(), 0);

  // Moving the reference one step along the boundary rotates everything by -90 degrees.
  Patch moved = make_patch(q, {0}, p.source.boundary[1]);
  ParamPatch r = harmonic_disk_map(q, moved);
  for (std::size_t i = 0; i < p.split.num_original; ++i) {
    const int v = p.split.vertices[i];
    EXPECT_LT((r.uv[r.local_of(v)] - rotate(p.uv[i], -std::numbers::pi / 2)).norm(), 1e-12);
  }
}

TEST(HarmonicMap, GridIsInjectiveAndHarmonic) {
  PolyMesh g = planar_grid(3);
  ParamPatch p = harmonic_disk_map(g, make_patch(g, all_faces(g)));
  std::vector<char> on_boundary(p.uv.size(), 0);
  for (int b : p.split.boundary) {
    on_boundary[b] = 1;
    EXPECT_NEAR(p.uv[b].norm(), 1.0, 1e-15);
  }
  for (std::size_t v = 0; v < p.uv.size(); ++v)
    if (!on_boundary[v]) EXPECT_LT(p.uv[v].norm(), 1.0 - 1e-6);
  EXPECT_GT(p.min_signed_area(), 0);
  EXPECT_LT(max_harmonic_residual(p), 1e-8);
}

TEST(HarmonicMap, RandomBoxPatches) {
  std::mt19937_64 rng(11);
  PolyMesh m = subdivided_box(5);
  for (int trial = 0; trial < 40; ++trial) {
    Patch patch = make_patch(m, random_disk_patch(m, rng, 3 + trial));
    ParamPatch p = harmonic_disk_map(m, patch);
    EXPECT_EQ(p.uv[p.local_of(patch.reference)], Vec2(1, 0));
    EXPECT_GT(p.min_signed_area(), 0) << trial;
    EXPECT_LT(max_harmonic_residual(p), 1e-8) << trial;
    // Boundary angles increase counterclockwise.
    for (std::size_t i = 1; i < p.boundary_angles.size(); ++i)
      EXPECT_GT(p.boundary_angles[i], p.boundary_angles[i - 1]);
  }
}

TEST(Locate, VertexHitAndCenter) {
  PolyMesh q = planar_grid(1);
  ParamPatch p = harmonic_disk_map(q, make_patch(q, {0}));
  auto at_center = locate_point(p, Vec2(0, 0));
  const int c = p.center_vertex_ids()[0];
  const auto& tri = p.split.tris[at_center.triangle];
  for (int k = 0; k < 3; ++k)
    if (tri[k] == c) EXPECT_NEAR(at_center.bary[k], 1.0, 1e-12);
  for (std::size_t v = 0; v < p.uv.size(); ++v) {
    auto loc = locate_point(p, p.uv[v]);
    const auto& t = p.split.tris[loc.triangle];
    double w = 0;
    for (int k = 0; k < 3; ++k)
      if (t[k] == static_cast<int>(v)) w = loc.bary[k];
    EXPECT_NEAR(w, 1.0, 1e-12) << v;
  }
}

TEST(Locate, MatchesBruteForceAndReproducesQuery) {
  std::mt19937_64 rng(5);
  PolyMesh m = subdivided_box(4);
  Patch patch = make_patch(m, random_disk_patch(m, rng, 14));
  ParamPatch p = harmonic_disk_map(m, patch);
  TriangleLocator loc(p.uv, p.split.tris);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  while (checked < 2000) {
    Vec2 q(u(rng), u(rng));
    if (q.norm() > 1) continue;
    ++checked;
    auto got = loc.locate(q);
    bool any_contains = false;
    for (const auto& t : p.split.tris) {
      auto bc = barycentric(q, p.uv[t[0]], p.uv[t[1]], p.uv[t[2]]);
      if (std::min({bc[0], bc[1], bc[2]}) >= -1e-12) any_contains = true;
    }
    EXPECT_EQ(got.inside, any_contains);
    const Vec2 back = interpolate(p.uv, p.split.tris[got.triangle], got.bary);
    if (any_contains) EXPECT_LT((back - q).norm(), 1e-9);
    else EXPECT_LE(got.bary[0] + got.bary[1] + got.bary[2], 1.0 + 1e-12);
  }
}

TEST(Locate, SharedEdgeIsContinuous) {
  PolyMesh g = planar_grid(2);
  ParamPatch p = harmonic_disk_map(g, make_patch(g, all_faces(g)));
  std::vector<double> f;
  for (const auto& x : p.uv) f.push_back(std::sin(3 * x.x()) + x.y() * x.y());
  const auto& t0 = p.split.tris[0];
  const Vec2 q = 0.5 * (p.uv[t0[0]] + p.uv[t0[2]]);
  const auto a = locate_point(p, q);
  for (std::size_t t = 0; t < p.split.tris.size(); ++t) {
    const auto& tr = p.split.tris[t];
    auto bc = barycentric(q, p.uv[tr[0]], p.uv[tr[1]], p.uv[tr[2]]);
    if (std::min({bc[0], bc[1], bc[2]}) < -1e-12) continue;
    EXPECT_NEAR(interpolate(f, tr, bc), interpolate(f, p.split.tris[a.triangle], a.bary), 1e-12);
  }
}
