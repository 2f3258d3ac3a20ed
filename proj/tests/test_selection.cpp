#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "feqtee/selection.hpp"
#include "fixtures.hpp"

using namespace feqtee;
using namespace feqtee::testing;

namespace {

// Every monotone warping path enumerated explicitly.
double brute_dtw(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> double {
    const double c = (a[i] - b[j]).norm();
    if (i + 1 == a.size() && j + 1 == b.size()) return c;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < a.size()) best = std::min(best, go(i + 1, j));
    if (j + 1 < b.size()) best = std::min(best, go(i, j + 1));
    if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, go(i + 1, j + 1));
    return c + best;
  };
  return go(0, 0);
}

std::vector<Vec2> rotated(const std::vector<Vec2>& s, std::size_t r) {
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s[(i + r) % s.size()]);
  return out;
}

double brute_cyclic(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < a.size(); ++r) best = std::min(best, brute_dtw(rotated(a, r), b));
  for (std::size_t r = 0; r < b.size(); ++r) best = std::min(best, brute_dtw(a, rotated(b, r)));
  return best;
}

std::vector<Vec2> boundary_uv(const UvDomain& d, const Patch& p) {
  std::vector<Vec2> out;
  for (int v : p.boundary) out.push_back(d.uv.at(v));
  return out;
}

std::vector<Vec2> quantized(const std::vector<Vec2>& curve) {
  const GenericDisk& disk = default_generic_disk();
  return disk.dequantize(disk.quantize(curve));
}

}  // namespace

TEST(EdgeWeight, ClosedFormExamples) {
  const std::vector<Vec2> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  for (int K : {1, 5, 9}) {
    EXPECT_NEAR(edge_weight(Vec2(1, 0), Vec2(3, 0), square, K), 0.0, 1e-12);
    EXPECT_NEAR(edge_weight(Vec2(2, 0), Vec2(2, -0.7), square, K), static_cast<double>(K), 1e-12);
    EXPECT_NEAR(edge_weight(Vec2(1, 0.5), Vec2(2, 0.5), square, K), 0.25 * K, 1e-12);
  }
  EXPECT_THROW(edge_weight(Vec2(1, 1), Vec2(1, 1), square), Error);
}

TEST(Dtw, Examples) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(dtw_distance(sq, sq), 0.0);
  EXPECT_EQ(dtw_distance(sq, rotated(sq, 2)), 0.0);
  std::vector<Vec2> off;
  for (const auto& p : sq) off.push_back(p + Vec2(0.1, 0));
  EXPECT_NEAR(brute_cyclic(sq, off), 0.4, 1e-12);
  EXPECT_NEAR(dtw_distance(sq, off), 0.4, 1e-12);
}

TEST(Dtw, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> len(1, 6);
  for (int t = 0; t < 60; ++t) {
    std::vector<Vec2> a(len(rng)), b(len(rng));
    for (auto& p : a) p = Vec2(u(rng), u(rng));
    for (auto& p : b) p = Vec2(u(rng), u(rng));
    EXPECT_NEAR(dtw_distance(a, b), brute_cyclic(a, b), 1e-12);
    EXPECT_EQ(dtw_distance(a, b), dtw_distance(b, a));
    EXPECT_GE(dtw_distance(a, b), 0.0);
  }
}

TEST(PureQuad, WholeBoundarySelectsEverything) {
  PolyMesh g = planar_grid(4);
  UvDomain d = make_domain(g, make_patch(g, all_faces(g)));
  std::vector<Vec2> circle;
  for (int k = 0; k < 64; ++k) circle.emplace_back(std::cos(kTwoPi * k / 64), std::sin(kTwoPi * k / 64));
  auto r = select_patch_pure_quad(d, quantized(circle));
  EXPECT_EQ(r.faces, all_faces(g));
}

TEST(PureQuad, CentralBlockMatchesExhaustiveSearch) {
  PolyMesh g = planar_grid(4);
  UvDomain d = make_domain(g, make_patch(g, all_faces(g)));
  // Faces of the central 2x2 block: cells (1..2, 1..2).
  std::vector<int> centre{5, 6, 9, 10};
  const auto loop = quantized(boundary_uv(d, make_patch(g, centre)));
  auto r = select_patch_pure_quad(d, loop);
  EXPECT_EQ(r.faces, centre);

  // Oracle: every disk-shaped face subset, ranked by DTW of its boundary.
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_faces;
  for (int mask = 1; mask < (1 << 16); ++mask) {
    std::vector<int> faces;
    for (int f = 0; f < 16; ++f)
      if (mask & (1 << f)) faces.push_back(f);
    if (!is_disk(g, faces)) continue;
    auto poly = boundary_uv(d, make_patch(g, faces));
    std::vector<Vec2> rev(poly.rbegin(), poly.rend());
    const double s = std::min(dtw_distance(poly, loop), dtw_distance(rev, loop));
    if (s < best) {
      best = s;
      best_faces = faces;
    }
  }
  EXPECT_EQ(best_faces, centre);
  EXPECT_NEAR(r.dtw_score, best, 1e-12);
}

TEST(PureQuad, RecoversRandomSubpatches) {
  std::mt19937_64 rng(99);
  int exact = 0, total = 0;
  for (int trial = 0; trial < 60; ++trial) {
    PolyMesh m = subdivided_box(4);
    Patch domain_patch = make_patch(m, random_disk_patch(m, rng, 12 + trial % 20));
    UvDomain d = make_domain(m, domain_patch);
    // Random sub-disk of the domain.
    std::vector<int> seed{domain_patch.faces[trial % domain_patch.faces.size()]};
    std::vector<int> sub = seed;
    for (int k = 0; k < 3 + trial % 6; ++k) {
      for (int f : domain_patch.faces) {
        if (std::find(sub.begin(), sub.end(), f) != sub.end()) continue;
        auto grown = sub;
        grown.push_back(f);
        std::sort(grown.begin(), grown.end());
        bool adjacent = false;
        for (int g : sub)
          for (int h = m.face_halfedge(g); h < m.face_halfedge(g) + 4; ++h) adjacent |= m.opposite_face(h) == f;
        if (adjacent && is_disk(m, grown) && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
          sub = grown;
          break;
        }
      }
    }
    std::sort(sub.begin(), sub.end());
    const auto loop = quantized(boundary_uv(d, make_patch(m, sub)));
    ++total;
    try {
      if (select_patch_pure_quad(d, loop).faces == sub) ++exact;
    } catch (const Error&) {
    }
  }
  RecordProperty("exact", exact);
  EXPECT_EQ(exact, total);
}
