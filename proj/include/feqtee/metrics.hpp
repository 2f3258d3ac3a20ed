#pragma once

#include <optional>
#include <vector>

#include "feqtee/mesh.hpp"

namespace feqtee {

namespace detail {

inline std::optional<std::vector<int>> grow_isomorphism(const PolyMesh& a, const PolyMesh& b, int ha, int hb) {
  std::vector<int> hmap(a.num_halfedges(), -1), hused(b.num_halfedges(), 0);
  std::vector<int> vmap(a.num_vertices(), -1), vused(b.num_vertices(), -1);
  std::vector<std::pair<int, int>> stack{{ha, hb}};
  auto bind = [&](int x, int y) {
    if (x < 0 || y < 0) return x < 0 && y < 0;
    if (hmap[x] >= 0) return hmap[x] == y;
    if (hused[y]) return false;
    hmap[x] = y;
    hused[y] = 1;
    stack.emplace_back(x, y);
    return true;
  };
  hmap[ha] = hb;
  hused[hb] = 1;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (a.face_degree(a.face_of(x)) != b.face_degree(b.face_of(y))) return std::nullopt;
    const int u = a.origin(x), w = b.origin(y);
    if (vmap[u] < 0 && vused[w] < 0) {
      vmap[u] = w;
      vused[w] = u;
    } else if (vmap[u] != w) {
      return std::nullopt;
    }
    if (!bind(a.next(x), b.next(y)) || !bind(a.twin(x), b.twin(y))) return std::nullopt;
  }
  for (int v : vmap)
    if (v < 0) return std::nullopt;
  return vmap;
}

}  // namespace detail

/// Orientation-preserving connectivity isomorphism of two connected meshes,
/// as a vertex map a -> b.
inline std::optional<std::vector<int>> find_isomorphism(const PolyMesh& a, const PolyMesh& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_faces() != b.num_faces() || a.num_edges() != b.num_edges() ||
      a.num_halfedges() != b.num_halfedges() || a.num_faces() == 0)
    return std::nullopt;
  auto valence = [](const PolyMesh& m) {
    std::vector<int> out(m.num_vertices(), 0);
    for (std::size_t h = 0; h < m.num_halfedges(); ++h) ++out[m.origin(static_cast<int>(h))];
    return out;
  };
  const auto va = valence(a), vb = valence(b);
  auto signature = [](const PolyMesh& m, const std::vector<int>& val, int h) {
    std::vector<int> s;
    int x = h;
    do {
      s.push_back(val[m.origin(x)]);
      x = m.next(x);
    } while (x != h);
    return s;
  };
  const int ha = a.face_halfedge(0);
  const auto sa = signature(a, va, ha);
  for (int hb = 0; hb < static_cast<int>(b.num_halfedges()); ++hb) {
    if (b.face_degree(b.face_of(hb)) != a.face_degree(0) || signature(b, vb, hb) != sa) continue;
    if (auto m = detail::grow_isomorphism(a, b, ha, hb)) return m;
  }
  return std::nullopt;
}

inline bool connectivity_isomorphic(const PolyMesh& a, const PolyMesh& b) { return find_isomorphism(a, b).has_value(); }

namespace detail {

inline std::vector<std::array<Vec3, 3>> fan_triangles(const PolyMesh& m) {
  std::vector<std::array<Vec3, 3>> out;
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const auto pts = m.face_points(f);
    if (pts.size() == 3) {
      out.push_back({pts[0], pts[1], pts[2]});
      continue;
    }
    const Vec3 c = m.face_centroid(f);
    for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({c, pts[i], pts[(i + 1) % pts.size()]});
  }
  return out;
}

inline double one_sided(const std::vector<std::array<Vec3, 3>>& from, const std::vector<std::array<Vec3, 3>>& to,
                        int samples) {
  double worst = 0.0;
  for (const auto& t : from)
    for (int i = 0; i <= samples; ++i)
      for (int j = 0; i + j <= samples; ++j) {
        const double u = static_cast<double>(i) / samples, v = static_cast<double>(j) / samples;
        const Vec3 p = (1 - u - v) * t[0] + u * t[1] + v * t[2];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : to) {
          best = std::min(best, (closest_on_triangle(p, s[0], s[1], s[2]) - p).squaredNorm());
          if (best == 0.0) break;
        }
        worst = std::max(worst, best);
      }
  return std::sqrt(worst);
}

}  // namespace detail

/// Symmetric Hausdorff distance between the surfaces, sampled on a
/// barycentric grid of each fan triangle, divided by the bounding-box
/// diagonal of `a`.
inline double relative_hausdorff(const PolyMesh& a, const PolyMesh& b, int samples = 4) {
  const auto ta = detail::fan_triangles(a), tb = detail::fan_triangles(b);
  const double d = std::max(detail::one_sided(ta, tb, samples), detail::one_sided(tb, ta, samples));
  const double diag = a.bbox_diagonal();
  return diag > 0 ? d / diag : d;
}

/// Largest distance between corresponding vertices under a vertex map.
inline double max_vertex_deviation(const PolyMesh& a, const PolyMesh& b, const std::vector<int>& map) {
  double worst = 0.0;
  for (std::size_t v = 0; v < map.size(); ++v)
    worst = std::max(worst, (a.position(static_cast<int>(v)) - b.position(map[v])).norm());
  return worst;
}

}  // namespace feqtee
