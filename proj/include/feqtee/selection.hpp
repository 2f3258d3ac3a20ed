#pragma once

#include <numeric>
#include <unordered_map>
#include <vector>

#include "feqtee/generic_disk.hpp"
#include "feqtee/parametrize.hpp"

namespace feqtee {

/// A face set of some mesh together with a uv layout of its vertices. Kept by
/// value so that a remembered state can be queried after the mesh has moved on.
struct UvDomain {
  std::vector<int> faces;                       // mesh face ids, sorted
  std::vector<std::vector<int>> face_vertices;  // per entry of `faces`, snapshot of its vertex cycle
  std::unordered_map<int, Vec2> uv;             // mesh vertex id -> uv
  std::vector<Vec2> center_uv;                  // per entry of `faces`
  int reference = -1;
};

inline UvDomain make_domain(const PolyMesh& mesh, const ParamPatch& param) {
  UvDomain d;
  d.faces = param.source.faces;
  d.reference = param.source.reference;
  for (int f : d.faces) d.face_vertices.push_back(mesh.face(f));
  for (std::size_t i = 0; i < param.split.num_original; ++i) d.uv[param.split.vertices[i]] = param.uv[i];
  std::unordered_map<int, Vec2> centers;
  for (std::size_t k = 0; k < param.split.center_face.size(); ++k)
    centers[param.split.center_face[k]] = param.uv[param.split.num_original + k];
  for (std::size_t i = 0; i < d.faces.size(); ++i) {
    auto it = centers.find(d.faces[i]);
    if (it != centers.end()) {
      d.center_uv.push_back(it->second);
    } else {
      Vec2 c = Vec2::Zero();
      for (int v : d.face_vertices[i]) c += d.uv.at(v);
      d.center_uv.push_back(c / static_cast<double>(d.face_vertices[i].size()));
    }
  }
  return d;
}

inline UvDomain make_domain(const PolyMesh& mesh, const Patch& patch) {
  return make_domain(mesh, harmonic_disk_map(mesh, patch));
}

/// Weight of a uv edge against a closed polyline: for K samples on the edge,
/// |e . n| for the normal n of the loop segment nearest to the sample plus
/// the squared distance between the edge and that segment.
inline double edge_weight(const Vec2& a, const Vec2& b, std::span<const Vec2> loop, int K = 5) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "edge_weight needs K >= 1");
  if (loop.size() < 3) throw Error(ErrorKind::InvalidArgument, "loop needs at least 3 segments");
  const Vec2 e = b - a;
  const double len = e.norm();
  if (!(len > 0)) throw Error(ErrorKind::InvalidArgument, "zero-length edge");
  const Vec2 eh = e / len;
  const std::size_t n = loop.size();
  double w = 0.0;
  for (int k = 0; k < K; ++k) {
    const Vec2 p = a + ((k + 0.5) / K) * e;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = point_segment_distance(p, loop[i], loop[(i + 1) % n]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const Vec2 &s0 = loop[best], &s1 = loop[(best + 1) % n];
    const Vec2 t = s1 - s0;
    const double tl = t.norm();
    const double dot = tl > 0 ? std::abs(eh.dot(Vec2(t.y(), -t.x()) / tl)) : 1.0;
    const double d = segment_segment_distance(a, b, s0, s1);
    w += dot + d * d;
  }
  return w;
}

/// Classic DTW with Euclidean cost, aligned cyclically: the cheaper of
/// rotating `a` against `b` and rotating `b` against `a`.
inline double dtw_linear(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j)
      cur[j] = (a[i - 1] - b[j - 1]).norm() + std::min({prev[j], cur[j - 1], prev[j - 1]});
    std::swap(prev, cur);
  }
  return prev[m];
}

inline double dtw_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "dtw of an empty sequence");
  auto best_rotation = [](std::span<const Vec2> x, std::span<const Vec2> y) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec2> rot(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) {
      for (std::size_t i = 0; i < x.size(); ++i) rot[i] = x[(r + i) % x.size()];
      best = std::min(best, dtw_linear(rot, y));
    }
    return best;
  };
  return std::min(best_rotation(a, b), best_rotation(b, a));
}

/// DTW divided by the longer sequence length; the quantity compared with
/// the fallback threshold.
inline double normalized_dtw(std::span<const Vec2> a, std::span<const Vec2> b) {
  return dtw_distance(a, b) / static_cast<double>(std::max(a.size(), b.size()));
}

struct SelectionResult {
  std::vector<int> faces;  // mesh face ids, sorted
  std::vector<int> cycle;  // mesh vertex ids along the boundary
  double dtw_score = 0.0;
  double normalized_score = 0.0;
  bool cut = false;        // true when produced by the quad-dominant path
};

struct SelectionOptions {
  int samples = 5;            // K in the edge weight
  double inside_margin = -1;  // edges farther than this inside the loop are skipped; < 0: one disk ring spacing
};

namespace detail {

/// The domain as a standalone mesh with compact vertex ids.
struct LocalDomain {
  PolyMesh mesh;
  std::vector<int> vertex_ids;  // local -> mesh vertex
  std::vector<Vec2> uv;         // per local vertex
};

inline LocalDomain local_domain(const UvDomain& d) {
  LocalDomain out;
  std::unordered_map<int, int> local;
  std::vector<std::vector<int>> faces;
  for (const auto& fv : d.face_vertices) {
    std::vector<int> poly;
    for (int v : fv) {
      auto [it, inserted] = local.emplace(v, static_cast<int>(out.vertex_ids.size()));
      if (inserted) {
        out.vertex_ids.push_back(v);
        auto u = d.uv.find(v);
        if (u == d.uv.end())
          throw Error(ErrorKind::Selection, "vertex " + std::to_string(v) + " has no parameter value");
        out.uv.push_back(u->second);
      }
      poly.push_back(it->second);
    }
    faces.push_back(std::move(poly));
  }
  std::vector<Vec3> pos;
  for (const auto& p : out.uv) pos.emplace_back(p.x(), p.y(), 0.0);
  out.mesh = PolyMesh(std::move(pos), std::move(faces));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace detail

/// Faces of a local domain whose uv centroid the polygon winds around.
inline std::vector<int> faces_inside(const detail::LocalDomain& ld, std::span<const Vec2> polygon) {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(ld.mesh.num_faces()); ++f) {
    Vec2 c = Vec2::Zero();
    for (int v : ld.mesh.face(f)) c += ld.uv[v];
    c /= static_cast<double>(ld.mesh.face_degree(f));
    if (winding_number(c, polygon) != 0) out.push_back(f);
  }
  return out;
}

/// Pick the face set of `domain` whose boundary cycle best matches `loop`.
inline SelectionResult select_patch_pure_quad(const UvDomain& domain, const std::vector<Vec2>& loop,
                                              const SelectionOptions& opt = {}) {
  if (loop.size() < 3) throw Error(ErrorKind::Selection, "region curve has fewer than 3 points");
  const detail::LocalDomain ld = detail::local_domain(domain);
  const PolyMesh& m = ld.mesh;
  const double margin = opt.inside_margin >= 0 ? opt.inside_margin : 1.0 / GenericDisk::kDefaultRings;

  auto strictly_inside = [&](int v) {
    return winding_number(ld.uv[v], loop) != 0 && distance_to_polyline(ld.uv[v], loop) > margin;
  };
  std::vector<char> inside(ld.uv.size());
  for (std::size_t v = 0; v < ld.uv.size(); ++v) inside[v] = strictly_inside(static_cast<int>(v));

  std::vector<std::pair<double, int>> order;
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    auto [a, b] = m.edge_vertices(e);
    if (inside[a] && inside[b]) continue;
    order.emplace_back(edge_weight(ld.uv[a], ld.uv[b], loop, opt.samples), e);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });

  // Forest grown until the first cycle closes; later edges only test.
  detail::UnionFind uf(ld.uv.size());
  std::vector<std::vector<int>> tree(ld.uv.size());
  std::vector<std::vector<int>> candidates;
  auto tree_path = [&](int from, int to) {
    std::vector<int> parent(ld.uv.size(), -2);
    std::vector<int> queue{from};
    parent[from] = -1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int v = queue[q];
      if (v == to) break;
      for (int w : tree[v])
        if (parent[w] == -2) {
          parent[w] = v;
          queue.push_back(w);
        }
    }
    std::vector<int> path;
    for (int v = to; v != -1; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
  };
  bool closed = false;
  for (const auto& [w, e] : order) {
    auto [a, b] = m.edge_vertices(e);
    if (uf.find(a) == uf.find(b)) {
      candidates.push_back(tree_path(a, b));
      closed = true;
    } else if (!closed) {
      uf.unite(a, b);
      tree[a].push_back(b);
      tree[b].push_back(a);
    }
  }
  // The boundary of the faces the curve encloses is always a candidate too.
  const std::vector<int> enclosed = faces_inside(ld, loop);
  if (!enclosed.empty() && is_disk(m, enclosed)) candidates.push_back(make_patch(m, enclosed).boundary);

  struct Scored {
    double score;
    std::size_t index;
  };
  std::vector<Scored> scored;
  std::vector<std::vector<Vec2>> polys;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<Vec2> poly;
    for (int v : candidates[c]) poly.push_back(ld.uv[v]);
    std::vector<Vec2> rev(poly.rbegin(), poly.rend());
    scored.push_back({std::min(dtw_distance(poly, loop), dtw_distance(rev, loop)), c});
    polys.push_back(std::move(poly));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) { return x.score < y.score; });
  for (const auto& s : scored) {
    const auto faces = faces_inside(ld, polys[s.index]);
    if (faces.empty() || !is_disk(m, faces)) continue;
    const Patch p = make_patch(m, faces);
    SelectionResult r;
    for (int f : faces) r.faces.push_back(domain.faces[f]);
    std::sort(r.faces.begin(), r.faces.end());
    for (int v : p.boundary) r.cycle.push_back(ld.vertex_ids[v]);
    r.dtw_score = s.score;
    r.normalized_score = s.score / static_cast<double>(std::max(polys[s.index].size(), loop.size()));
    return r;
  }
  throw Error(ErrorKind::Selection, "no candidate cycle encloses a disk");
}

}  // namespace feqtee
