#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <unordered_map>
#include <vector>

#include "feqtee/topology.hpp"

namespace feqtee {

/// A patch triangulated by center splits. Local vertex i < num_original is
/// mesh vertex `vertices[i]`; the rest are inserted face centers.
struct SplitPatch {
  std::vector<int> vertices;           // local -> mesh vertex id, -1 for centers
  std::vector<Vec3> positions;         // local positions
  std::vector<std::array<int, 3>> tris;
  std::vector<int> center_face;        // per inserted center: the patch face it splits
  std::vector<int> tri_face;           // per triangle: its patch face
  std::size_t num_original = 0;
  std::vector<int> boundary;           // local ids, CCW from the reference

  std::size_t num_vertices() const { return positions.size(); }
  std::vector<int> center_vertex_ids() const {
    std::vector<int> out;
    for (std::size_t i = num_original; i < positions.size(); ++i) out.push_back(static_cast<int>(i));
    return out;
  }
};

/// Quads become four triangles around their centroid, triangles pass through,
/// larger polygons become a centroid fan.
inline SplitPatch center_split(const PolyMesh& mesh, const Patch& patch) {
  SplitPatch out;
  std::unordered_map<int, int> local;
  auto local_of = [&](int v) {
    auto [it, inserted] = local.emplace(v, static_cast<int>(out.vertices.size()));
    if (inserted) {
      out.vertices.push_back(v);
      out.positions.push_back(mesh.position(v));
    }
    return it->second;
  };
  for (int v : patch.boundary) local_of(v);
  for (int f : patch.faces)
    for (int v : mesh.face(f)) local_of(v);
  out.num_original = out.vertices.size();
  for (int f : patch.faces) {
    const auto& poly = mesh.face(f);
    const int n = static_cast<int>(poly.size());
    if (n == 3) {
      out.tris.push_back({local.at(poly[0]), local.at(poly[1]), local.at(poly[2])});
      out.tri_face.push_back(f);
      continue;
    }
    const int c = static_cast<int>(out.positions.size());
    out.vertices.push_back(-1);
    out.positions.push_back(mesh.face_centroid(f));
    out.center_face.push_back(f);
    for (int k = 0; k < n; ++k) {
      out.tris.push_back({local.at(poly[k]), local.at(poly[(k + 1) % n]), c});
      out.tri_face.push_back(f);
    }
  }
  for (int v : patch.boundary) out.boundary.push_back(local.at(v));
  return out;
}

namespace detail {

inline std::vector<std::vector<int>> tri_adjacency(std::size_t n, const std::vector<std::array<int, 3>>& tris) {
  std::vector<std::vector<int>> adj(n);
  auto link = [&](int a, int b) {
    if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) adj[a].push_back(b);
    if (std::find(adj[b].begin(), adj[b].end(), a) == adj[b].end()) adj[b].push_back(a);
  };
  for (const auto& t : tris) {
    link(t[0], t[1]);
    link(t[1], t[2]);
    link(t[2], t[0]);
  }
  return adj;
}

/// Solve the uniform Laplace equation for the free vertices, fixed ones
/// keep their values. Values are rows of `values` (n x d).
inline void solve_uniform_laplace(const std::vector<std::vector<int>>& adj, const std::vector<char>& fixed,
                                  Eigen::MatrixXd& values) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v)
    if (!fixed[v]) index[v] = m++;
  if (m == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, values.cols());
  for (int v = 0; v < n; ++v) {
    if (fixed[v]) continue;
    const int i = index[v];
    trip.emplace_back(i, i, static_cast<double>(adj[v].size()));
    for (int w : adj[v]) {
      if (fixed[w]) rhs.row(i) += values.row(w);
      else trip.emplace_back(i, index[w], -1.0);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::Solver, "Laplace system is singular");
  Eigen::MatrixXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) throw Error(ErrorKind::Solver, "Laplace solve failed");
  for (int v = 0; v < n; ++v)
    if (!fixed[v]) values.row(v) = x.row(index[v]);
}

}  // namespace detail

/// Interior vertices of a patch (vertices not on its boundary), sorted.
inline std::vector<int> patch_interior_vertices(const PolyMesh& mesh, const Patch& patch) {
  std::vector<int> out;
  std::vector<int> b = patch.boundary;
  std::sort(b.begin(), b.end());
  for (int v : patch_vertices(mesh, patch))
    if (!std::binary_search(b.begin(), b.end(), v)) out.push_back(v);
  return out;
}

struct SmoothResult {
  PolyMesh mesh;
  int iterations = 0;
  bool converged = false;
};

/// Jacobi iterations of uniform Laplacian averaging on the patch interior.
inline SmoothResult smooth_interior(const PolyMesh& mesh, const Patch& patch, int iterations = 50) {
  SmoothResult r{mesh, 0, false};
  const auto interior = patch_interior_vertices(mesh, patch);
  if (interior.empty()) {
    r.converged = true;
    return r;
  }
  std::vector<std::vector<int>> nbrs;
  for (int v : interior) nbrs.push_back(mesh.vertex_neighbors(v));
  const double tol = 1e-7 * mesh.bbox_diagonal();
  auto& pos = r.mesh.mutable_positions();
  std::vector<Vec3> next(interior.size());
  for (int it = 0; it < iterations; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < interior.size(); ++i) {
      Vec3 s = Vec3::Zero();
      for (int w : nbrs[i]) s += pos[w];
      next[i] = s / static_cast<double>(nbrs[i].size());
      moved = std::max(moved, (next[i] - pos[interior[i]]).norm());
    }
    for (std::size_t i = 0; i < interior.size(); ++i) pos[interior[i]] = next[i];
    r.iterations = it + 1;
    if (moved < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

/// The limit of smooth_interior: interior positions solve the uniform
/// Laplace equation with the boundary fixed.
inline PolyMesh smooth_interior_exact(const PolyMesh& mesh, const Patch& patch) {
  const auto verts = patch_vertices(mesh, patch);
  const auto interior = patch_interior_vertices(mesh, patch);
  PolyMesh out = mesh;
  if (interior.empty()) return out;
  std::unordered_map<int, int> local;
  for (std::size_t i = 0; i < verts.size(); ++i) local[verts[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> adj(verts.size());
  std::vector<char> fixed(verts.size(), 1);
  Eigen::MatrixXd values(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) values.row(i) = mesh.position(verts[i]).transpose();
  for (int v : interior) {
    const int i = local.at(v);
    fixed[i] = 0;
    for (int w : mesh.vertex_neighbors(v)) adj[i].push_back(local.at(w));
  }
  detail::solve_uniform_laplace(adj, fixed, values);
  for (int v : interior) out.set_position(v, values.row(local.at(v)).transpose());
  return out;
}

/// A center-split patch mapped onto the unit disk.
struct ParamPatch {
  Patch source;
  SplitPatch split;
  std::vector<Vec2> uv;               // per local vertex
  std::vector<double> boundary_angles;  // per entry of split.boundary

  const std::vector<std::array<int, 3>>& tri_faces() const { return split.tris; }
  std::vector<int> center_vertex_ids() const { return split.center_vertex_ids(); }
  int local_of(int mesh_vertex) const {
    for (std::size_t i = 0; i < split.num_original; ++i)
      if (split.vertices[i] == mesh_vertex) return static_cast<int>(i);
    return -1;
  }
  double min_signed_area() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : split.tris) m = std::min(m, signed_area(uv[t[0]], uv[t[1]], uv[t[2]]));
    return m;
  }
};

/// Chord-length proportional angles around a closed polygon, starting at 0.
inline std::vector<double> chord_angles(const std::vector<Vec3>& loop) {
  const std::size_t n = loop.size();
  std::vector<double> cum(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum[i] = total;
    total += (loop[(i + 1) % n] - loop[i]).norm();
  }
  std::vector<double> angles(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    angles[i] = total > 0 ? kTwoPi * cum[i] / total : kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return angles;
}

/// Map a split patch to the unit disk: boundary at chord-length angles
/// (reference at (1,0), counterclockwise), interior harmonic with uniform
/// weights.
inline ParamPatch harmonic_disk_map(const SplitPatch& split, const Patch& source) {
  ParamPatch p;
  p.source = source;
  p.split = split;
  const std::size_t n = split.num_vertices();
  std::vector<Vec3> loop;
  for (int b : split.boundary) loop.push_back(split.positions[b]);
  p.boundary_angles = chord_angles(loop);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, 2);
  std::vector<char> fixed(n, 0);
  for (std::size_t i = 0; i < split.boundary.size(); ++i) {
    const int b = split.boundary[i];
    fixed[b] = 1;
    const double a = p.boundary_angles[i];
    values(b, 0) = a == 0.0 ? 1.0 : std::cos(a);
    values(b, 1) = a == 0.0 ? 0.0 : std::sin(a);
  }
  detail::solve_uniform_laplace(detail::tri_adjacency(n, split.tris), fixed, values);
  p.uv.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.uv[i] = values.row(i).transpose();
  return p;
}

inline ParamPatch harmonic_disk_map(const PolyMesh& mesh, const Patch& patch) {
  return harmonic_disk_map(center_split(mesh, patch), patch);
}

struct PointLocation {
  int triangle = -1;
  std::array<double, 3> bary{0, 0, 0};
  bool inside = false;
};

/// Uniform-grid point locator over the triangles of a uv domain.
class TriangleLocator {
 public:
  TriangleLocator() = default;
  TriangleLocator(std::vector<Vec2> uv, std::vector<std::array<int, 3>> tris)
      : uv_(std::move(uv)), tris_(std::move(tris)) {
    if (tris_.empty()) throw Error(ErrorKind::InvalidArgument, "cannot locate points in an empty patch");
    lo_ = hi_ = uv_[tris_[0][0]];
    for (const auto& t : tris_)
      for (int v : t) {
        lo_ = lo_.cwiseMin(uv_[v]);
        hi_ = hi_.cwiseMax(uv_[v]);
      }
    res_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(tris_.size()))));
    cells_.assign(static_cast<std::size_t>(res_) * res_, {});
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      Vec2 a = uv_[tris_[t][0]], b = a;
      for (int v : tris_[t]) {
        a = a.cwiseMin(uv_[v]);
        b = b.cwiseMax(uv_[v]);
      }
      auto [i0, j0] = cell(a);
      auto [i1, j1] = cell(b);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) cells_[static_cast<std::size_t>(j) * res_ + i].push_back(static_cast<int>(t));
    }
  }

  PointLocation locate(const Vec2& q) const {
    PointLocation best;
    double best_min = -std::numeric_limits<double>::infinity();
    if (q.x() >= lo_.x() - 1e-12 && q.y() >= lo_.y() - 1e-12 && q.x() <= hi_.x() + 1e-12 && q.y() <= hi_.y() + 1e-12) {
      auto [i, j] = cell(q);
      for (int t : cells_[static_cast<std::size_t>(j) * res_ + i]) {
        const auto& tr = tris_[t];
        auto bc = barycentric(q, uv_[tr[0]], uv_[tr[1]], uv_[tr[2]]);
        const double m = std::min({bc[0], bc[1], bc[2]});
        if (m > best_min) {
          best_min = m;
          best = {t, bc, true};
        }
      }
    }
    if (best.triangle >= 0 && best_min >= -1e-12) {
      for (double& c : best.bary) c = std::max(c, 0.0);
      const double s = best.bary[0] + best.bary[1] + best.bary[2];
      for (double& c : best.bary) c /= s;
      return best;
    }
    return nearest(q);
  }

  const std::vector<Vec2>& uv() const { return uv_; }
  const std::vector<std::array<int, 3>>& tris() const { return tris_; }

 private:
  std::pair<int, int> cell(const Vec2& p) const {
    const Vec2 ext = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
    auto clampi = [&](double x) { return std::clamp(static_cast<int>(x * res_), 0, res_ - 1); };
    return {clampi((p.x() - lo_.x()) / ext.x()), clampi((p.y() - lo_.y()) / ext.y())};
  }

  // Closest point over all triangles, expressed in that triangle's coordinates.
  PointLocation nearest(const Vec2& q) const {
    PointLocation best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const auto& tr = tris_[t];
      const Vec3 a(uv_[tr[0]].x(), uv_[tr[0]].y(), 0), b(uv_[tr[1]].x(), uv_[tr[1]].y(), 0),
          c(uv_[tr[2]].x(), uv_[tr[2]].y(), 0);
      const Vec3 cp = closest_on_triangle(Vec3(q.x(), q.y(), 0), a, b, c);
      const double d = (cp.head<2>() - q).norm();
      if (d < best_d) {
        best_d = d;
        auto bc = barycentric(cp.head<2>(), uv_[tr[0]], uv_[tr[1]], uv_[tr[2]]);
        for (double& x : bc) x = std::max(x, 0.0);
        const double s = bc[0] + bc[1] + bc[2];
        for (double& x : bc) x /= s;
        best = {static_cast<int>(t), bc, false};
      }
    }
    return best;
  }

  std::vector<Vec2> uv_;
  std::vector<std::array<int, 3>> tris_;
  Vec2 lo_ = Vec2::Zero(), hi_ = Vec2::Zero();
  int res_ = 1;
  std::vector<std::vector<int>> cells_;
};

inline PointLocation locate_point(const ParamPatch& param, const Vec2& q) {
  return TriangleLocator(param.uv, param.split.tris).locate(q);
}

/// Barycentric interpolation of per-vertex values.
template <class T>
T interpolate(const std::vector<T>& values, const std::array<int, 3>& tri, const std::array<double, 3>& bary) {
  return bary[0] * values[tri[0]] + bary[1] * values[tri[1]] + bary[2] * values[tri[2]];
}

}  // namespace feqtee
