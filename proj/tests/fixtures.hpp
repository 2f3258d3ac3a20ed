#pragma once

// Mesh builders shared by the test suites.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "feqtee/topology.hpp"

namespace feqtee::testing {

/// Surface of the cube [-1,1]^3 with every side split into n x n quads.
inline PolyMesh subdivided_box(int n) {
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> positions;
  auto vid = [&](std::array<int, 3> p) {
    auto [it, inserted] = index.emplace(p, static_cast<int>(positions.size()));
    if (inserted)
      positions.emplace_back(2.0 * p[0] / n - 1.0, 2.0 * p[1] / n - 1.0, 2.0 * p[2] / n - 1.0);
    return it->second;
  };
  std::vector<std::vector<int>> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, w = (axis + 2) % 3;
    for (int side : {0, n}) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          std::array<int, 3> p{};
          p[axis] = side;
          p[u] = i;
          p[w] = j;
          auto q = p, r = p, s = p;
          q[u] += 1;
          r[u] += 1;
          r[w] += 1;
          s[w] += 1;
          std::vector<int> quad{vid(p), vid(q), vid(r), vid(s)};
          if (side == 0) std::reverse(quad.begin(), quad.end());
          faces.push_back(std::move(quad));
        }
    }
  }
  return PolyMesh(std::move(positions), std::move(faces));
}

inline PolyMesh cube() { return subdivided_box(1); }

/// Faces of a subdivided box lying on the side z = +1.
inline std::vector<int> top_faces(const PolyMesh& mesh) {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f)
    if (mesh.face_centroid(f).z() > 1.0 - 1e-9) out.push_back(f);
  return out;
}

/// Top face of a subdivided box at grid cell (i, j), i along x, j along y.
inline int top_cell(const PolyMesh& mesh, int n, int i, int j) {
  const double cx = -1.0 + (2.0 * i + 1.0) / n, cy = -1.0 + (2.0 * j + 1.0) / n;
  for (int f : top_faces(mesh)) {
    const Vec3 c = mesh.face_centroid(f);
    if (std::abs(c.x() - cx) < 1e-9 && std::abs(c.y() - cy) < 1e-9) return f;
  }
  return -1;
}

inline PolyMesh quad_torus(int n = 4, int m = 4) {
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> faces;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double a = kTwoPi * i / n, b = kTwoPi * j / m;
      positions.emplace_back((2 + std::cos(b)) * std::cos(a), (2 + std::cos(b)) * std::sin(a), std::sin(b));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      faces.push_back({i * m + j, ((i + 1) % n) * m + j, ((i + 1) % n) * m + (j + 1) % m, i * m + (j + 1) % m});
  return PolyMesh(std::move(positions), std::move(faces));
}

/// Closed genus-0 quad mesh dual to a figure-eight curve crossed by a circle;
/// the figure-eight's face loop passes through face 0 twice.
inline PolyMesh figure_eight_mesh() {
  enum { ST, SR, SB, SL, L1, L2, O };
  std::vector<Vec3> positions{{0, 0.3, 0}, {0.3, 0, 0},  {0, -0.3, 0}, {-0.3, 0, 0},
                              {-1, 0, 0},  {1, 0, 0},    {0, 0, 1}};
  std::vector<std::vector<int>> faces{{SR, ST, SL, SB},
                                      {L2, O, ST, SR},
                                      {ST, O, L1, SL},
                                      {L2, SR, SB, O},
                                      {SB, SL, L1, O}};
  return PolyMesh(std::move(positions), std::move(faces));
}

/// Open (n x n)-quad grid in the plane z = 0 covering [-1,1]^2.
inline PolyMesh planar_grid(int n) {
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> faces;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) positions.emplace_back(2.0 * i / n - 1.0, 2.0 * j / n - 1.0, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      faces.push_back({j * (n + 1) + i, j * (n + 1) + i + 1, (j + 1) * (n + 1) + i + 1, (j + 1) * (n + 1) + i});
  return PolyMesh(std::move(positions), std::move(faces));
}

inline std::vector<int> all_faces(const PolyMesh& mesh) {
  std::vector<int> out(mesh.num_faces());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

/// Extrude `faces` and give the lifted patch a shape: patch vertices are
/// scaled about the patch centroid by `shrink` and lifted by `height` along
/// the patch normal, plus an optional tilt along x.
struct SyntheticExtrusion {
  PolyMesh mesh;
  Patch extended;
  std::vector<int> loop_faces;
  std::pair<int, int> sleeper;  // vertex pair of one sleeper edge of the new loop
};

inline SyntheticExtrusion synthetic_extrude(const PolyMesh& mesh, const std::vector<int>& faces, double height,
                                            double shrink = 0.8, double tilt = 0.0) {
  Patch patch = make_patch(mesh, faces);
  Vec3 centroid = Vec3::Zero(), normal = Vec3::Zero();
  const auto verts = patch_vertices(mesh, patch);
  for (int v : verts) centroid += mesh.position(v);
  centroid /= static_cast<double>(verts.size());
  for (int f : patch.faces) normal += mesh.face_normal(f);
  normal.normalize();
  ExtrudeResult ext = extrude_patch(mesh, patch);
  PolyMesh out = ext.mesh;
  std::set<int> lifted;
  for (int f : patch.faces)
    for (int v : out.face(f)) lifted.insert(v);
  for (int v : lifted) {
    const Vec3 p = out.position(v);
    Vec3 q = centroid + shrink * (p - centroid) + height * normal;
    q += tilt * (p - centroid).dot(Vec3::UnitX()) * normal;
    out.set_position(v, q);
  }
  return {std::move(out), ext.extended, ext.loop_faces, {patch.boundary[0], ext.inner_copy[0]}};
}

/// A synthetic feature: final mesh and the vertex pair of a root-loop sleeper.
struct Feature {
  std::string name;
  PolyMesh mesh;
  std::pair<int, int> root_sleeper;
  int root_edge() const { return *mesh.find_edge(root_sleeper.first, root_sleeper.second); }
};

inline Feature bump_on_cube(double height = 0.6, double shrink = 0.7) {
  PolyMesh m = cube();
  auto e = synthetic_extrude(m, top_faces(m), height, shrink);
  return {"bump", e.mesh, e.sleeper};
}

/// Chain of `levels` extrusions stacked on the top of an n-box.
inline Feature tower(int n, int levels, double height = 0.4, double shrink = 0.85, double tilt = 0.0) {
  PolyMesh m = subdivided_box(n);
  auto first = synthetic_extrude(m, top_faces(m), height, shrink, tilt);
  Feature f{"tower" + std::to_string(n) + "x" + std::to_string(levels), first.mesh, first.sleeper};
  Patch current = first.extended;
  for (int k = 1; k < levels; ++k) {
    // Extruding the whole extended patch puts the new ring outermost, so it
    // becomes the root.
    auto e = synthetic_extrude(f.mesh, current.faces, height * (1.0 - 0.15 * k), shrink, tilt);
    f.mesh = e.mesh;
    f.root_sleeper = e.sleeper;
    current = e.extended;
  }
  return f;
}

/// Root extrusion of the whole top of an n-box followed by bumps on the
/// given cap cells (each a list of (i,j) cells), each bump optionally
/// continued as a chain.
inline Feature branching(int n, const std::vector<std::vector<std::pair<int, int>>>& bumps, int chain = 1,
                         double root_height = 0.5) {
  PolyMesh m = subdivided_box(n);
  std::vector<std::vector<int>> bump_faces;
  for (const auto& cells : bumps) {
    std::vector<int> fs;
    for (auto [i, j] : cells) fs.push_back(top_cell(m, n, i, j));
    bump_faces.push_back(fs);
  }
  auto root = synthetic_extrude(m, top_faces(m), root_height, 0.9);
  Feature f{"branch" + std::to_string(n) + "b" + std::to_string(bumps.size()) + "c" + std::to_string(chain), root.mesh,
            root.sleeper};
  double h = 0.35;
  for (const auto& fs : bump_faces) {
    Patch current = make_patch(f.mesh, fs);
    for (int k = 0; k < chain; ++k) {
      auto e = synthetic_extrude(f.mesh, current.faces, h * (1.0 - 0.2 * k), 0.75);
      f.mesh = e.mesh;
      current = e.extended;
    }
    h += 0.1;
  }
  return f;
}

}  // namespace feqtee::testing

namespace feqtee::testing {

/// Random disk-topology face set grown from a random seed face.
inline std::vector<int> random_disk_patch(const PolyMesh& mesh, std::mt19937_64& rng, int max_faces) {
  std::uniform_int_distribution<int> pick_face(0, static_cast<int>(mesh.num_faces()) - 1);
  std::vector<int> faces{pick_face(rng)};
  for (int attempt = 0; attempt < 8 * max_faces && static_cast<int>(faces.size()) < max_faces; ++attempt) {
    const int f = faces[std::uniform_int_distribution<std::size_t>(0, faces.size() - 1)(rng)];
    const int k = std::uniform_int_distribution<int>(0, mesh.face_degree(f) - 1)(rng);
    const int g = mesh.opposite_face(mesh.face_halfedge(f) + k);
    if (g < 0 || std::find(faces.begin(), faces.end(), g) != faces.end()) continue;
    auto grown = faces;
    grown.push_back(g);
    std::sort(grown.begin(), grown.end());
    if (static_cast<std::size_t>(grown.size()) < mesh.num_faces() && is_disk(mesh, grown)) faces = grown;
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

}  // namespace feqtee::testing
