#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "feqtee/face_loop.hpp"

namespace feqtee {

/// A disk-topology face set of a parent mesh. `boundary` is the vertex cycle
/// traversed along the patch's own halfedges (counterclockwise seen from
/// outside), rotated so that it starts at `reference`.
struct Patch {
  std::vector<int> faces;  // sorted
  std::vector<int> boundary;
  int reference = -1;

  bool contains_face(int f) const { return std::binary_search(faces.begin(), faces.end(), f); }
};

/// Boundary halfedges of a face set chained into cycles.
inline std::vector<std::vector<int>> face_set_boundary_cycles(const PolyMesh& mesh, const std::vector<int>& sorted_faces) {
  auto inside = [&](int f) { return f >= 0 && std::binary_search(sorted_faces.begin(), sorted_faces.end(), f); };
  std::map<int, std::vector<int>> from;  // origin vertex -> boundary halfedges
  for (int f : sorted_faces) {
    const int h0 = mesh.face_halfedge(f);
    for (int k = 0; k < mesh.face_degree(f); ++k)
      if (!inside(mesh.opposite_face(h0 + k))) from[mesh.origin(h0 + k)].push_back(h0 + k);
  }
  std::set<int> used;
  std::vector<std::vector<int>> cycles;
  for (auto& [v, hs] : from) {
    for (int start : hs) {
      if (used.count(start)) continue;
      std::vector<int> cycle;
      int h = start;
      while (!used.count(h)) {
        used.insert(h);
        cycle.push_back(h);
        const auto& nexts = from[mesh.target(h)];
        int pick = -1;
        for (int c : nexts)
          if (!used.count(c)) { pick = c; break; }
        if (pick < 0) break;
        h = pick;
      }
      cycles.push_back(std::move(cycle));
    }
  }
  return cycles;
}

/// Validate a face set as a disk and build its Patch. reference < 0 picks the
/// smallest boundary vertex id.
inline Patch make_patch(const PolyMesh& mesh, std::vector<int> faces, int reference = -1) {
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
  if (faces.empty()) throw Error(ErrorKind::Topology, "empty patch");
  for (int f : faces)
    if (f < 0 || f >= static_cast<int>(mesh.num_faces()))
      throw Error(ErrorKind::OutOfRange, "patch face " + std::to_string(f) + " does not exist");

  // Edge-connectedness.
  {
    std::set<int> seen{faces.front()};
    std::vector<int> stack{faces.front()};
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      const int h0 = mesh.face_halfedge(f);
      for (int k = 0; k < mesh.face_degree(f); ++k) {
        const int g = mesh.opposite_face(h0 + k);
        if (g >= 0 && std::binary_search(faces.begin(), faces.end(), g) && seen.insert(g).second)
          stack.push_back(g);
      }
    }
    if (seen.size() != faces.size()) throw Error(ErrorKind::Topology, "patch faces are not edge-connected");
  }

  const auto cycles = face_set_boundary_cycles(mesh, faces);
  if (cycles.size() != 1) throw Error(ErrorKind::Topology, "patch has " + std::to_string(cycles.size()) + " boundary cycles");
  const auto& cycle = cycles.front();
  if (cycle.size() < 3) throw Error(ErrorKind::Topology, "patch boundary is shorter than 3 edges");
  std::vector<int> boundary;
  for (int h : cycle) boundary.push_back(mesh.origin(h));
  if (mesh.target(cycle.back()) != boundary.front())
    throw Error(ErrorKind::Topology, "patch boundary does not close");
  {
    std::vector<int> sorted = boundary;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::Topology, "patch boundary is pinched");
  }
  std::set<int> verts, edges;
  for (int f : faces) {
    const int h0 = mesh.face_halfedge(f);
    for (int k = 0; k < mesh.face_degree(f); ++k) {
      verts.insert(mesh.origin(h0 + k));
      edges.insert(mesh.edge_of(h0 + k));
    }
  }
  const long chi = static_cast<long>(verts.size()) - static_cast<long>(edges.size()) + static_cast<long>(faces.size());
  if (chi != 1) throw Error(ErrorKind::Topology, "patch Euler characteristic is " + std::to_string(chi) + ", not 1");

  if (reference < 0) reference = *std::min_element(boundary.begin(), boundary.end());
  auto it = std::find(boundary.begin(), boundary.end(), reference);
  if (it == boundary.end())
    throw Error(ErrorKind::Topology, "reference vertex " + std::to_string(reference) + " is not on the patch boundary");
  std::rotate(boundary.begin(), it, boundary.end());
  return Patch{std::move(faces), std::move(boundary), reference};
}

inline bool is_disk(const PolyMesh& mesh, const std::vector<int>& faces) {
  try {
    make_patch(mesh, faces);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Vertices of a face set (sorted) and the interior subset.
inline std::vector<int> patch_vertices(const PolyMesh& mesh, const Patch& patch) {
  std::set<int> verts;
  for (int f : patch.faces)
    for (int v : mesh.face(f)) verts.insert(v);
  return {verts.begin(), verts.end()};
}

struct ExtrudeResult {
  PolyMesh mesh;
  FaceLoop loop;
  std::vector<int> loop_faces;   // in boundary order
  std::vector<int> inner_copy;   // inner_copy[i] duplicates patch.boundary[i]
  Patch extended;                // patch faces + loop faces, boundary = outer rail
};

/// Topological extrusion: the patch is detached along its boundary, the
/// boundary vertices are duplicated (new ids appended, same positions) and a
/// loop of quads joins the two cycles. Existing face ids are preserved and
/// the loop faces are appended.
inline ExtrudeResult extrude_patch(const PolyMesh& mesh, const Patch& patch) {
  const auto& b = patch.boundary;
  const int m = static_cast<int>(b.size());
  if (m < 3) throw Error(ErrorKind::Topology, "patch boundary is shorter than 3 edges");
  const int n = static_cast<int>(mesh.num_vertices());
  std::vector<Vec3> positions = mesh.positions();
  std::map<int, int> copy_of;
  ExtrudeResult result;
  for (int i = 0; i < m; ++i) {
    copy_of[b[i]] = n + i;
    result.inner_copy.push_back(n + i);
    positions.push_back(mesh.position(b[i]));
  }
  std::vector<std::vector<int>> faces = mesh.faces();
  for (int f : patch.faces)
    for (int& v : faces[f])
      if (auto it = copy_of.find(v); it != copy_of.end()) v = it->second;
  const int first_loop_face = static_cast<int>(faces.size());
  for (int i = 0; i < m; ++i) {
    const int j = (i + 1) % m;
    faces.push_back({b[i], b[j], n + j, n + i});
    result.loop_faces.push_back(first_loop_face + i);
  }
  result.mesh = PolyMesh(std::move(positions), std::move(faces));
  // Corner 3 of loop face 0 runs inner_copy[0] -> boundary[0]: the sleeper shared with the last loop face.
  result.loop = trace_from_halfedge(result.mesh, result.mesh.face_halfedge(first_loop_face) + 3);
  std::vector<int> ext = patch.faces;
  ext.insert(ext.end(), result.loop_faces.begin(), result.loop_faces.end());
  std::sort(ext.begin(), ext.end());
  result.extended = Patch{std::move(ext), patch.boundary, patch.reference};
  return result;
}

struct CollapseResult {
  PolyMesh mesh;
  std::vector<int> vertex_map;  // old vertex -> new vertex (merged vertices map to their survivor)
  std::vector<int> face_map;    // old face -> new face, -1 for removed loop faces
  std::vector<int> base_faces;  // new ids of the base side
  std::vector<int> survivor;    // new vertex -> the old vertex that kept its place
};

/// Which side of a clean loop counts as its base patch: the side meeting
/// `hint` if given, otherwise the side with fewer faces (then smaller area).
inline std::vector<int> loop_base_side(const PolyMesh& mesh, const FaceLoop& loop,
                                       const std::vector<int>* hint = nullptr) {
  auto sides = loop_sides(mesh, loop);
  if (sides.size() != 2)
    throw Error(ErrorKind::UnsupportedLoop, "loop separates the surface into " + std::to_string(sides.size()) + " parts");
  if (hint) {
    for (auto& s : sides)
      for (int f : *hint)
        if (std::binary_search(s.begin(), s.end(), f)) return s;
    throw Error(ErrorKind::InvalidArgument, "base-side hint does not touch either side of the loop");
  }
  auto area = [&](const std::vector<int>& s) {
    double a = 0;
    for (int f : s) a += mesh.face_area(f);
    return a;
  };
  if (sides[0].size() != sides[1].size()) return sides[0].size() < sides[1].size() ? sides[0] : sides[1];
  return area(sides[0]) <= area(sides[1]) ? sides[0] : sides[1];
}

/// Remove a clean loop and stitch its rails. Rail vertices on the base side
/// are merged into their counterparts on the other side, which keep their
/// positions.
inline CollapseResult collapse_face_loop(const PolyMesh& mesh, const FaceLoop& loop,
                                         const std::vector<int>* base_hint = nullptr) {
  if (loop.self_intersecting) throw Error(ErrorKind::UnsupportedLoop, "loop is self-intersecting");
  if (loop.self_adjacent) throw Error(ErrorKind::UnsupportedLoop, "loop is self-adjacent");
  const std::vector<int> base = loop_base_side(mesh, loop, base_hint);
  auto in_base = [&](int f) { return f >= 0 && std::binary_search(base.begin(), base.end(), f); };

  // Quad [a,b,c,d] entered through a->b: rail next = b->c, rail prev = d->a.
  const int h0 = loop.entry.front();
  const bool base_on_next = in_base(mesh.opposite_face(mesh.next(h0)));
  std::map<int, int> merge;  // base-rail vertex -> surviving vertex
  for (int h : loop.entry) {
    const int rail_next = mesh.next(h), rail_prev = mesh.prev(h);
    const bool next_is_base = in_base(mesh.opposite_face(rail_next));
    const bool prev_is_base = in_base(mesh.opposite_face(rail_prev));
    if (next_is_base != base_on_next || prev_is_base == base_on_next)
      throw Error(ErrorKind::UnsupportedLoop, "loop rails are not separated by the loop");
    const int a = mesh.origin(h), b = mesh.target(h);
    const int c = mesh.target(rail_next), d = mesh.origin(rail_prev);
    if (base_on_next) {
      merge[b] = a;
      merge[c] = d;
    } else {
      merge[a] = b;
      merge[d] = c;
    }
  }
  for (const auto& [from, to] : merge)
    if (merge.count(to)) throw Error(ErrorKind::DegenerateResult, "loop rails share vertex " + std::to_string(to));

  const int nv = static_cast<int>(mesh.num_vertices());
  CollapseResult result;
  result.vertex_map.assign(nv, -1);
  std::vector<Vec3> positions;
  for (int v = 0; v < nv; ++v) {
    if (merge.count(v)) continue;
    result.vertex_map[v] = static_cast<int>(positions.size());
    result.survivor.push_back(v);
    positions.push_back(mesh.position(v));
  }
  for (const auto& [from, to] : merge) result.vertex_map[from] = result.vertex_map[to];

  std::vector<char> in_loop(mesh.num_faces(), 0);
  for (int f : loop.faces) in_loop[f] = 1;
  result.face_map.assign(mesh.num_faces(), -1);
  std::vector<std::vector<int>> faces;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (in_loop[f]) continue;
    std::vector<int> poly;
    for (int v : mesh.face(f)) poly.push_back(result.vertex_map[v]);
    result.face_map[f] = static_cast<int>(faces.size());
    faces.push_back(std::move(poly));
  }
  {
    std::set<std::vector<int>> vertex_sets;
    for (const auto& poly : faces) {
      std::vector<int> s = poly;
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw Error(ErrorKind::DegenerateResult, "collapse folds a face onto itself");
      if (!vertex_sets.insert(s).second)
        throw Error(ErrorKind::DegenerateResult, "collapse produces two faces on the same vertices");
    }
  }
  try {
    result.mesh = PolyMesh(std::move(positions), std::move(faces));
  } catch (const Error& e) {
    throw Error(ErrorKind::DegenerateResult, std::string("collapse result is not manifold: ") + e.what());
  }
  for (int f : base) result.base_faces.push_back(result.face_map[f]);
  std::sort(result.base_faces.begin(), result.base_faces.end());
  return result;
}

}  // namespace feqtee
