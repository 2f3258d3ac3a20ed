#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "feqtee/mesh.hpp"

namespace feqtee {

/// A cyclic ribbon of quads. faces[i] is left through sleepers[i] into
/// faces[i+1]; entry[i] is the halfedge of faces[i] through which the ribbon
/// entered it, so the two rails of faces[i] are next(entry[i]) and
/// prev(entry[i]).
struct FaceLoop {
  std::vector<int> faces;
  std::vector<int> sleepers;
  std::vector<int> entry;
  std::vector<int> rail_a;  // edge ids, one per face: next(entry)
  std::vector<int> rail_b;  // edge ids, one per face: prev(entry)
  bool self_intersecting = false;
  bool self_adjacent = false;

  std::size_t size() const { return faces.size(); }
};

/// Traverse the ribbon that enters face_of(h0) through h0.
inline FaceLoop trace_from_halfedge(const PolyMesh& mesh, int h0) {
  const int seed_edge = mesh.edge_of(h0);
  if (mesh.is_boundary(h0))
    throw Error(ErrorKind::Topology, "seed edge " + std::to_string(seed_edge) + " is a boundary edge");
  FaceLoop loop;
  int h = h0;
  const std::size_t limit = mesh.num_halfedges();
  do {
    const int f = mesh.face_of(h);
    if (mesh.face_degree(f) != 4)
      throw Error(ErrorKind::NotQuad, "face " + std::to_string(f) + " has " +
                                          std::to_string(mesh.face_degree(f)) + " sides");
    const int exit = mesh.next(mesh.next(h));
    if (mesh.is_boundary(exit))
      throw Error(ErrorKind::Topology, "face strip through edge " + std::to_string(seed_edge) +
                                           " reaches the boundary");
    loop.faces.push_back(f);
    loop.entry.push_back(h);
    loop.sleepers.push_back(mesh.edge_of(exit));
    loop.rail_a.push_back(mesh.edge_of(mesh.next(h)));
    loop.rail_b.push_back(mesh.edge_of(mesh.prev(h)));
    h = mesh.twin(exit);
    if (loop.faces.size() > limit) throw Error(ErrorKind::Topology, "face loop does not close");
  } while (h != h0);

  std::vector<int> sorted = loop.faces;
  std::sort(sorted.begin(), sorted.end());
  loop.self_intersecting = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();

  std::set<int> sleeper_set(loop.sleepers.begin(), loop.sleepers.end());
  for (std::size_t i = 0; i < loop.size() && !loop.self_adjacent; ++i) {
    for (int r : {mesh.next(loop.entry[i]), mesh.prev(loop.entry[i])}) {
      if (sleeper_set.count(mesh.edge_of(r))) continue;
      const int g = mesh.opposite_face(r);
      if (g >= 0 && std::binary_search(sorted.begin(), sorted.end(), g)) {
        loop.self_adjacent = true;
        break;
      }
    }
  }
  return loop;
}

/// The loop whose sleepers contain seed_edge, starting at the face on the
/// left of the edge's representative halfedge.
inline FaceLoop trace_face_loop(const PolyMesh& mesh, int seed_edge) {
  if (seed_edge < 0 || seed_edge >= static_cast<int>(mesh.num_edges()))
    throw Error(ErrorKind::OutOfRange, "edge " + std::to_string(seed_edge) + " does not exist");
  return trace_from_halfedge(mesh, mesh.edge_halfedge(seed_edge));
}

/// Rotation- and reversal-invariant key of a cyclic face sequence.
inline std::vector<int> canonical_loop_key(const std::vector<int>& faces) {
  std::vector<int> best;
  auto consider = [&](const std::vector<int>& seq) {
    const std::size_t n = seq.size();
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<int> rot(n);
      for (std::size_t i = 0; i < n; ++i) rot[i] = seq[(r + i) % n];
      if (best.empty() || rot < best) best = std::move(rot);
    }
  };
  consider(faces);
  consider(std::vector<int>(faces.rbegin(), faces.rend()));
  return best;
}

/// All face loops of an all-quad mesh, ordered by the smallest edge id they
/// contain as a sleeper.
inline std::vector<FaceLoop> enumerate_face_loops(const PolyMesh& mesh) {
  std::vector<char> used(mesh.num_edges(), 0);
  std::vector<FaceLoop> loops;
  std::set<std::vector<int>> seen;
  for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
    if (used[e] || mesh.is_boundary_edge(e)) continue;
    FaceLoop loop = trace_face_loop(mesh, e);
    for (int s : loop.sleepers) used[s] = 1;
    if (seen.insert(canonical_loop_key(loop.faces)).second) loops.push_back(std::move(loop));
  }
  return loops;
}

struct FeqReport {
  bool is_closed = false;
  int genus = 0;
  bool all_quads = false;
  std::vector<int> self_intersecting_loop_ids;
  std::vector<int> self_adjacent_loop_ids;

  bool is_feq() const {
    return is_closed && genus == 0 && all_quads && self_intersecting_loop_ids.empty() &&
           self_adjacent_loop_ids.empty();
  }
};

inline FeqReport validate_feq(const PolyMesh& mesh) {
  FeqReport report;
  report.is_closed = mesh.is_closed();
  report.all_quads = mesh.all_quads();
  // For closed connected surfaces V-E+F = 2-2g.
  report.genus = (2 - mesh.euler_characteristic()) / 2;
  if (report.is_closed && report.all_quads) {
    const auto loops = enumerate_face_loops(mesh);
    for (std::size_t i = 0; i < loops.size(); ++i) {
      if (loops[i].self_intersecting) report.self_intersecting_loop_ids.push_back(static_cast<int>(i));
      else if (loops[i].self_adjacent) report.self_adjacent_loop_ids.push_back(static_cast<int>(i));
    }
  }
  return report;
}

/// Connected components of the faces not in `loop`, joined across edges.
/// For a clean loop on a genus-0 surface there are exactly two.
inline std::vector<std::vector<int>> loop_sides(const PolyMesh& mesh, const FaceLoop& loop) {
  std::vector<char> blocked(mesh.num_faces(), 0);
  for (int f : loop.faces) blocked[f] = 1;
  std::vector<int> comp(mesh.num_faces(), -1);
  std::vector<std::vector<int>> sides;
  for (int s = 0; s < static_cast<int>(mesh.num_faces()); ++s) {
    if (blocked[s] || comp[s] >= 0) continue;
    std::vector<int> stack{s}, members;
    comp[s] = static_cast<int>(sides.size());
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      members.push_back(f);
      const int h0 = mesh.face_halfedge(f);
      for (int k = 0; k < mesh.face_degree(f); ++k) {
        const int g = mesh.opposite_face(h0 + k);
        if (g >= 0 && !blocked[g] && comp[g] < 0) {
          comp[g] = comp[s];
          stack.push_back(g);
        }
      }
    }
    std::sort(members.begin(), members.end());
    sides.push_back(std::move(members));
  }
  return sides;
}

}  // namespace feqtee
