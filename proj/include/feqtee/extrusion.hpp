#pragma once

#include <vector>

#include "feqtee/record.hpp"

namespace feqtee {

/******************************************************************************
Geometric extrusion, in both directions.

capture_extrusion collapses a loop, flattens the base patch by smoothing its
interior and stores how far every base vertex (and every face center) sat
from its smoothed position. apply_extrusion runs the same smoothing and
flattening on a target patch, extrudes it topologically and moves the new
patch vertices by the interpolated displacements. Interior smoothing is the
exact harmonic solve in both directions so that the flattened patch depends
only on its boundary.
******************************************************************************/

/// Pairing of target boundary frames with record frames by nearest angle.
/// Distances within 1e-9 count as ties and go to the smaller record index,
/// so rounding in the angles cannot flip a pairing.
inline std::vector<int> pair_frames(const std::vector<double>& target, const std::vector<double>& source) {
  std::vector<int> out;
  for (double a : target) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < source.size(); ++j) {
      const double d = circular_distance(a, source[j]);
      if (d < best_d - 1e-9) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    out.push_back(best);
  }
  return out;
}

/// Rotate a patch so that `reference` comes first on its boundary.
inline Patch with_reference(Patch p, int reference) {
  auto it = std::find(p.boundary.begin(), p.boundary.end(), reference);
  if (it == p.boundary.end())
    throw Error(ErrorKind::Topology, "reference vertex " + std::to_string(reference) + " is not on the patch boundary");
  std::rotate(p.boundary.begin(), it, p.boundary.end());
  p.reference = reference;
  return p;
}

/// Result of collapsing one loop during decomposition.
struct CapturedExtrusion {
  PolyMesh mesh;                  // collapsed, base interior smoothed
  std::vector<int> vertex_map;    // pre-collapse vertex -> vertex of `mesh`
  std::vector<int> face_map;      // pre-collapse face -> face of `mesh`, -1 for loop faces
  std::vector<int> survivor;      // vertex of `mesh` -> pre-collapse vertex
  Patch base;                     // base patch in `mesh`
  SplitPatch split;               // center split of `base` on smoothed positions
  std::vector<Vec3> displacement; // per split vertex, world space
  std::vector<LocalFrame> frames; // per base.boundary entry

  /// Record with the parametrization anchored at `reference` (a base boundary vertex).
  ExtrusionRecord make_record(int id, int reference) const {
    const Patch p = with_reference(base, reference);
    const std::size_t shift = std::find(base.boundary.begin(), base.boundary.end(), reference) - base.boundary.begin();
    SplitPatch s = split;
    std::rotate(s.boundary.begin(), s.boundary.begin() + shift, s.boundary.end());
    const ParamPatch param = harmonic_disk_map(s, p);
    ExtrusionRecord r;
    r.id = id;
    r.base_uv = param.uv;
    r.base_tris = s.tris;
    r.boundary = s.boundary;
    r.boundary_angles = param.boundary_angles;
    const std::size_t m = frames.size();
    for (std::size_t j = 0; j < m; ++j) {
      const LocalFrame& f = frames[(j + shift) % m];
      std::vector<Vec3> local;
      local.reserve(displacement.size());
      for (const auto& d : displacement) local.push_back(f.to_local(d));
      r.displacements.push_back(std::move(local));
    }
    return r;
  }
};

/// Collapse `loop` (base side chosen by `base_hint` or the default rule) and
/// capture the displacements of its base patch.
inline CapturedExtrusion capture_extrusion(const PolyMesh& mesh, const FaceLoop& loop,
                                           const std::vector<int>* base_hint = nullptr) {
  const std::vector<int> old_base = loop_base_side(mesh, loop, base_hint);
  CollapseResult col = collapse_face_loop(mesh, loop, &old_base);
  CapturedExtrusion c;
  c.vertex_map = std::move(col.vertex_map);
  c.face_map = std::move(col.face_map);
  c.survivor = std::move(col.survivor);
  const Patch collapsed_base = make_patch(col.mesh, col.base_faces);
  c.mesh = smooth_interior_exact(col.mesh, collapsed_base);
  c.base = collapsed_base;
  c.split = center_split(c.mesh, c.base);

  std::vector<Vec3> before(c.split.num_vertices(), Vec3::Zero());
  std::vector<char> seen(c.split.num_vertices(), 0);
  std::unordered_map<int, int> local;
  for (std::size_t i = 0; i < c.split.num_original; ++i) local[c.split.vertices[i]] = static_cast<int>(i);
  for (int f : old_base)
    for (int u : mesh.face(f)) {
      const int l = local.at(c.vertex_map[u]);
      before[l] = mesh.position(u);
      seen[l] = 1;
    }
  for (std::size_t k = 0; k < c.split.center_face.size(); ++k) {
    const int new_face = c.split.center_face[k];
    const int old_face = static_cast<int>(std::find(c.face_map.begin(), c.face_map.end(), new_face) - c.face_map.begin());
    const int l = static_cast<int>(c.split.num_original + k);
    before[l] = mesh.face_centroid(old_face);
    seen[l] = 1;
  }
  for (char s : seen)
    if (!s) throw Error(ErrorKind::Decomposition, "base patch vertex has no pre-collapse position");
  c.displacement.resize(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) c.displacement[i] = before[i] - c.split.positions[i];
  c.frames = boundary_frames(c.mesh, c.base);
  return c;
}

struct ApplyResult {
  PolyMesh mesh;
  Patch extended;               // boundary = outer rail, same reference as the target patch
  std::vector<int> loop_faces;
  std::vector<int> inner_copy;  // per target boundary entry
};

/// Extrude `patch` with the shape stored in `rec`.
inline ApplyResult apply_extrusion(const PolyMesh& mesh, const Patch& patch, const ExtrusionRecord& rec) {
  rec.validate();
  const PolyMesh smoothed = smooth_interior_exact(mesh, patch);
  const SplitPatch split = center_split(smoothed, patch);
  const ParamPatch param = harmonic_disk_map(split, patch);
  const std::vector<LocalFrame> frames = boundary_frames(smoothed, patch);
  const std::vector<int> pairing = pair_frames(param.boundary_angles, rec.boundary_angles);
  ExtrudeResult ext = extrude_patch(smoothed, patch);

  const TriangleLocator locator(rec.base_uv, rec.base_tris);
  std::unordered_map<int, int> copy_of;
  for (std::size_t i = 0; i < patch.boundary.size(); ++i) copy_of[patch.boundary[i]] = ext.inner_copy[i];
  const double inv = 1.0 / static_cast<double>(frames.size());
  for (std::size_t v = 0; v < split.num_original; ++v) {
    const Vec2& q = param.uv[v];
    if (!q.allFinite() || q.norm() > 1.0 + 1e-9)
      throw Error(ErrorKind::Application, "parameter point outside the unit disk");
    const PointLocation loc = locator.locate(q);
    const auto& tri = rec.base_tris[loc.triangle];
    Vec3 avg = Vec3::Zero();
    for (std::size_t t = 0; t < frames.size(); ++t)
      avg += frames[t].to_world(interpolate(rec.displacements[pairing[t]], tri, loc.bary));
    const int mesh_v = split.vertices[v];
    auto it = copy_of.find(mesh_v);
    const int dst = it == copy_of.end() ? mesh_v : it->second;
    ext.mesh.set_position(dst, smoothed.position(mesh_v) + inv * avg);
  }
  return {std::move(ext.mesh), std::move(ext.extended), std::move(ext.loop_faces), std::move(ext.inner_copy)};
}

}  // namespace feqtee
