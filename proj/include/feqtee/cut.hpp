#pragma once

#include <map>
#include <vector>

#include "feqtee/selection.hpp"

namespace feqtee {

/******************************************************************************
Quad-dominant selection: the domain is cut along the region curve itself.

The curve is pulled inside the domain (points near or beyond the domain
boundary snap to boundary vertices, so faces outside the domain never
change), intersected with the domain edges, and every face it passes
through is split along the resulting chords. Split polygons with more than
four corners are triangulated (ear clipping followed by Delaunay flips that
never touch polygon sides, so curve edges survive). The selection is the set
of new faces whose uv centroid lies inside the cut curve.
******************************************************************************/

struct CutResult {
  PolyMesh mesh;
  SelectionResult selection;
  std::vector<std::vector<int>> face_remap;  // old face -> faces that replace it
  UvDomain domain;                           // the input domain after the cut
};

namespace detail {

inline bool strictly_convex(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a) > 1e-14; }

inline bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross2(b - a, p - a) >= 0 && cross2(c - b, p - b) >= 0 && cross2(a - c, p - c) >= 0;
}

inline bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                     (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  return det > 1e-14;
}

/// Triangulate a simple counterclockwise polygon; sides are kept as constraints.
inline std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<int>& poly, const std::vector<Vec2>& uv) {
  std::vector<std::array<int, 3>> tris;
  std::vector<int> rest = poly;
  while (rest.size() > 3) {
    const std::size_t n = rest.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n && !clipped; ++i) {
      const int a = rest[(i + n - 1) % n], b = rest[i], c = rest[(i + 1) % n];
      if (!strictly_convex(uv[a], uv[b], uv[c])) continue;
      bool blocked = false;
      for (int v : rest)
        if (v != a && v != b && v != c && point_in_triangle(uv[v], uv[a], uv[b], uv[c])) {
          blocked = true;
          break;
        }
      if (blocked) continue;
      tris.push_back({a, b, c});
      rest.erase(rest.begin() + static_cast<long>(i));
      clipped = true;
    }
    if (!clipped) {  // numerically flat remainder: fan it
      for (std::size_t i = 1; i + 1 < rest.size(); ++i) tris.push_back({rest[0], rest[i], rest[i + 1]});
      rest.clear();
    }
  }
  if (rest.size() == 3) tris.push_back({rest[0], rest[1], rest[2]});

  // Lawson flips on diagonals only.
  auto side_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  std::set<std::pair<int, int>> sides;
  for (std::size_t i = 0; i < poly.size(); ++i) sides.insert(side_key(poly[i], poly[(i + 1) % poly.size()]));
  for (int pass = 0; pass < 100; ++pass) {
    bool flipped = false;
    for (std::size_t t = 0; t < tris.size() && !flipped; ++t)
      for (int k = 0; k < 3 && !flipped; ++k) {
        const int a = tris[t][k], b = tris[t][(k + 1) % 3], c = tris[t][(k + 2) % 3];
        if (sides.count(side_key(a, b))) continue;
        for (std::size_t s = 0; s < tris.size() && !flipped; ++s) {
          if (s == t) continue;
          for (int q = 0; q < 3; ++q) {
            if (tris[s][q] != b || tris[s][(q + 1) % 3] != a) continue;
            const int d = tris[s][(q + 2) % 3];
            if (in_circumcircle(uv[a], uv[b], uv[c], uv[d]) && strictly_convex(uv[c], uv[a], uv[d]) &&
                strictly_convex(uv[d], uv[b], uv[c])) {
              tris[t] = {c, a, d};
              tris[s] = {d, b, c};
              flipped = true;
            }
            break;
          }
        }
      }
    if (!flipped) break;
  }
  return tris;
}

}  // namespace detail

inline CutResult select_patch_quad_dominant(const PolyMesh& mesh, const UvDomain& domain, std::vector<Vec2> loop) {
  for (std::size_t i = 0; i < domain.faces.size(); ++i)
    if (mesh.face(domain.faces[i]) != domain.face_vertices[i])
      throw Error(ErrorKind::Selection, "domain no longer matches face " + std::to_string(domain.faces[i]));
  const detail::LocalDomain ld = detail::local_domain(domain);
  const PolyMesh& dm = ld.mesh;
  constexpr double eps = 1e-10;
  std::vector<Vec2> uv = ld.uv;  // grows with new vertices
  const std::size_t n_old = uv.size();

  // Pull the curve inside the (convex) domain polygon.
  const Patch whole = make_patch(dm, all_face_ids(dm));
  std::vector<Vec2> bpoly;
  for (int v : whole.boundary) bpoly.push_back(uv[v]);
  const double snap = 1.0 / GenericDisk::kDefaultRings / 4;
  for (auto& p : loop) {
    if (winding_number(p, bpoly) == 0 || distance_to_polyline(p, bpoly) < snap) {
      int best = whole.boundary[0];
      for (int v : whole.boundary)
        if ((uv[v] - p).norm() < (uv[best] - p).norm()) best = v;
      p = uv[best];
    }
  }
  {
    std::vector<Vec2> dedup;
    for (const auto& p : loop)
      if (dedup.empty() || (dedup.back() - p).norm() > eps) dedup.push_back(p);
    while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= eps) dedup.pop_back();
    loop = std::move(dedup);
  }
  if (loop.size() < 3 || std::abs(signed_area(loop)) < 1e-12)
    throw Error(ErrorKind::Selection, "region curve is degenerate inside the domain");

  // Classify curve points and collect crossings.
  std::map<int, std::vector<std::pair<double, int>>> edge_splits;  // edge -> (t from first endpoint, vertex)
  std::vector<int> point_face;                                       // per new vertex: containing face or -1
  auto new_vertex = [&](const Vec2& p, int face) {
    uv.push_back(p);
    point_face.push_back(face);
    return static_cast<int>(uv.size() - 1);
  };
  auto split_edge = [&](int e, double t) {
    auto& list = edge_splits[e];
    auto [a, b] = dm.edge_vertices(e);
    const Vec2 p = uv[a] + t * (uv[b] - uv[a]);
    for (const auto& [t0, v] : list)
      if ((uv[v] - p).norm() <= eps) return v;
    const int v = new_vertex(p, -1);
    list.emplace_back(t, v);
    return v;
  };
  auto face_polygon = [&](int f) {
    std::vector<Vec2> poly;
    for (int v : dm.face(f)) poly.push_back(uv[v]);
    return poly;
  };
  auto classify = [&](const Vec2& p) {
    for (std::size_t v = 0; v < n_old; ++v)
      if ((uv[v] - p).norm() <= eps) return static_cast<int>(v);
    for (int e = 0; e < static_cast<int>(dm.num_edges()); ++e) {
      auto [a, b] = dm.edge_vertices(e);
      if (point_segment_distance(p, uv[a], uv[b]) <= eps) {
        const Vec2 ab = uv[b] - uv[a];
        return split_edge(e, (p - uv[a]).dot(ab) / ab.squaredNorm());
      }
    }
    for (int f = 0; f < static_cast<int>(dm.num_faces()); ++f)
      if (winding_number(p, face_polygon(f)) != 0) return new_vertex(p, f);
    throw Error(ErrorKind::Selection, "region curve leaves the domain");
  };

  std::vector<int> refined;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Vec2 P = loop[k], Q = loop[(k + 1) % loop.size()];
    refined.push_back(classify(P));
    const Vec2 d = Q - P;
    const double len2 = d.squaredNorm();
    std::vector<std::pair<double, int>> events;
    std::vector<char> on_segment(n_old, 0);
    for (std::size_t v = 0; v < n_old; ++v) {
      const double s = (uv[v] - P).dot(d) / len2;
      if (s > 1e-9 && s < 1 - 1e-9 && point_segment_distance(uv[v], P, Q) <= eps) {
        on_segment[v] = 1;
        events.emplace_back(s, static_cast<int>(v));
      }
    }
    for (int e = 0; e < static_cast<int>(dm.num_edges()); ++e) {
      auto [a, b] = dm.edge_vertices(e);
      if (on_segment[a] || on_segment[b]) continue;
      if (!segments_properly_intersect(P, Q, uv[a], uv[b])) continue;
      const Vec2 ab = uv[b] - uv[a];
      const double den = cross2(d, ab);
      if (den == 0.0) continue;
      const double s = cross2(uv[a] - P, ab) / den;
      const double t = cross2(uv[a] - P, d) / den;
      if (s <= 1e-9 || s >= 1 - 1e-9) continue;
      events.emplace_back(s, split_edge(e, t));
    }
    std::sort(events.begin(), events.end());
    for (const auto& [s, v] : events) refined.push_back(v);
  }
  {
    std::vector<int> dedup;
    for (int v : refined)
      if (dedup.empty() || dedup.back() != v) dedup.push_back(v);
    while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
    refined = std::move(dedup);
    std::vector<int> sorted = refined;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || refined.size() < 3)
      throw Error(ErrorKind::Selection, "region curve is not simple on the domain");
  }

  // Face polygons with split points inserted along their sides.
  std::vector<std::vector<int>> face_poly(dm.num_faces());
  for (int f = 0; f < static_cast<int>(dm.num_faces()); ++f) {
    const int h0 = dm.face_halfedge(f);
    for (int k = 0; k < dm.face_degree(f); ++k) {
      const int h = h0 + k, a = dm.origin(h);
      face_poly[f].push_back(a);
      auto it = edge_splits.find(dm.edge_of(h));
      if (it == edge_splits.end()) continue;
      auto pts = it->second;
      const bool forward = dm.edge_vertices(dm.edge_of(h)).first == a;
      std::sort(pts.begin(), pts.end());
      if (!forward) std::reverse(pts.begin(), pts.end());
      for (const auto& [t, v] : pts) face_poly[f].push_back(v);
    }
  }

  // Chord pieces per face.
  std::map<int, std::vector<std::pair<int, int>>> pieces;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    const int u = refined[i], w = refined[(i + 1) % refined.size()];
    const Vec2 mid = 0.5 * (uv[u] + uv[w]);
    bool on_edge = false;
    for (int e = 0; e < static_cast<int>(dm.num_edges()) && !on_edge; ++e) {
      auto [a, b] = dm.edge_vertices(e);
      on_edge = point_segment_distance(mid, uv[a], uv[b]) <= eps;
    }
    if (on_edge) continue;
    int face = -1;
    for (int f = 0; f < static_cast<int>(dm.num_faces()) && face < 0; ++f)
      if (winding_number(mid, face_polygon(f)) != 0) face = f;
    if (face < 0) throw Error(ErrorKind::Selection, "region curve leaves the domain");
    pieces[face].emplace_back(u, w);
  }

  // Split faces along their chords.
  std::vector<std::vector<std::vector<int>>> sub(dm.num_faces());
  for (int f = 0; f < static_cast<int>(dm.num_faces()); ++f) sub[f] = {face_poly[f]};
  for (auto& [f, ps] : pieces) {
    auto on_boundary = [&](int v) {
      return std::find(face_poly[f].begin(), face_poly[f].end(), v) != face_poly[f].end();
    };
    std::map<int, std::vector<int>> adj;
    for (auto [u, w] : ps) {
      adj[u].push_back(w);
      adj[w].push_back(u);
    }
    std::set<std::pair<int, int>> used;
    std::vector<std::vector<int>> paths;
    for (auto [u, w] : ps) {
      for (auto [start, next] : {std::pair{u, w}, std::pair{w, u}}) {
        if (!on_boundary(start) || used.count({start, next})) continue;
        std::vector<int> path{start};
        int prev = start, cur = next;
        used.insert({prev, cur});
        used.insert({cur, prev});
        while (!on_boundary(cur)) {
          path.push_back(cur);
          int nxt = -1;
          for (int x : adj[cur])
            if (!used.count({cur, x})) nxt = x;
          if (nxt < 0) throw Error(ErrorKind::Selection, "region curve ends inside a face");
          used.insert({cur, nxt});
          used.insert({nxt, cur});
          prev = cur;
          cur = nxt;
        }
        path.push_back(cur);
        paths.push_back(std::move(path));
      }
    }
    if (used.size() != 2 * ps.size()) throw Error(ErrorKind::Selection, "region curve lies inside a single face");
    for (const auto& path : paths) {
      const int b0 = path.front(), b1 = path.back();
      if (b0 == b1) throw Error(ErrorKind::Selection, "region curve re-enters a face at the same point");
      const Vec2 probe = 0.5 * (uv[path[0]] + uv[path[1]]);
      bool done = false;
      for (std::size_t k = 0; k < sub[f].size() && !done; ++k) {
        auto& poly = sub[f][k];
        auto i0 = std::find(poly.begin(), poly.end(), b0), i1 = std::find(poly.begin(), poly.end(), b1);
        if (i0 == poly.end() || i1 == poly.end()) continue;
        std::vector<Vec2> pp;
        for (int v : poly) pp.push_back(uv[v]);
        if (winding_number(probe, pp) == 0) continue;
        const std::size_t n = poly.size(), a = i0 - poly.begin(), b = i1 - poly.begin();
        if (path.size() == 2 && ((a + 1) % n == b || (b + 1) % n == a)) {
          done = true;
          break;
        }
        std::vector<int> p1, p2;
        for (std::size_t i = a;; i = (i + 1) % n) {
          p1.push_back(poly[i]);
          if (i == b) break;
        }
        for (std::size_t i = path.size() - 2; i >= 1; --i) p1.push_back(path[i]);
        for (std::size_t i = b;; i = (i + 1) % n) {
          p2.push_back(poly[i]);
          if (i == a) break;
        }
        for (std::size_t i = 1; i + 1 < path.size(); ++i) p2.push_back(path[i]);
        poly = std::move(p1);
        sub[f].push_back(std::move(p2));
        done = true;
      }
      if (!done) throw Error(ErrorKind::Selection, "could not place a region chord");
    }
  }

  // Assemble the new mesh.
  const int nv = static_cast<int>(mesh.num_vertices());
  auto global = [&](int local) { return local < static_cast<int>(n_old) ? ld.vertex_ids[local] : nv + (local - static_cast<int>(n_old)); };
  std::vector<Vec3> positions = mesh.positions();
  for (std::size_t i = n_old; i < uv.size(); ++i) {
    const int pf = point_face[i - n_old];
    Vec3 p = Vec3::Zero();
    if (pf < 0) {
      for (const auto& [e, list] : edge_splits)
        for (const auto& [t, v] : list)
          if (v == static_cast<int>(i)) {
            auto [a, b] = dm.edge_vertices(e);
            p = (1 - t) * mesh.position(ld.vertex_ids[a]) + t * mesh.position(ld.vertex_ids[b]);
          }
    } else {
      // Center-split triangles of the original face.
      const auto& poly = dm.face(pf);
      const Vec2 cu = domain.center_uv[pf];
      const Vec3 c3 = mesh.face_centroid(domain.faces[pf]);
      const int k = static_cast<int>(poly.size());
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const int a = poly[j], b = poly[(j + 1) % k];
        auto bc = barycentric(uv[i], uv[a], uv[b], cu);
        const double m = std::min({bc[0], bc[1], bc[2]});
        if (m > best) {
          best = m;
          p = bc[0] * mesh.position(ld.vertex_ids[a]) + bc[1] * mesh.position(ld.vertex_ids[b]) + bc[2] * c3;
        }
      }
    }
    positions.push_back(p);
  }

  std::vector<std::vector<int>> faces = mesh.faces();
  CutResult out;
  out.face_remap.resize(mesh.num_faces());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) out.face_remap[f] = {static_cast<int>(f)};
  std::vector<int> local_of_face(mesh.num_faces(), -1);
  for (std::size_t i = 0; i < domain.faces.size(); ++i) local_of_face[domain.faces[i]] = static_cast<int>(i);
  std::vector<std::pair<int, std::vector<int>>> new_faces;  // (global id, local polygon)
  for (int f = 0; f < static_cast<int>(dm.num_faces()); ++f) {
    std::vector<std::vector<int>> polys;
    const bool untouched = sub[f].size() == 1 && sub[f][0].size() == static_cast<std::size_t>(dm.face_degree(f));
    for (const auto& poly : sub[f]) {
      if (poly.size() <= 4 || untouched) {
        polys.push_back(poly);
      } else {
        for (const auto& t : detail::triangulate_polygon(poly, uv)) polys.push_back({t[0], t[1], t[2]});
      }
    }
    const int g = domain.faces[f];
    out.face_remap[g].clear();
    for (std::size_t k = 0; k < polys.size(); ++k) {
      const int id = k == 0 ? g : static_cast<int>(faces.size());
      std::vector<int> gpoly;
      for (int v : polys[k]) gpoly.push_back(global(v));
      if (k == 0) faces[g] = gpoly;
      else faces.push_back(gpoly);
      out.face_remap[g].push_back(id);
      new_faces.emplace_back(id, polys[k]);
    }
  }
  try {
    out.mesh = PolyMesh(std::move(positions), std::move(faces));
  } catch (const Error& e) {
    throw Error(ErrorKind::Selection, std::string("cut produced an invalid mesh: ") + e.what());
  }

  // Selection and the updated domain.
  std::vector<Vec2> curve;
  for (int v : refined) curve.push_back(uv[v]);
  std::sort(new_faces.begin(), new_faces.end());
  for (const auto& [id, poly] : new_faces) {
    Vec2 c = Vec2::Zero();
    for (int v : poly) c += uv[v];
    c /= static_cast<double>(poly.size());
    out.domain.faces.push_back(id);
    out.domain.face_vertices.push_back(out.mesh.face(id));
    const int old_local = id < static_cast<int>(mesh.num_faces()) ? local_of_face[id] : -1;
    const bool same = old_local >= 0 && out.mesh.face(id) == domain.face_vertices[old_local];
    out.domain.center_uv.push_back(same ? domain.center_uv[old_local] : c);
    if (winding_number(c, curve) != 0) out.selection.faces.push_back(id);
  }
  for (std::size_t i = 0; i < uv.size(); ++i) out.domain.uv[global(static_cast<int>(i))] = uv[i];
  out.domain.reference = domain.reference;
  std::sort(out.selection.faces.begin(), out.selection.faces.end());
  if (out.selection.faces.empty() || !is_disk(out.mesh, out.selection.faces))
    throw Error(ErrorKind::Selection, "cut selection is not a disk");
  for (int v : make_patch(out.mesh, out.selection.faces).boundary) out.selection.cycle.push_back(v);
  std::vector<Vec2> cyc;
  for (int v : out.selection.cycle) cyc.push_back(out.domain.uv.at(v));
  std::vector<Vec2> rev(cyc.rbegin(), cyc.rend());
  out.selection.dtw_score = std::min(dtw_distance(cyc, loop), dtw_distance(rev, loop));
  out.selection.normalized_score = out.selection.dtw_score / static_cast<double>(std::max(cyc.size(), loop.size()));
  out.selection.cut = true;
  return out;
}

}  // namespace feqtee
