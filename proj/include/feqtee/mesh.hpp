#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "feqtee/error.hpp"
#include "feqtee/geometry.hpp"

namespace feqtee {

/******************************************************************************
Polygonal surface mesh with halfedge connectivity.

Faces are stored as vertex cycles; the halfedge tables are derived from them
when the mesh is constructed and every constructor validates the 2-manifold
invariants, so any PolyMesh value in circulation is manifold. Boundaries are
permitted (twin == -1) so open patches can be represented; closed-ness is a
query, not an invariant.

Halfedge ids are dense: face f owns halfedges [offset(f), offset(f)+deg(f)),
halfedge offset(f)+i runs from corner i to corner i+1. Edge ids are assigned
in order of first appearance while scanning faces and corners.
******************************************************************************/
class PolyMesh {
 public:
  PolyMesh() = default;

  PolyMesh(std::vector<Vec3> positions, std::vector<std::vector<int>> faces)
      : positions_(std::move(positions)), faces_(std::move(faces)) {
    build();
  }

  std::size_t num_vertices() const { return positions_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_edges() const { return edge_he_.size(); }
  std::size_t num_halfedges() const { return he_face_.size(); }

  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int v) const { return positions_[v]; }
  // Geometry edits never touch connectivity.
  void set_position(int v, const Vec3& p) { positions_[v] = p; }
  std::vector<Vec3>& mutable_positions() { return positions_; }

  const std::vector<std::vector<int>>& faces() const { return faces_; }
  const std::vector<int>& face(int f) const { return faces_[f]; }
  int face_degree(int f) const { return static_cast<int>(faces_[f].size()); }

  int face_halfedge(int f) const { return face_offset_[f]; }
  int face_of(int h) const { return he_face_[h]; }
  int origin(int h) const { return faces_[he_face_[h]][corner(h)]; }
  int target(int h) const { return origin(next(h)); }
  int twin(int h) const { return he_twin_[h]; }
  int edge_of(int h) const { return he_edge_[h]; }
  int next(int h) const {
    const int f = he_face_[h];
    const int c = corner(h);
    return face_offset_[f] + (c + 1) % face_degree(f);
  }
  int prev(int h) const {
    const int f = he_face_[h];
    const int n = face_degree(f);
    return face_offset_[f] + (corner(h) + n - 1) % n;
  }
  int corner(int h) const { return h - face_offset_[he_face_[h]]; }
  bool is_boundary(int h) const { return he_twin_[h] < 0; }
  // Face across halfedge h, -1 on the boundary.
  int opposite_face(int h) const { return he_twin_[h] < 0 ? -1 : he_face_[he_twin_[h]]; }

  int edge_halfedge(int e) const { return edge_he_[e]; }
  std::pair<int, int> edge_vertices(int e) const {
    const int h = edge_he_[e];
    return {origin(h), target(h)};
  }
  bool is_boundary_edge(int e) const { return he_twin_[edge_he_[e]] < 0; }

  std::optional<int> find_halfedge(int from, int to) const {
    auto it = directed_.find(key(from, to));
    if (it == directed_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> find_edge(int a, int b) const {
    if (auto h = find_halfedge(a, b)) return he_edge_[*h];
    if (auto h = find_halfedge(b, a)) return he_edge_[*h];
    return std::nullopt;
  }

  // Outgoing halfedges of v, in rotation order.
  std::vector<int> outgoing(int v) const {
    std::vector<int> out;
    const int start = vertex_he_[v];
    int h = start;
    do {
      out.push_back(h);
      const int t = he_twin_[prev(h)];
      if (t < 0) break;
      h = t;
    } while (h != start);
    return out;
  }
  std::vector<int> vertex_faces(int v) const {
    std::vector<int> out;
    for (int h : outgoing(v)) out.push_back(he_face_[h]);
    return out;
  }
  std::vector<int> vertex_neighbors(int v) const {
    std::vector<int> out;
    for (int h : outgoing(v)) out.push_back(target(h));
    const int last = outgoing(v).back();
    if (he_twin_[prev(last)] < 0) out.push_back(origin(prev(last)));
    return out;
  }

  bool is_closed() const {
    for (int t : he_twin_)
      if (t < 0) return false;
    return true;
  }
  bool all_quads() const {
    for (const auto& f : faces_)
      if (f.size() != 4) return false;
    return true;
  }
  int euler_characteristic() const {
    return static_cast<int>(num_vertices()) - static_cast<int>(num_edges()) +
           static_cast<int>(num_faces());
  }

  std::vector<Vec3> face_points(int f) const {
    std::vector<Vec3> pts;
    pts.reserve(faces_[f].size());
    for (int v : faces_[f]) pts.push_back(positions_[v]);
    return pts;
  }
  Vec3 face_centroid(int f) const {
    Vec3 c = Vec3::Zero();
    for (int v : faces_[f]) c += positions_[v];
    return c / static_cast<double>(faces_[f].size());
  }
  double face_area(int f) const { return polygon_area(face_points(f)); }
  Vec3 face_normal(int f) const { return newell_normal(face_points(f)); }

  double bbox_diagonal() const {
    if (positions_.empty()) return 0.0;
    Vec3 lo = positions_[0], hi = positions_[0];
    for (const auto& p : positions_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
  }

 private:
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  static std::string edge_name(int a, int b) {
    return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
  }

  void build() {
    const int nv = static_cast<int>(positions_.size());
    face_offset_.resize(faces_.size());
    int total = 0;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& poly = faces_[f];
      if (poly.size() < 3)
        throw Error(ErrorKind::NonManifold, "face " + std::to_string(f) + " has fewer than 3 vertices");
      for (std::size_t i = 0; i < poly.size(); ++i) {
        if (poly[i] < 0 || poly[i] >= nv)
          throw Error(ErrorKind::OutOfRange, "face " + std::to_string(f) + " references vertex " +
                                                 std::to_string(poly[i]));
        for (std::size_t j = i + 1; j < poly.size(); ++j)
          if (poly[i] == poly[j])
            throw Error(ErrorKind::NonManifold,
                        "face " + std::to_string(f) + " repeats vertex " + std::to_string(poly[i]));
      }
      face_offset_[f] = total;
      total += static_cast<int>(poly.size());
    }
    he_face_.assign(total, -1);
    he_twin_.assign(total, -1);
    he_edge_.assign(total, -1);
    directed_.clear();
    directed_.reserve(total * 2);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& poly = faces_[f];
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const int h = face_offset_[f] + static_cast<int>(i);
        he_face_[h] = static_cast<int>(f);
        const int a = poly[i], b = poly[(i + 1) % poly.size()];
        if (!directed_.emplace(key(a, b), h).second)
          throw Error(ErrorKind::NonManifold,
                      "edge " + edge_name(std::min(a, b), std::max(a, b)) +
                          " is used twice in the same direction (shared by more than two faces or "
                          "inconsistently oriented)");
      }
    }
    edge_he_.clear();
    for (int h = 0; h < total; ++h) {
      const int a = origin(h), b = target(h);
      if (auto it = directed_.find(key(b, a)); it != directed_.end()) he_twin_[h] = it->second;
      if (he_edge_[h] >= 0) continue;
      he_edge_[h] = static_cast<int>(edge_he_.size());
      if (he_twin_[h] >= 0) he_edge_[he_twin_[h]] = he_edge_[h];
      edge_he_.push_back(h);
    }
    // Vertex stars: exactly one fan per vertex. A boundary vertex's fan starts
    // at the outgoing halfedge whose predecessor in rotation is missing.
    std::vector<std::vector<int>> out(nv);
    for (int h = 0; h < total; ++h) out[origin(h)].push_back(h);
    vertex_he_.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
      if (out[v].empty())
        throw Error(ErrorKind::NonManifold, "vertex " + std::to_string(v) + " is not used by any face");
      int start = -1, starts = 0;
      for (int h : out[v])
        if (he_twin_[h] < 0) {
          start = h;
          ++starts;
        }
      if (starts > 1)
        throw Error(ErrorKind::NonManifold, "vertex " + std::to_string(v) + " has a non-fan star");
      if (start < 0) start = out[v].front();
      vertex_he_[v] = start;
      std::size_t visited = 0;
      int h = start;
      do {
        ++visited;
        const int t = he_twin_[prev(h)];
        if (t < 0) break;
        h = t;
      } while (h != start && visited <= out[v].size());
      if (visited != out[v].size())
        throw Error(ErrorKind::NonManifold, "vertex " + std::to_string(v) + " has a non-fan star");
    }
  }

  std::vector<Vec3> positions_;
  std::vector<std::vector<int>> faces_;
  std::vector<int> face_offset_;
  std::vector<int> he_face_;
  std::vector<int> he_twin_;
  std::vector<int> he_edge_;
  std::vector<int> edge_he_;
  std::vector<int> vertex_he_;
  std::unordered_map<std::uint64_t, int> directed_;
};

inline std::vector<int> all_face_ids(const PolyMesh& mesh) {
  std::vector<int> out(mesh.num_faces());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

// ---------------------------------------------------------------------------
// OBJ

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace detail

/// Parse OBJ text. Only `v` and `f` records matter; normals, texture
/// coordinates, polylines and grouping statements are skipped.
inline PolyMesh parse_obj(std::string_view text) {
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> faces;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto toks = detail::split_ws(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (toks[0] == "v") {
      if (toks.size() < 4) throw Error(ErrorKind::Malformed, "vertex needs 3 coordinates", line_no);
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        if (!detail::parse_double(toks[k + 1], p[k]))
          throw Error(ErrorKind::Malformed, "bad coordinate '" + std::string(toks[k + 1]) + "'", line_no);
      positions.push_back(p);
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw Error(ErrorKind::Malformed, "face needs at least 3 vertices", line_no);
      std::vector<int> face;
      for (std::size_t k = 1; k < toks.size(); ++k) {
        std::string_view ref = toks[k].substr(0, toks[k].find('/'));
        long idx = 0;
        auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (ec != std::errc() || ptr != ref.data() + ref.size() || idx == 0)
          throw Error(ErrorKind::Malformed, "bad face index '" + std::string(toks[k]) + "'", line_no);
        const long n = static_cast<long>(positions.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n)
          throw Error(ErrorKind::Malformed, "face index " + std::to_string(idx) + " out of range", line_no);
        face.push_back(static_cast<int>(resolved));
      }
      faces.push_back(std::move(face));
    }
    if (end == text.size()) break;
  }
  return PolyMesh(std::move(positions), std::move(faces));
}

inline PolyMesh load_obj(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Malformed, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_obj(ss.str());
}

inline std::string to_obj(const PolyMesh& mesh) {
  std::string out;
  char buf[128];
  for (const auto& p : mesh.positions()) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const auto& f : mesh.faces()) {
    out += 'f';
    for (int v : f) out += ' ' + std::to_string(v + 1);
    out += '\n';
  }
  return out;
}

inline void save_obj(const PolyMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Malformed, "cannot write " + path);
  out << to_obj(mesh);
}

}  // namespace feqtee
