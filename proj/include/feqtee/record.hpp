#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "feqtee/parametrize.hpp"

namespace feqtee {

inline constexpr const char* kRecordFormat = "feqtee-rec-v1";

/// Orthonormal right-handed basis attached to a patch boundary vertex.
struct LocalFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();

  Vec3 to_local(const Vec3& d) const { return {x.dot(d), y.dot(d), z.dot(d)}; }
  Vec3 to_world(const Vec3& l) const { return l.x() * x + l.y() * y + l.z() * z; }
};

/// Frame at patch.boundary[i]: x points to the next boundary vertex, z is the
/// area-weighted normal of the patch faces around the vertex made
/// orthogonal to x, y = z cross x.
inline LocalFrame local_frame(const PolyMesh& mesh, const Patch& patch, std::size_t i) {
  const int v = patch.boundary[i];
  const int w = patch.boundary[(i + 1) % patch.boundary.size()];
  LocalFrame f;
  f.origin = mesh.position(v);
  Vec3 x = mesh.position(w) - f.origin;
  const double len = x.norm();
  if (!(len > 0)) throw Error(ErrorKind::DegenerateResult, "zero-length boundary edge at vertex " + std::to_string(v));
  x /= len;
  Vec3 n = Vec3::Zero();
  for (int face : mesh.vertex_faces(v))
    if (patch.contains_face(face)) n += mesh.face_normal(face);
  n -= n.dot(x) * x;
  const double nn = n.norm();
  if (!(nn > 1e-12 * len * len))
    throw Error(ErrorKind::DegenerateResult, "degenerate normal at boundary vertex " + std::to_string(v));
  f.x = x;
  f.z = n / nn;
  f.y = f.z.cross(f.x);
  return f;
}

inline std::vector<LocalFrame> boundary_frames(const PolyMesh& mesh, const Patch& patch) {
  std::vector<LocalFrame> out;
  for (std::size_t i = 0; i < patch.boundary.size(); ++i) out.push_back(local_frame(mesh, patch, i));
  return out;
}

/// One extrusion: the base patch flattened to the unit disk, its triangles,
/// and per-vertex displacements seen from every boundary vertex's frame.
struct ExtrusionRecord {
  int id = -1;
  std::vector<Vec2> base_uv;
  std::vector<std::array<int, 3>> base_tris;
  std::vector<int> boundary;               // local vertex ids, counterclockwise from the reference
  std::vector<double> boundary_angles;     // per boundary entry
  std::vector<std::vector<Vec3>> displacements;  // [frame][vertex], frame j sits at boundary[j]

  std::size_t num_vertices() const { return base_uv.size(); }
  std::size_t num_frames() const { return displacements.size(); }

  void validate() const {
    auto bad = [&](const std::string& what) {
      throw Error(ErrorKind::Malformed, "record " + std::to_string(id) + ": " + what);
    };
    if (base_tris.empty()) bad("no triangles");
    if (boundary.size() < 3) bad("boundary shorter than 3");
    if (boundary_angles.size() != boundary.size()) bad("boundary angle count mismatch");
    if (displacements.size() != boundary.size()) bad("frame count mismatch");
    for (const auto& d : displacements)
      if (d.size() != base_uv.size()) bad("displacement count mismatch");
    for (const auto& t : base_tris)
      for (int v : t)
        if (v < 0 || static_cast<std::size_t>(v) >= base_uv.size()) bad("triangle index out of range");
    for (int b : boundary)
      if (b < 0 || static_cast<std::size_t>(b) >= base_uv.size()) bad("boundary index out of range");
  }
};

inline nlohmann::json to_json(const ExtrusionRecord& r) {
  using nlohmann::json;
  json uv = json::array(), tris = json::array(), disp = json::array();
  for (const auto& p : r.base_uv) uv.push_back({p.x(), p.y()});
  for (const auto& t : r.base_tris) tris.push_back({t[0], t[1], t[2]});
  for (const auto& frame : r.displacements) {
    json f = json::array();
    for (const auto& d : frame) f.push_back({d.x(), d.y(), d.z()});
    disp.push_back(std::move(f));
  }
  return {{"format", kRecordFormat}, {"id", r.id},           {"base_uv", uv},
          {"base_tris", tris},       {"boundary", r.boundary}, {"boundary_angles", r.boundary_angles},
          {"displacements", disp}};
}

inline ExtrusionRecord record_from_json(const nlohmann::json& j) {
  ExtrusionRecord r;
  try {
    if (j.at("format").get<std::string>() != kRecordFormat)
      throw Error(ErrorKind::Malformed, "unsupported record format " + j.at("format").get<std::string>());
    r.id = j.at("id").get<int>();
    for (const auto& p : j.at("base_uv")) r.base_uv.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const auto& t : j.at("base_tris")) r.base_tris.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    r.boundary = j.at("boundary").get<std::vector<int>>();
    r.boundary_angles = j.at("boundary_angles").get<std::vector<double>>();
    for (const auto& f : j.at("displacements")) {
      std::vector<Vec3> frame;
      for (const auto& d : f) frame.emplace_back(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>());
      r.displacements.push_back(std::move(frame));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Malformed, std::string("bad record json: ") + e.what());
  }
  r.validate();
  return r;
}

/// JSON-lines record store keyed by record id.
class RecordStore {
 public:
  void add(ExtrusionRecord r) {
    if (index_.count(r.id)) throw Error(ErrorKind::InvalidArgument, "duplicate record id " + std::to_string(r.id));
    index_[r.id] = records_.size();
    records_.push_back(std::move(r));
  }
  bool contains(int id) const { return index_.count(id) > 0; }
  const ExtrusionRecord& get(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorKind::UnknownExtrusion, "unknown extrusion id E" + std::to_string(id));
    return records_[it->second];
  }
  const std::vector<ExtrusionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  int next_id() const { return index_.empty() ? 0 : index_.rbegin()->first + 1; }

  std::string to_jsonl() const {
    std::string out;
    for (const auto& r : records_) out += to_json(r).dump() + "\n";
    return out;
  }
  static RecordStore from_jsonl(std::string_view text) {
    RecordStore store;
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view s = text.substr(pos, end - pos);
      pos = end + 1;
      ++line;
      if (s.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      nlohmann::json j = nlohmann::json::parse(s, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorKind::Malformed, "record line is not JSON", line);
      store.add(record_from_json(j));
    }
    return store;
  }
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Malformed, "cannot write " + path);
    out << to_jsonl();
  }
  static RecordStore load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Malformed, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str());
  }

 private:
  std::vector<ExtrusionRecord> records_;
  std::map<int, std::size_t> index_;
};

}  // namespace feqtee
