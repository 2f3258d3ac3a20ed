#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "feqtee/decompose.hpp"
#include "feqtee/interpreter.hpp"

namespace feqtee {

inline constexpr const char* kWireFormat = "feqtee-wire-v1";

/// Indexed face set payload.
inline nlohmann::json mesh_to_wire(const PolyMesh& m) {
  nlohmann::json v = nlohmann::json::array(), f = nlohmann::json::array();
  for (const auto& p : m.positions()) v.push_back({p.x(), p.y(), p.z()});
  for (const auto& face : m.faces()) f.push_back(face);
  return {{"format", kWireFormat}, {"vertices", v}, {"faces", f}};
}

inline PolyMesh mesh_from_wire(const nlohmann::json& j) {
  if (j.value("format", "") != kWireFormat) throw Error(ErrorKind::Malformed, "mesh payload is not feqtee-wire-v1");
  std::vector<Vec3> pos;
  for (const auto& p : j.at("vertices")) pos.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  return PolyMesh(std::move(pos), j.at("faces").get<std::vector<std::vector<int>>>());
}

inline nlohmann::json trace_to_json(const std::vector<TraceStep>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trace) {
    nlohmann::json s{{"index", t.index}, {"instruction", t.instruction}, {"faces", t.faces}};
    if (t.dtw >= 0) {
      s["selected"] = t.selected;
      s["dtw"] = t.dtw;
      s["cut"] = t.cut;
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json error_to_json(const Error& e) {
  nlohmann::json j{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (e.position() != Error::npos) j["position"] = e.position();
  return {{"error", j}};
}

/// Axis-aligned cube with 8 vertices and 6 quads.
inline PolyMesh unit_cube() {
  std::vector<Vec3> p{{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                      {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  return PolyMesh(std::move(p), {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}});
}

/// One-record library: a tapered bump captured from the cube's top face.
inline RecordStore demo_library() {
  const PolyMesh cube = unit_cube();
  const Patch top = make_patch(cube, {1});
  ExtrudeResult ext = extrude_patch(cube, top);
  for (int v : cube.face(1)) {
    const Vec3 p = cube.position(v);
    ext.mesh.set_position(v, Vec3(0.6 * p.x(), 0.6 * p.y(), 1.8));
  }
  const int edge = *ext.mesh.find_edge(top.boundary[0], ext.inner_copy[0]);
  return decompose_feature(ext.mesh, edge).records;
}

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Editing sessions over HTTP-like requests. Routing is kept separate from
/// the socket layer so it can be driven directly.
class SessionService {
 public:
  explicit SessionService(std::map<std::string, RecordStore> libraries = {}) : libraries_(std::move(libraries)) {
    if (!libraries_.count("demo")) libraries_.emplace("demo", demo_library());
  }

  Reply handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, split(path), body);
    } catch (const Error& e) {
      return json_reply(422, error_to_json(e));
    } catch (const nlohmann::json::exception& e) {
      return json_reply(400, {{"error", {{"kind", "bad-request"}, {"message", e.what()}}}});
    }
  }

 private:
  struct Snapshot {
    PolyMesh mesh;
    std::optional<Patch> pick;
    std::optional<TeeExecutor> exec;
    std::size_t cursor = 0;
  };

  struct Session {
    std::mutex lock;
    Snapshot state;
    std::vector<Snapshot> undo;
    TeeProgram program;
    std::string library;
  };

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    const std::string p = path.substr(0, path.find('?'));
    while (i < p.size()) {
      const std::size_t j = p.find('/', i);
      const std::string s = p.substr(i, j == std::string::npos ? std::string::npos : j - i);
      if (!s.empty()) parts.push_back(s);
      if (j == std::string::npos) break;
      i = j + 1;
    }
    return parts;
  }

  static Reply json_reply(int status, const nlohmann::json& j) { return {status, j.dump(), "application/json"}; }
  static Reply not_found(const std::string& what) {
    return json_reply(404, {{"error", {{"kind", "not-found"}, {"message", what}}}});
  }

  static nlohmann::json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
    return nlohmann::json::parse(body);
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> g(sessions_lock_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  const RecordStore& library(const std::string& name) const {
    auto it = libraries_.find(name);
    if (it == libraries_.end()) throw Error(ErrorKind::InvalidArgument, "unknown library '" + name + "'");
    return it->second;
  }

  Reply route(const std::string& method, const std::vector<std::string>& p, const std::string& body) {
    if (p.size() == 1 && p[0] == "libraries" && method == "GET") return list_libraries();
    if (p.size() == 1 && p[0] == "sessions" && method == "POST") return create(body);
    if (p.size() < 2 || p[0] != "sessions") return not_found("no route " + method + " /" + (p.empty() ? "" : p[0]));
    auto s = find(p[1]);
    if (!s) return not_found("no session " + p[1]);
    std::lock_guard<std::mutex> g(s->lock);
    const std::string op = p.size() > 2 ? p[2] : "";
    if (p.size() == 2 && method == "DELETE") {
      std::lock_guard<std::mutex> gs(sessions_lock_);
      sessions_.erase(p[1]);
      return json_reply(200, {{"deleted", p[1]}});
    }
    if (op == "mesh" && method == "GET") return json_reply(200, state_json(*s));
    if (op == "export" && method == "GET") return {200, to_obj(s->state.mesh), "text/plain"};
    if (method != "POST") return not_found("no route " + method + " /sessions/" + p[1] + "/" + op);
    const nlohmann::json req = parse_body(body);
    if (op == "pick") return pick(*s, req);
    if (op == "apply") return apply(*s, req);
    if (op == "program") return load_program(*s, req);
    if (op == "step") return step(*s);
    if (op == "undo") return undo(*s);
    return not_found("no route POST /sessions/" + p[1] + "/" + op);
  }

  Reply list_libraries() const {
    nlohmann::json libs = nlohmann::json::array();
    for (const auto& [name, store] : libraries_) {
      std::vector<int> ids;
      for (const auto& r : store.records()) ids.push_back(r.id);
      libs.push_back({{"name", name}, {"records", ids}});
    }
    return json_reply(200, {{"libraries", libs}});
  }

  Reply create(const std::string& body) {
    PolyMesh mesh;
    const std::size_t first = body.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && body[first] == '{') {
      const auto j = nlohmann::json::parse(body);
      if (j.contains("obj")) mesh = parse_obj(j.at("obj").get<std::string>());
      else if (j.contains("mesh")) mesh = mesh_from_wire(j.at("mesh"));
      else if (j.value("preset", "cube") == "cube") mesh = unit_cube();
      else throw Error(ErrorKind::InvalidArgument, "unknown preset '" + j.value("preset", "") + "'");
    } else if (first == std::string::npos) {
      mesh = unit_cube();
    } else {
      mesh = parse_obj(body);
    }
    auto s = std::make_shared<Session>();
    s->state.mesh = std::move(mesh);
    std::string id;
    {
      std::lock_guard<std::mutex> g(sessions_lock_);
      id = "s" + std::to_string(++next_session_);
      sessions_[id] = s;
    }
    nlohmann::json out = state_json(*s);
    out["session"] = id;
    return json_reply(201, out);
  }

  static nlohmann::json state_json(const Session& s) {
    nlohmann::json j{{"mesh", mesh_to_wire(s.state.mesh)}, {"undo_depth", s.undo.size()}};
    if (s.state.pick) j["pick"] = {{"faces", s.state.pick->faces}, {"boundary", s.state.pick->boundary}};
    if (!s.program.empty()) j["program"] = {{"length", s.program.size()}, {"cursor", s.state.cursor}};
    return j;
  }

  Reply pick(Session& s, const nlohmann::json& req) {
    std::vector<int> faces = req.at("faces").get<std::vector<int>>();
    for (int f : faces)
      if (f < 0 || f >= static_cast<int>(s.state.mesh.num_faces()))
        throw Error(ErrorKind::OutOfRange, "face " + std::to_string(f) + " does not exist");
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    if (faces.empty() || faces.size() == s.state.mesh.num_faces() || !is_disk(s.state.mesh, faces))
      return json_reply(422, {{"valid", false},
                              {"error", {{"kind", "topology"}, {"message", "picked faces do not form a disk"}}}});
    Patch patch = make_patch(s.state.mesh, faces, req.value("reference", -1));
    s.state.pick = patch;
    return json_reply(200, {{"valid", true}, {"faces", patch.faces}, {"boundary", patch.boundary}, {"reference", patch.reference}});
  }

  static ExecOptions exec_options(const nlohmann::json& req) {
    ExecOptions opt;
    const std::string m = req.value("methodology", "pure_quad");
    if (m == "quad_dominant") opt.methodology = Methodology::QuadDominant;
    else if (m != "pure_quad") throw Error(ErrorKind::InvalidArgument, "unknown methodology '" + m + "'");
    opt.dtw_threshold = req.value("dtw_threshold", opt.dtw_threshold);
    return opt;
  }

  Reply apply(Session& s, const nlohmann::json& req) {
    if (!s.state.pick) throw Error(ErrorKind::InvalidArgument, "pick a patch first");
    const RecordStore& lib = library(req.value("library", "demo"));
    TeeProgram prog;
    if (req.contains("tee")) prog = parse_tee(req.at("tee").get<std::string>());
    else prog.instructions.push_back(TeeInstruction::apply(req.at("record").get<int>()));
    ExecResult res = execute_tee(prog, s.state.mesh, *s.state.pick, lib, exec_options(req));
    s.undo.push_back(s.state);
    s.state.mesh = std::move(res.mesh);
    s.state.pick.reset();
    s.state.exec.reset();
    nlohmann::json out = state_json(s);
    out["trace"] = trace_to_json(res.trace);
    return json_reply(200, out);
  }

  Reply load_program(Session& s, const nlohmann::json& req) {
    if (!s.state.pick) throw Error(ErrorKind::InvalidArgument, "pick a patch first");
    s.library = req.value("library", "demo");
    const ParseMode mode = req.value("lenient", false) ? ParseMode::Lenient : ParseMode::Strict;
    s.program = parse_tee(req.at("tee").get<std::string>(), mode);
    s.undo.push_back(s.state);
    s.state.exec.emplace(s.state.mesh, *s.state.pick, library(s.library), exec_options(req));
    s.state.cursor = 0;
    return json_reply(200, state_json(s));
  }

  Reply step(Session& s) {
    if (!s.state.exec) throw Error(ErrorKind::InvalidArgument, "no program loaded");
    if (s.state.cursor >= s.program.size()) throw Error(ErrorKind::InvalidArgument, "program finished");
    Snapshot before = s.state;
    s.state.exec->step(s.program.instructions[s.state.cursor]);
    s.undo.push_back(std::move(before));
    s.state.mesh = s.state.exec->mesh();
    s.state.pick.reset();
    ++s.state.cursor;
    nlohmann::json out = state_json(s);
    out["trace"] = trace_to_json({s.state.exec->trace().back()});
    out["done"] = s.state.cursor == s.program.size();
    return json_reply(200, out);
  }

  Reply undo(Session& s) {
    if (s.undo.empty()) return json_reply(409, {{"error", {{"kind", "empty-undo"}, {"message", "nothing to undo"}}}});
    s.state = std::move(s.undo.back());
    s.undo.pop_back();
    return json_reply(200, state_json(s));
  }

  std::map<std::string, RecordStore> libraries_;
  std::mutex sessions_lock_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  int next_session_ = 0;
};

}  // namespace feqtee
