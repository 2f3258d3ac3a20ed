#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

#include "feqtee/extrusion.hpp"
#include "feqtee/face_loop.hpp"
#include "feqtee/generic_disk.hpp"
#include "feqtee/tee.hpp"

namespace feqtee {

/// uv curve on a parent's extended patch, as generic-disk vertex ids.
struct RegionCurve {
  int parent = -1;
  std::vector<int> ids;
};

struct ExtrusionNode {
  int id = -1;
  int record_id = -1;
  std::vector<int> parents;         // node ids, ascending
  std::vector<RegionCurve> curves;  // empty: takes the whole (lifted) base patch of its only parent;
                                    // the first curve's parent anchors the patch orientation
};

/// Extrusion DAG. Node 0 is the root; every parent has a smaller id than its
/// children.
struct ExtrusionGraph {
  std::vector<ExtrusionNode> nodes;

  std::size_t size() const { return nodes.size(); }

  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> out(nodes.size());
    for (const auto& n : nodes)
      for (int p : n.parents) out[p].push_back(n.id);
    return out;
  }

  void validate() const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (n.id != static_cast<int>(i)) throw Error(ErrorKind::Decomposition, "node ids are not consecutive");
      if (i == 0 && !n.parents.empty()) throw Error(ErrorKind::Decomposition, "root has a parent");
      if (i > 0 && n.parents.empty())
        throw Error(ErrorKind::Decomposition, "node " + std::to_string(i) + " is unreachable from the root");
      for (int p : n.parents)
        if (p < 0 || p >= n.id) throw Error(ErrorKind::Decomposition, "edge into node " + std::to_string(i) + " is not acyclic");
      if (!n.curves.empty() && n.curves.size() != n.parents.size())
        throw Error(ErrorKind::Decomposition, "node " + std::to_string(i) + " has curves for only some parents");
    }
  }
};

struct Decomposition {
  ExtrusionGraph graph;
  RecordStore records;
  PolyMesh base;     // mesh with every extrusion of the feature removed
  Patch base_patch;  // root base patch, reference set
};

namespace detail {

struct Collapsed {
  CapturedExtrusion cap;
  std::vector<int> cap_vuid;  // vertex uid per vertex of cap.mesh
  PolyMesh pre;               // mesh before the collapse
  std::vector<int> pre_vuid;
  Patch ext;                                // extended patch in `pre`
  std::vector<int> base;                    // base faces in `pre`, sorted
  std::map<int, std::vector<int>> claimed;  // child collapse index -> faces of `pre` in the child's base
  std::set<int> parents;                    // collapse indices
};

inline double faces_area(const PolyMesh& mesh, const std::vector<int>& faces) {
  double a = 0.0;
  for (int f : faces) a += mesh.face_area(f);
  return a;
}

}  // namespace detail

/// Peel the feature grown from the loop through `root_edge` into an
/// extrusion DAG plus one record per extrusion. Loops are removed leaves
/// first; among leaves the one with the smallest base area goes first.
inline Decomposition decompose_feature(const PolyMesh& mesh, int root_edge,
                                       const GenericDisk& disk = default_generic_disk()) {
  const FeqReport rep = validate_feq(mesh);
  if (!rep.is_feq()) throw Error(ErrorKind::Topology, "mesh is not a clean closed genus-0 quad mesh");
  const FaceLoop root = trace_face_loop(mesh, root_edge);
  const std::vector<int> root_base = loop_base_side(mesh, root);

  const std::size_t nf = mesh.num_faces();
  std::vector<char> feature(nf, 0);
  for (int f : root.faces) feature[f] = 1;
  for (int f : root_base) feature[f] = 1;
  std::vector<int> root_uids = root.faces;
  std::sort(root_uids.begin(), root_uids.end());

  PolyMesh W = mesh;
  std::vector<int> vuid(mesh.num_vertices()), fuid(nf);
  for (std::size_t i = 0; i < vuid.size(); ++i) vuid[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < nf; ++i) fuid[i] = static_cast<int>(i);
  std::vector<int> owner(nf, -1);  // face uid -> collapse index whose base holds it
  std::vector<detail::Collapsed> done;

  for (;;) {
    struct Candidate {
      FaceLoop loop;
      std::vector<int> base;  // W ids, sorted
      std::vector<int> key;
      double area = 0.0;
      bool is_root = false;
    };
    std::vector<Candidate> cands;
    for (auto& loop : enumerate_face_loops(W)) {
      if (loop.self_intersecting || loop.self_adjacent) continue;
      if (!std::all_of(loop.faces.begin(), loop.faces.end(), [&](int f) { return feature[fuid[f]]; })) continue;
      const auto sides = loop_sides(W, loop);
      if (sides.size() != 2) continue;
      Candidate c;
      for (const auto& s : sides)
        if (std::all_of(s.begin(), s.end(), [&](int f) { return feature[fuid[f]]; })) c.base = s;
      if (c.base.empty())
        throw Error(ErrorKind::Decomposition, "a loop inside the feature has no side within the feature");
      std::vector<int> u;
      for (int f : loop.faces) u.push_back(fuid[f]);
      c.key = canonical_loop_key(u);
      std::sort(u.begin(), u.end());
      c.is_root = u == root_uids;
      c.area = detail::faces_area(W, c.base);
      c.loop = std::move(loop);
      cands.push_back(std::move(c));
    }
    const bool root_left = std::any_of(cands.begin(), cands.end(), [](const Candidate& c) { return c.is_root; });
    if (!root_left) {
      if (done.empty()) throw Error(ErrorKind::Decomposition, "root loop is not a removable extrusion");
      break;
    }
    int best = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      bool leaf = true;
      for (std::size_t j = 0; j < cands.size() && leaf; ++j) {
        if (i == j) continue;
        leaf = !std::all_of(cands[j].loop.faces.begin(), cands[j].loop.faces.end(), [&](int f) {
          return std::binary_search(cands[i].base.begin(), cands[i].base.end(), f);
        });
      }
      if (!leaf) continue;
      if (best < 0 || cands[i].area < cands[best].area ||
          (cands[i].area == cands[best].area && cands[i].key < cands[best].key))
        best = static_cast<int>(i);
    }
    if (best < 0) throw Error(ErrorKind::Decomposition, "no leaf extrusion: the feature branches inward");
    Candidate& c = cands[best];

    const int k = static_cast<int>(done.size());
    detail::Collapsed rec;
    rec.pre = W;
    rec.pre_vuid = vuid;
    std::vector<int> ext_faces = c.base;
    ext_faces.insert(ext_faces.end(), c.loop.faces.begin(), c.loop.faces.end());
    rec.ext = make_patch(W, ext_faces);
    rec.base = c.base;
    for (int f : rec.ext.faces) {
      int& o = owner[fuid[f]];
      if (o >= 0) {
        done[o].parents.insert(k);
        rec.claimed[o].push_back(f);
        o = -1;
      }
    }
    // A leaf that cannot be collapsed closes over faces that belong to
    // the other side, which is how an extrusion branching in shows up here.
    try {
      rec.cap = capture_extrusion(W, c.loop, &c.base);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateResult && e.kind() != ErrorKind::NonManifold) throw;
      throw Error(ErrorKind::Decomposition, std::string("extrusion cannot be peeled, the feature branches inward: ") + e.what());
    }
    for (int f : c.base) owner[fuid[f]] = k;

    const auto& cap = rec.cap;
    std::vector<int> nv(cap.mesh.num_vertices()), nfu(cap.mesh.num_faces());
    for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = vuid[cap.survivor[i]];
    for (std::size_t f = 0; f < cap.face_map.size(); ++f)
      if (cap.face_map[f] >= 0) nfu[cap.face_map[f]] = fuid[f];
    vuid = std::move(nv);
    fuid = std::move(nfu);
    W = cap.mesh;
    rec.cap_vuid = vuid;
    const bool was_root = c.is_root;
    done.push_back(std::move(rec));
    if (was_root) break;
  }

  const int n = static_cast<int>(done.size());
  auto node_of = [n](int k) { return n - 1 - k; };
  Decomposition out;
  out.graph.nodes.resize(n);
  std::vector<std::unordered_map<int, Vec2>> ext_uv(n);  // by node id: vertex uid -> uv

  for (int id = 0; id < n; ++id) {
    const auto& d = done[n - 1 - id];
    ExtrusionNode& node = out.graph.nodes[id];
    node.id = id;
    node.record_id = id;
    for (int q : d.parents) node.parents.push_back(node_of(q));
    std::sort(node.parents.begin(), node.parents.end());
    if (id > 0 && node.parents.empty())
      throw Error(ErrorKind::Decomposition, "extrusion " + std::to_string(id) + " has no parent");

    // Reference: base boundary vertex at the smallest angle in the first parent's map.
    int ref = -1;
    if (id == 0) {
      ref = *std::min_element(d.cap.base.boundary.begin(), d.cap.base.boundary.end());
    } else {
      const auto& pmap = ext_uv[node.parents.front()];
      double best = std::numeric_limits<double>::infinity();
      for (int v : d.cap.base.boundary) {
        auto it = pmap.find(d.cap_vuid[v]);
        if (it == pmap.end()) continue;
        const double a = angle_of(it->second);
        if (a < best) {
          best = a;
          ref = v;
        }
      }
      if (ref < 0) throw Error(ErrorKind::Decomposition, "extrusion " + std::to_string(id) + " does not touch its parent");
    }
    out.records.add(d.cap.make_record(id, ref));

    const int ref_uid = d.cap_vuid[ref];
    int pre_ref = -1;
    for (std::size_t i = 0; i < d.pre_vuid.size(); ++i)
      if (d.pre_vuid[i] == ref_uid) pre_ref = static_cast<int>(i);
    const ParamPatch param = harmonic_disk_map(d.pre, with_reference(d.ext, pre_ref));
    for (std::size_t i = 0; i < param.split.num_original; ++i)
      ext_uv[id][d.pre_vuid[param.split.vertices[i]]] = param.uv[i];

    if (id == 0) {
      out.base = d.cap.mesh;
      out.base_patch = with_reference(d.cap.base, ref);
    }

    const int k = n - 1 - id;
    bool need_curves = node.parents.size() > 1;
    for (int p : node.parents) {
      const auto& pd = done[n - 1 - p];
      auto region = pd.claimed.at(k);
      std::sort(region.begin(), region.end());
      if (region != pd.base) need_curves = true;
    }
    if (!need_curves) continue;
    for (int p : node.parents) {
      const auto& pd = done[n - 1 - p];
      const auto& region = pd.claimed.at(k);
      if (!is_disk(pd.pre, region))
        throw Error(ErrorKind::Decomposition, "extrusion " + std::to_string(id) + " meets a parent in a non-disk region");
      const Patch sub = make_patch(pd.pre, region);
      std::vector<Vec2> curve;
      for (int v : sub.boundary) curve.push_back(ext_uv[p].at(pd.pre_vuid[v]));
      node.curves.push_back({p, disk.quantize(curve)});
    }
  }
  out.graph.validate();
  return out;
}

/// Random topological order of the graph. Single-parent single-child links
/// stay adjacent; ready chains are drawn with mt19937_64(seed).
inline std::vector<int> linearize(const ExtrusionGraph& g, std::uint64_t seed) {
  const int n = static_cast<int>(g.size());
  if (n == 0) return {};
  const auto kids = g.children();
  std::vector<int> next(n, -1), head_of(n, -1);
  std::vector<char> is_head(n, 1);
  for (int p = 0; p < n; ++p)
    if (kids[p].size() == 1 && g.nodes[kids[p][0]].parents.size() == 1) {
      next[p] = kids[p][0];
      is_head[kids[p][0]] = 0;
    }
  std::vector<std::vector<int>> chains;
  std::vector<int> chain_of(n, -1);
  for (int v = 0; v < n; ++v) {
    if (!is_head[v]) continue;
    std::vector<int> ch;
    for (int u = v; u >= 0; u = next[u]) {
      chain_of[u] = static_cast<int>(chains.size());
      ch.push_back(u);
    }
    chains.push_back(std::move(ch));
  }
  std::vector<int> indeg(chains.size(), 0);
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (int p : g.nodes[chains[c].front()].parents) indeg[c] += chain_of[p] != static_cast<int>(c);
  std::vector<int> ready;
  for (std::size_t c = 0; c < chains.size(); ++c)
    if (indeg[c] == 0) ready.push_back(static_cast<int>(c));
  std::mt19937_64 rng(seed);
  std::vector<int> order;
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), [&](int a, int b) { return chains[a].front() < chains[b].front(); });
    const std::size_t pick = rng() % ready.size();
    const int c = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    for (int v : chains[c]) {
      order.push_back(v);
      for (int w : kids[v])
        if (chain_of[w] != c && --indeg[chain_of[w]] == 0) ready.push_back(chain_of[w]);
    }
  }
  if (static_cast<int>(order.size()) != n) throw Error(ErrorKind::Decomposition, "extrusion graph has a cycle");
  return order;
}

/// TEE text for a graph in a given order. Tags are positions in `order`.
inline TeeProgram emit_tee(const ExtrusionGraph& g, const std::vector<int>& order) {
  const int n = static_cast<int>(g.size());
  std::vector<int> pos(n, -1);
  for (int i = 0; i < static_cast<int>(order.size()); ++i) pos[order[i]] = i;
  std::vector<char> remembered(n, 0);
  for (int i = 0; i < n; ++i) {
    const auto& node = g.nodes[order[i]];
    const bool adjacent = node.parents.size() == 1 && node.curves.empty() && pos[node.parents[0]] == i - 1;
    if (!adjacent)
      for (int p : node.parents) remembered[p] = 1;
  }
  TeeProgram prog;
  for (int i = 0; i < n; ++i) {
    const auto& node = g.nodes[order[i]];
    if (i > 0) {
      const bool adjacent = node.parents.size() == 1 && node.curves.empty() && pos[node.parents[0]] == i - 1;
      if (!node.curves.empty()) {
        for (const auto& c : node.curves) {
          prog.instructions.push_back(TeeInstruction::get_previous(pos[c.parent]));
          prog.instructions.push_back(TeeInstruction::select(c.ids));
        }
      } else if (!adjacent) {
        prog.instructions.push_back(TeeInstruction::get_previous(pos[node.parents[0]]));
      }
    }
    prog.instructions.push_back(TeeInstruction::apply(node.record_id));
    if (remembered[order[i]]) prog.instructions.push_back(TeeInstruction::remember(i));
  }
  return prog;
}

}  // namespace feqtee

namespace feqtee {

/// Shift every record id of a decomposition, e.g. to merge several into one
/// library.
inline void offset_record_ids(Decomposition& d, int offset) {
  RecordStore moved;
  for (ExtrusionRecord r : d.records.records()) {
    r.id += offset;
    moved.add(std::move(r));
  }
  d.records = std::move(moved);
  for (auto& n : d.graph.nodes) n.record_id += offset;
}

}  // namespace feqtee

namespace feqtee {

/// Recover the extrusion graph a TEE program encodes. Node i is the i-th E.
inline ExtrusionGraph graph_from_tee(const TeeProgram& prog) {
  ExtrusionGraph g;
  std::map<int, int> tag_node;
  std::vector<int> gp_parents;
  std::vector<RegionCurve> curves;
  int pending_gp = -1;
  bool pending_selected = false;
  auto flush = [&] {
    if (pending_gp >= 0 && !pending_selected) gp_parents.push_back(pending_gp);
    pending_gp = -1;
    pending_selected = false;
  };
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const auto& ins = prog.instructions[i];
    const int last = static_cast<int>(g.nodes.size()) - 1;
    switch (ins.kind) {
      case TeeInstruction::Kind::Apply: {
        flush();
        ExtrusionNode n;
        n.id = last + 1;
        n.record_id = ins.value;
        std::set<int> parents(gp_parents.begin(), gp_parents.end());
        for (const auto& c : curves) parents.insert(c.parent);
        if (parents.empty() && last >= 0) parents.insert(last);
        n.parents.assign(parents.begin(), parents.end());
        n.curves = std::move(curves);  // program order: the first one anchors the patch
        g.nodes.push_back(std::move(n));
        curves.clear();
        gp_parents.clear();
        break;
      }
      case TeeInstruction::Kind::Remember:
        if (last < 0) throw Error(ErrorKind::Semantic, "P" + std::to_string(ins.value) + " before any extrusion", i);
        tag_node[ins.value] = last;
        break;
      case TeeInstruction::Kind::GetPrevious: {
        flush();
        auto it = tag_node.find(ins.value);
        if (it == tag_node.end()) throw Error(ErrorKind::Semantic, "unknown tag P" + std::to_string(ins.value), i);
        pending_gp = it->second;
        break;
      }
      case TeeInstruction::Kind::Select: {
        const int parent = pending_gp >= 0 ? pending_gp : last;
        if (parent < 0) throw Error(ErrorKind::Semantic, "selection before any extrusion", i);
        curves.push_back({parent, ins.ids});
        pending_selected = pending_gp >= 0 || pending_selected;
        break;
      }
    }
  }
  return g;
}

}  // namespace feqtee
