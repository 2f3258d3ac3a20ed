#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feqtee/cut.hpp"
#include "feqtee/extrusion.hpp"
#include "feqtee/generic_disk.hpp"
#include "feqtee/tee.hpp"

namespace feqtee {

enum class Methodology { PureQuad, QuadDominant };

struct ExecOptions {
  Methodology methodology = Methodology::PureQuad;
  double dtw_threshold = 0.5;  // normalized DTW above this switches a pure-quad selection to a cut
  bool keep_snapshots = false;
  const GenericDisk* disk = nullptr;  // default_generic_disk() when null
};

struct TraceStep {
  std::size_t index = 0;
  std::string instruction;
  std::size_t faces = 0;  // face count after the step
  int selected = 0;       // faces picked by a selection
  double dtw = -1.0;      // normalized DTW of a selection
  bool cut = false;       // selection went through the quad-dominant path
};

/// Step-wise TEE interpreter. State: the mesh, the last extended patch and
/// its lifted base patch (the default target of the next E), remembered
/// states, and the pending union of gp/sv selections.
///
/// Every target patch other than the initial one is anchored at its
/// boundary vertex of smallest polar angle in the uv domain it was selected
/// from, which is what decomposition records as well.
class TeeExecutor {
 public:
  TeeExecutor(PolyMesh base, Patch initial, const RecordStore& library, ExecOptions opt = {})
      : mesh_(std::move(base)), initial_(std::move(initial)), library_(&library), opt_(opt) {
    if (!opt_.disk) opt_.disk = &default_generic_disk();
  }

  const PolyMesh& mesh() const { return mesh_; }
  const std::vector<TraceStep>& trace() const { return trace_; }
  std::size_t applied() const { return applied_; }

  /// Faces of the last extended patch (empty before the first extrusion).
  std::vector<int> extended_faces() const { return expand_all(ext_faces_, ext_epoch_); }

  /// Faces gathered by gp/sv for the next extrusion so far, unsorted.
  const std::vector<int>& gathered_faces() const { return union_; }

  void run(const TeeProgram& prog, std::vector<PolyMesh>* snapshots = nullptr) {
    for (const auto& ins : prog.instructions) {
      step(ins);
      if (snapshots) snapshots->push_back(mesh_);
    }
  }

  /// Execute one instruction. Errors carry the instruction index as position.
  void step(const TeeInstruction& ins) {
    const std::size_t index = next_index_++;
    TraceStep ts;
    ts.index = index;
    ts.instruction = serialize_tee(TeeProgram{{ins}});
    try {
      switch (ins.kind) {
        case TeeInstruction::Kind::Apply: do_apply(ins.value); break;
        case TeeInstruction::Kind::Remember: do_remember(ins.value); break;
        case TeeInstruction::Kind::GetPrevious: do_get_previous(ins.value); break;
        case TeeInstruction::Kind::Select: do_select(ins.ids, ts); break;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "instruction " + std::to_string(index) + " (" + ts.instruction + "): " + e.what(), index);
    }
    ts.faces = mesh_.num_faces();
    trace_.push_back(std::move(ts));
  }

 private:
  // Face ids are tagged with the number of quad-dominant cuts made when
  // they were recorded (their epoch); a cut keeps the id of a split face for
  // one piece and appends the others.
  struct Saved {
    UvDomain domain;
    std::size_t domain_epoch = 0;
    std::vector<int> cap;
    std::size_t cap_epoch = 0;
  };

  std::size_t epoch() const { return cuts_.size(); }

  // Faces that now cover `faces` recorded at `since`.
  std::vector<int> expand_all(const std::vector<int>& faces, std::size_t since) const {
    std::vector<int> out = faces;
    for (std::size_t c = since; c < cuts_.size(); ++c) {
      const std::size_t n = out.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto it = cuts_[c].find(out[i]);
        if (it != cuts_[c].end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  UvDomain& last_domain() {
    if (!last_domain_) {
      last_domain_ = make_domain(mesh_, make_patch(mesh_, expand_all(ext_faces_, ext_epoch_), ext_reference_));
      last_domain_epoch_ = epoch();
    }
    return *last_domain_;
  }

  Patch anchored(const std::vector<int>& faces, const UvDomain& dom) const {
    if (!is_disk(mesh_, faces)) throw Error(ErrorKind::Application, "selected faces do not form a disk");
    Patch p = make_patch(mesh_, faces);
    int ref = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int v : p.boundary) {
      auto it = dom.uv.find(v);
      if (it == dom.uv.end()) continue;
      const double a = angle_of(it->second);
      if (a < best) {
        best = a;
        ref = v;
      }
    }
    return ref >= 0 ? with_reference(p, ref) : p;
  }

  void add_to_union(const std::vector<int>& faces, const UvDomain& from, std::size_t since) {
    if (!union_ref_) union_ref_ = from;
    const auto grown = expand_all(faces, since);
    union_.insert(union_.end(), grown.begin(), grown.end());
  }

  void flush_loaded() {
    if (loaded_ >= 0 && !loaded_selected_) {
      const Saved& s = saved_.at(loaded_);
      add_to_union(s.cap, s.domain, s.cap_epoch);
    }
    loaded_ = -1;
    loaded_selected_ = false;
  }

  void do_apply(int id) {
    const ExtrusionRecord& rec = library_->get(id);
    flush_loaded();
    Patch target;
    if (!union_.empty()) {
      std::sort(union_.begin(), union_.end());
      union_.erase(std::unique(union_.begin(), union_.end()), union_.end());
      target = anchored(union_, *union_ref_);
    } else if (applied_ == 0) {
      target = initial_;
    } else {
      target = anchored(expand_all(cap_faces_, cap_epoch_), last_domain());
    }
    ApplyResult res = apply_extrusion(mesh_, target, rec);
    mesh_ = std::move(res.mesh);
    ext_faces_ = res.extended.faces;
    ext_reference_ = res.extended.reference;
    cap_faces_ = target.faces;
    ext_epoch_ = cap_epoch_ = epoch();
    last_domain_.reset();
    union_.clear();
    union_ref_.reset();
    ++applied_;
  }

  void do_remember(int tag) {
    if (applied_ == 0) throw Error(ErrorKind::Semantic, "nothing to remember before the first extrusion");
    UvDomain& dom = last_domain();
    saved_[tag] = Saved{dom, last_domain_epoch_, cap_faces_, cap_epoch_};
  }

  void do_get_previous(int tag) {
    if (!saved_.count(tag)) throw Error(ErrorKind::Semantic, "unknown tag P" + std::to_string(tag));
    flush_loaded();
    loaded_ = tag;
  }

  void do_select(const std::vector<int>& ids, TraceStep& ts) {
    const std::vector<Vec2> loop = opt_.disk->dequantize(ids);
    if (applied_ == 0) throw Error(ErrorKind::Semantic, "nothing to select from before the first extrusion");
    UvDomain& dom = loaded_ >= 0 ? saved_.at(loaded_).domain : last_domain();
    std::size_t& dom_epoch = loaded_ >= 0 ? saved_.at(loaded_).domain_epoch : last_domain_epoch_;
    std::optional<SelectionResult> sel;
    std::string failure;
    if (opt_.methodology == Methodology::PureQuad) {
      try {
        sel = select_patch_pure_quad(dom, loop);
        if (sel->normalized_score > opt_.dtw_threshold) {
          failure = "selection score " + std::to_string(sel->normalized_score) + " above threshold";
          sel.reset();
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Selection) throw;
        failure = e.what();
      }
    }
    if (!sel) {
      for (std::size_t i = 0; i < dom.faces.size(); ++i)
        if (mesh_.face(dom.faces[i]) != dom.face_vertices[i])
          throw Error(ErrorKind::Selection, (failure.empty() ? std::string() : failure + "; ") +
                                                "cannot cut a region that was extruded since it was remembered");
      CutResult cut = select_patch_quad_dominant(mesh_, dom, loop);
      std::map<int, std::vector<int>> pieces;
      for (std::size_t g = 0; g < cut.face_remap.size(); ++g)
        for (int x : cut.face_remap[g])
          if (x != static_cast<int>(g)) pieces[static_cast<int>(g)].push_back(x);
      cuts_.push_back(std::move(pieces));
      union_ = expand_all(union_, epoch() - 1);
      mesh_ = std::move(cut.mesh);
      dom = std::move(cut.domain);
      dom_epoch = epoch();
      if (loaded_ >= 0) last_domain_.reset();
      sel = std::move(cut.selection);
    }
    ts.selected = static_cast<int>(sel->faces.size());
    ts.dtw = sel->normalized_score;
    ts.cut = sel->cut;
    add_to_union(sel->faces, dom, dom_epoch);
    if (loaded_ >= 0) loaded_selected_ = true;
  }

  PolyMesh mesh_;
  Patch initial_;
  const RecordStore* library_;
  ExecOptions opt_;
  std::vector<int> ext_faces_, cap_faces_;
  std::size_t ext_epoch_ = 0, cap_epoch_ = 0;
  int ext_reference_ = -1;
  std::optional<UvDomain> last_domain_;
  std::size_t last_domain_epoch_ = 0;
  std::map<int, Saved> saved_;
  int loaded_ = -1;
  bool loaded_selected_ = false;
  std::vector<int> union_;
  std::optional<UvDomain> union_ref_;
  std::vector<std::map<int, std::vector<int>>> cuts_;  // per cut: split face -> its other pieces
  std::vector<TraceStep> trace_;
  std::size_t next_index_ = 0;
  std::size_t applied_ = 0;
};

struct ExecResult {
  PolyMesh mesh;
  std::vector<int> extended_faces;  // last extended patch
  std::vector<TraceStep> trace;
  std::vector<PolyMesh> snapshots;  // mesh after each instruction when requested
};

inline ExecResult execute_tee(const TeeProgram& prog, const PolyMesh& base, const Patch& initial,
                              const RecordStore& library, const ExecOptions& opt = {}) {
  TeeExecutor ex(base, initial, library, opt);
  ExecResult out;
  ex.run(prog, opt.keep_snapshots ? &out.snapshots : nullptr);
  out.mesh = ex.mesh();
  out.extended_faces = ex.extended_faces();
  out.trace = ex.trace();
  return out;
}

}  // namespace feqtee
