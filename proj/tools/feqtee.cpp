// feqtee command line: decompose, rebuild, roundtrip, cluster, export-corpus, serve.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "feqtee/cluster.hpp"
#include "feqtee/decompose.hpp"
#include "feqtee/interpreter.hpp"
#include "feqtee/metrics.hpp"
#include "feqtee/service_http.hpp"

namespace fs = std::filesystem;
using namespace feqtee;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kNotFeq = 2, kInward = 3, kUnknownRecord = 4, kExecution = 5 };

std::uint64_t default_seed() {
  const char* s = std::getenv("FEQTEE_SEED");
  return s ? std::strtoull(s, nullptr, 10) : 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Malformed, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Malformed, "cannot write " + path);
  out << text;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::UnknownExtrusion: return kUnknownRecord;
    case ErrorKind::Decomposition: return kInward;
    case ErrorKind::Malformed:
    case ErrorKind::InvalidArgument: return kFailure;
    default: return kExecution;
  }
}

json feq_report(const FeqReport& r) {
  return {{"closed", r.is_closed},
          {"genus", r.genus},
          {"all_quads", r.all_quads},
          {"self_intersecting_loops", r.self_intersecting_loop_ids},
          {"self_adjacent_loops", r.self_adjacent_loop_ids}};
}

/// 0 when `mesh` is FEQ, otherwise prints the report and returns the exit code.
int check_feq(const PolyMesh& mesh) {
  const FeqReport r = validate_feq(mesh);
  if (r.is_feq()) return kOk;
  std::cerr << "not an FEQ mesh: " << feq_report(r).dump() << "\n";
  return kNotFeq;
}

struct DagSummary {
  std::size_t nodes = 0, edges = 0, chains = 0, curves = 0;
};

DagSummary summarize(const ExtrusionGraph& g) {
  DagSummary s;
  s.nodes = g.size();
  const auto kids = g.children();
  for (const auto& n : g.nodes) {
    s.edges += n.parents.size();
    s.curves += n.curves.size();
    const bool linked = n.parents.size() == 1 && kids[n.parents[0]].size() == 1;
    s.chains += !linked;
  }
  return s;
}

Patch read_patch(const PolyMesh& mesh, const std::string& patch_path, const std::vector<int>& faces, int reference) {
  if (!patch_path.empty()) {
    const json j = json::parse(read_file(patch_path));
    return make_patch(mesh, j.at("faces").get<std::vector<int>>(), j.value("reference", -1));
  }
  if (faces.empty()) throw Error(ErrorKind::InvalidArgument, "give --patch or --faces");
  return make_patch(mesh, faces, reference);
}

void print_trace(const std::vector<TraceStep>& trace) {
  for (const auto& t : trace) {
    std::printf("%4zu  %-12.12s faces=%zu", t.index, t.instruction.c_str(), t.faces);
    if (t.dtw >= 0) std::printf(" selected=%d dtw=%.4g%s", t.selected, t.dtw, t.cut ? " cut" : "");
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature decomposition into extrusion sequences and their text encoding"};
  app.require_subcommand(1);
  const std::uint64_t env_seed = default_seed();

  // decompose
  std::string d_mesh, d_records, d_tee, d_base, d_patch;
  int d_edge = -1;
  std::uint64_t d_seed = env_seed;
  auto* dec = app.add_subcommand("decompose", "Split a feature into extrusion records and a TEE program");
  dec->add_option("--mesh", d_mesh, "FEQ mesh (OBJ)")->required()->check(CLI::ExistingFile);
  dec->add_option("--edge", d_edge, "Edge id on the root loop (a sleeper)")->required();
  dec->add_option("--records", d_records, "Output record library (JSON lines)")->required();
  dec->add_option("--tee", d_tee, "Output TEE program")->required();
  dec->add_option("--base-out", d_base, "Output base mesh (OBJ)");
  dec->add_option("--patch-out", d_patch, "Output base patch (JSON: faces, reference)");
  dec->add_option("--seed", d_seed, "Linearization seed (default $FEQTEE_SEED or 0)");

  // rebuild
  std::string r_base, r_patch, r_tee, r_records, r_out, r_method = "pure_quad";
  std::vector<int> r_faces;
  int r_ref = -1;
  double r_threshold = 0.5;
  auto* reb = app.add_subcommand("rebuild", "Execute a TEE program on a base patch");
  reb->add_option("--base", r_base, "Base mesh (OBJ)")->required()->check(CLI::ExistingFile);
  reb->add_option("--patch", r_patch, "Base patch JSON")->check(CLI::ExistingFile);
  reb->add_option("--faces", r_faces, "Base patch face ids")->delimiter(',');
  reb->add_option("--reference", r_ref, "Reference boundary vertex of the patch");
  reb->add_option("--tee", r_tee, "TEE program")->required()->check(CLI::ExistingFile);
  reb->add_option("--records", r_records, "Record library")->required()->check(CLI::ExistingFile);
  reb->add_option("--methodology", r_method, "pure_quad or quad_dominant")
      ->check(CLI::IsMember({"pure_quad", "quad_dominant"}));
  reb->add_option("--dtw-threshold", r_threshold, "Normalized DTW above which a selection is cut instead");
  reb->add_option("--out", r_out, "Output mesh (OBJ)")->required();

  // roundtrip
  std::string t_mesh;
  int t_edge = -1, t_samples = 6;
  std::vector<int> t_k;
  std::uint64_t t_seed = env_seed;
  bool t_json = false;
  auto* rt = app.add_subcommand("roundtrip", "Decompose, optionally cluster, rebuild and measure");
  rt->add_option("--mesh", t_mesh, "FEQ mesh (OBJ)")->required()->check(CLI::ExistingFile);
  rt->add_option("--edge", t_edge, "Edge id on the root loop")->required();
  rt->add_option("--k", t_k, "Cluster counts (omit for lossless)")->delimiter(',');
  rt->add_option("--seed", t_seed, "Seed for linearization and k-means");
  rt->add_option("--samples", t_samples, "Samples per triangle edge for the Hausdorff distance");
  rt->add_flag("--json", t_json, "Print a JSON report");

  // cluster
  std::string c_records, c_out, c_programs, c_programs_out;
  int c_k = 64, c_iter = 100;
  std::uint64_t c_seed = env_seed;
  auto* clu = app.add_subcommand("cluster", "Cluster records and substitute representatives");
  clu->add_option("--records", c_records, "Record library")->required()->check(CLI::ExistingFile);
  clu->add_option("--k", c_k, "Number of clusters");
  clu->add_option("--seed", c_seed, "k-means++ seed");
  clu->add_option("--max-iter", c_iter, "Lloyd iteration cap");
  clu->add_option("--out", c_out, "Output library (JSON)")->required();
  clu->add_option("--programs", c_programs, "Programs to substitute, one per line")->check(CLI::ExistingFile);
  clu->add_option("--programs-out", c_programs_out, "Substituted programs");

  // export-corpus
  std::string e_records, e_dir, e_out;
  int e_aug = 1;
  std::uint64_t e_seed = env_seed;
  auto* exp = app.add_subcommand("export-corpus", "Write randomized linearizations of TEE programs, one per line");
  exp->add_option("--records", e_records, "Record library used to check E ids")->check(CLI::ExistingFile);
  exp->add_option("--tee-dir", e_dir, "Directory of .tee files")->required();
  exp->add_option("--augmentations", e_aug, "Orders per program")->check(CLI::PositiveNumber);
  exp->add_option("--seed", e_seed, "Base seed");
  exp->add_option("--out", e_out, "Output corpus")->required();

  // serve
  int s_port = 8080;
  std::string s_host = "127.0.0.1";
  std::vector<std::string> s_libs;
  auto* srv = app.add_subcommand("serve", "Run the editing session service");
  srv->add_option("--port", s_port, "Port");
  srv->add_option("--host", s_host, "Address to bind");
  srv->add_option("--library", s_libs, "name=path of a record library (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) {
      const PolyMesh mesh = load_obj(d_mesh);
      if (int rc = check_feq(mesh)) return rc;
      Decomposition d = decompose_feature(mesh, d_edge);
      const TeeProgram prog = emit_tee(d.graph, linearize(d.graph, d_seed));
      d.records.save(d_records);
      write_file(d_tee, serialize_tee(prog) + "\n");
      if (!d_base.empty()) save_obj(d.base, d_base);
      if (!d_patch.empty())
        write_file(d_patch, json{{"faces", d.base_patch.faces}, {"reference", d.base_patch.reference}}.dump() + "\n");
      const DagSummary s = summarize(d.graph);
      std::printf("nodes=%zu edges=%zu chains=%zu curves=%zu records=%zu base_faces=%zu\n", s.nodes, s.edges, s.chains,
                  s.curves, d.records.size(), d.base.num_faces());
      return kOk;
    }

    if (reb->parsed()) {
      const PolyMesh base = load_obj(r_base);
      const Patch patch = read_patch(base, r_patch, r_faces, r_ref);
      const RecordStore lib = RecordStore::load(r_records);
      ExecOptions opt;
      opt.methodology = r_method == "quad_dominant" ? Methodology::QuadDominant : Methodology::PureQuad;
      opt.dtw_threshold = r_threshold;
      TeeExecutor ex(base, patch, lib, opt);
      int rc = kOk;
      try {
        ex.run(parse_tee(read_file(r_tee)));
      } catch (const Error& e) {
        print_trace(ex.trace());
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
      }
      print_trace(ex.trace());
      save_obj(ex.mesh(), r_out);
      return rc;
    }

    if (rt->parsed()) {
      const PolyMesh mesh = load_obj(t_mesh);
      if (int rc = check_feq(mesh)) return rc;
      const Decomposition d = decompose_feature(mesh, t_edge);
      const TeeProgram prog = emit_tee(d.graph, linearize(d.graph, t_seed));
      std::vector<int> ks = t_k;
      if (ks.empty()) ks.push_back(0);
      json rows = json::array();
      for (int k : ks) {
        TeeProgram p = prog;
        if (k > 0) p = substitute({prog}, cluster_records(d.records, k, t_seed))[0];
        json row{{"K", k > 0 ? json(k) : json("lossless")}, {"tee", serialize_tee(p)}};
        try {
          const PolyMesh out = execute_tee(p, d.base, d.base_patch, d.records).mesh;
          row["hausdorff"] = relative_hausdorff(mesh, out, t_samples);
          row["face_delta"] = static_cast<long>(out.num_faces()) - static_cast<long>(mesh.num_faces());
          row["manifold"] = out.is_closed();
          row["isomorphic"] = connectivity_isomorphic(mesh, out);
        } catch (const Error& e) {
          row["error"] = error_to_json(e)["error"];
        }
        rows.push_back(row);
      }
      const json report{{"mesh", t_mesh},
                        {"faces", mesh.num_faces()},
                        {"records", d.records.size()},
                        {"tee", serialize_tee(prog)},
                        {"rows", rows}};
      if (t_json) {
        std::cout << report.dump(2) << "\n";
      } else {
        std::printf("faces=%zu records=%zu\n%s\n", mesh.num_faces(), d.records.size(), serialize_tee(prog).c_str());
        for (const auto& r : rows) {
          if (r.contains("error")) {
            std::printf("K=%s  error: %s\n", r["K"].dump().c_str(), r["error"]["message"].get<std::string>().c_str());
            continue;
          }
          std::printf("K=%s  hausdorff=%.3e  face_delta=%ld  manifold=%s  isomorphic=%s\n", r["K"].dump().c_str(),
                      r["hausdorff"].get<double>(), r["face_delta"].get<long>(), r["manifold"].get<bool>() ? "yes" : "no",
                      r["isomorphic"].get<bool>() ? "yes" : "no");
        }
      }
      return kOk;
    }

    if (clu->parsed()) {
      const RecordStore store = RecordStore::load(c_records);
      std::vector<std::string> warnings;
      const ClusterLibrary lib = cluster_records(store, c_k, c_seed, c_iter, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      lib.save(c_out);
      std::printf("records=%zu representatives=%zu\n", store.size(), lib.representatives.size());
      if (!c_programs.empty()) {
        std::vector<TeeProgram> progs;
        std::istringstream in(read_file(c_programs));
        std::string line;
        while (std::getline(in, line))
          if (line.find_first_not_of(" \t\r") != std::string::npos) progs.push_back(parse_tee(line));
        std::string text;
        for (const auto& p : substitute(progs, lib)) text += serialize_tee(p) + "\n";
        if (c_programs_out.empty()) std::cout << text;
        else write_file(c_programs_out, text);
      }
      return kOk;
    }

    if (exp->parsed()) {
      std::vector<fs::path> files;
      if (fs::is_directory(e_dir))
        for (const auto& entry : fs::directory_iterator(e_dir))
          if (entry.is_regular_file() && entry.path().extension() == ".tee") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "no .tee files in " << e_dir << "\n";
        return kFailure;
      }
      std::optional<RecordStore> store;
      if (!e_records.empty()) store = RecordStore::load(e_records);
      std::string corpus;
      for (const auto& f : files) {
        std::istringstream in(read_file(f.string()));
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          TeeProgram prog;
          try {
            prog = parse_tee(line);
            if (store)
              for (const auto& ins : prog.instructions)
                if (ins.kind == TeeInstruction::Kind::Apply) store->get(ins.value);
          } catch (const Error& e) {
            std::cerr << f.string() << ":" << lineno << ": " << e.what() << "\n";
            return e.kind() == ErrorKind::UnknownExtrusion ? kUnknownRecord : kFailure;
          }
          const ExtrusionGraph g = graph_from_tee(prog);
          for (int a = 0; a < e_aug; ++a)
            corpus += serialize_tee(emit_tee(g, linearize(g, e_seed + static_cast<std::uint64_t>(a)))) + "\n";
        }
      }
      write_file(e_out, corpus);
      return kOk;
    }

    if (srv->parsed()) {
      std::map<std::string, RecordStore> libs;
      for (const auto& entry : s_libs) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--library wants name=path");
        libs.emplace(entry.substr(0, eq), RecordStore::load(entry.substr(eq + 1)));
      }
      SessionService service(std::move(libs));
      httplib::Server server;
      bind_service(server, service);
      std::printf("listening on %s:%d\n", s_host.c_str(), s_port);
      std::fflush(stdout);
      if (!server.listen(s_host, s_port)) {
        std::cerr << "cannot listen on " << s_host << ":" << s_port << "\n";
        return kFailure;
      }
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
