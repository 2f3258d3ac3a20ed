// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "feqtee/cluster.hpp"
#include "feqtee/decompose.hpp"
#include "feqtee/interpreter.hpp"
#include "feqtee/metrics.hpp"
#include "fixtures.hpp"

using namespace feqtee;
using namespace feqtee::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

// --- shared fixtures ------------------------------------------------------

std::vector<Feature> feature_set() {
  return {
      bump_on_cube(),
      bump_on_cube(0.3, 0.5),
      tower(2, 2),
      tower(3, 3),
      tower(2, 3, 0.4, 0.85, 0.2),
      tower(4, 2, 0.5, 0.7),
      branching(4, {{{0, 0}}, {{2, 2}, {2, 3}}}),
      branching(4, {{{0, 0}}, {{3, 3}}}, 2),
      branching(4, {{{0, 3}}, {{3, 0}}}),
      branching(5, {{{0, 0}}, {{2, 2}}, {{4, 0}, {4, 1}}}),
      branching(5, {{{1, 1}, {1, 2}, {2, 1}, {2, 2}}}, 3),
      branching(5, {{{0, 4}, {1, 4}}, {{3, 1}}}, 2),
  };
}

struct Encoded {
  Decomposition d;
  TeeProgram prog;
};

Encoded encode(const Feature& f, std::uint64_t seed, int id_offset = 0) {
  Encoded e{decompose_feature(f.mesh, f.root_edge()), {}};
  if (id_offset) offset_record_ids(e.d, id_offset);
  e.prog = emit_tee(e.d.graph, linearize(e.d.graph, seed));
  return e;
}

// Every undirected edge used by exactly two faces in opposite directions, no
// repeated corner in a face, and every vertex link a single fan cycle.
bool closed_two_manifold(const PolyMesh& m) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : m.faces()) {
    if (f.size() < 3) return false;
    std::set<int> corners(f.begin(), f.end());
    if (corners.size() != f.size()) return false;
    for (std::size_t i = 0; i < f.size(); ++i) ++directed[{f[i], f[(i + 1) % f.size()]}];
  }
  for (const auto& [e, n] : directed) {
    if (n != 1) return false;
    auto it = directed.find({e.second, e.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  // Vertex links: the wedge successor map (next corner around v) must form one cycle.
  std::vector<std::map<int, int>> wedge(m.num_vertices());
  for (const auto& f : m.faces())
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int v = f[i], a = f[(i + 1) % f.size()], b = f[(i + f.size() - 1) % f.size()];
      if (!wedge[v].emplace(a, b).second) return false;
    }
  for (std::size_t v = 0; v < wedge.size(); ++v) {
    if (wedge[v].empty()) return false;
    int start = wedge[v].begin()->first, cur = start;
    std::size_t steps = 0;
    do {
      auto it = wedge[v].find(cur);
      if (it == wedge[v].end()) return false;
      cur = it->second;
      ++steps;
    } while (cur != start && steps <= wedge[v].size());
    if (cur != start || steps != wedge[v].size()) return false;
  }
  return true;
}

std::vector<int> random_curve_ids(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec2 c(0.6 * u(rng) - 0.3, 0.6 * u(rng) - 0.3);
  const double rx = 0.1 + 0.5 * u(rng), ry = 0.1 + 0.5 * u(rng), phi = kTwoPi * u(rng);
  const int n = 8 + static_cast<int>(24 * u(rng));
  std::vector<Vec2> pts;
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    const double wobble = 1.0 + 0.2 * (u(rng) - 0.5);
    Vec2 q(rx * wobble * std::cos(t), ry * wobble * std::sin(t));
    q = Vec2(std::cos(phi) * q.x() - std::sin(phi) * q.y(), std::sin(phi) * q.x() + std::cos(phi) * q.y()) + c;
    if (q.norm() > 0.95) q *= 0.95 / q.norm();
    pts.push_back(q);
  }
  auto ids = default_generic_disk().quantize(pts);
  while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
  return ids;
}

// A random valid program: starts with E, gp only names remembered tags.
TeeProgram random_program(std::mt19937_64& rng, int n_records, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len), rec(0, n_records - 1), kind(0, 9);
  const int target = len(rng);
  TeeProgram p;
  std::vector<int> tags;
  p.instructions.push_back(TeeInstruction::apply(rec(rng)));
  while (static_cast<int>(p.size()) < target) {
    const int k = kind(rng);
    if (k < 4) {
      p.instructions.push_back(TeeInstruction::apply(rec(rng)));
    } else if (k < 6) {
      const int t = std::uniform_int_distribution<int>(0, 9)(rng);
      p.instructions.push_back(TeeInstruction::remember(t));
      tags.push_back(t);
    } else if (k < 8 && !tags.empty()) {
      p.instructions.push_back(
          TeeInstruction::get_previous(tags[std::uniform_int_distribution<std::size_t>(0, tags.size() - 1)(rng)]));
    } else {
      auto ids = random_curve_ids(rng);
      if (ids.size() >= 3) p.instructions.push_back(TeeInstruction::select(std::move(ids)));
    }
  }
  return p;
}

// --- criteria -------------------------------------------------------------

Verdict lossless_round_trip() {
  const auto t0 = Clock::now();
  const auto features = feature_set();
  int ok = 0;
  double worst = 0.0;
  std::string failures;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Feature& f = features[i];
    try {
      const Encoded e = encode(f, 17 + i);
      const PolyMesh out = execute_tee(e.prog, e.d.base, e.d.base_patch, e.d.records).mesh;
      const double h = relative_hausdorff(f.mesh, out);
      worst = std::max(worst, h);
      if (connectivity_isomorphic(f.mesh, out) && h <= 1e-5) ++ok;
      else failures += " " + f.name;
    } catch (const Error& err) {
      failures += " " + f.name + "(" + err.what() + ")";
    }
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = ok == static_cast<int>(features.size()) && features.size() >= 10 && t <= 10.0;
  v.detail = std::to_string(ok) + "/" + std::to_string(features.size()) + " features, worst hausdorff " +
             fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s" + failures;
  return v;
}

RecordStore twenty_records() {
  RecordStore all;
  int next = 0;
  for (const Feature& f : feature_set()) {
    Decomposition d = decompose_feature(f.mesh, f.root_edge());
    for (ExtrusionRecord r : d.records.records()) {
      if (next == 20) return all;
      r.id = next++;
      all.add(std::move(r));
    }
  }
  if (all.size() < 20) throw Error(ErrorKind::InvalidArgument, "fewer than 20 records in the feature set");
  return all;
}

Verdict guaranteed_manifold() {
  const auto t0 = Clock::now();
  const RecordStore lib = twenty_records();
  const PolyMesh base = subdivided_box(3);
  const Patch patch = make_patch(base, top_faces(base));
  std::mt19937_64 rng(2024);
  int meshes = 0, errors = 0, bad = 0, crashes = 0;
  std::map<std::string, int> kinds;
  for (int i = 0; i < 1000; ++i) {
    const TeeProgram prog = random_program(rng, 20, 30);
    ExecOptions opt;
    opt.methodology = i % 2 ? Methodology::QuadDominant : Methodology::PureQuad;
    try {
      const PolyMesh out = execute_tee(prog, base, patch, lib, opt).mesh;
      ++meshes;
      if (!closed_two_manifold(out)) ++bad;
    } catch (const Error& e) {
      ++errors;
      ++kinds[std::string(to_string(e.kind()))];
      if (std::getenv("FEQTEE_DEBUG")) std::fprintf(stderr, "%d %s || %s\n", i % 2, e.what(), serialize_tee(prog).c_str());
    } catch (const std::exception&) {
      ++crashes;
    }
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = bad == 0 && crashes == 0 && t <= 60.0;
  v.detail = std::to_string(meshes) + " meshes, " + std::to_string(errors) + " structured errors, " +
             std::to_string(bad) + " non-manifold, " + std::to_string(crashes) + " unstructured, " + fmt("%.1f", t) + " s";
  v.detail += " (errors:";
  for (const auto& [k, c] : kinds) v.detail += " " + k + "=" + std::to_string(c);
  v.detail += ")";
  return v;
}

Verdict clustering_trend() {
  // Features with distinct records; ids made globally unique.
  const std::vector<Feature> features{
      bump_on_cube(),
      bump_on_cube(0.3, 0.5),
      tower(3, 3),
      tower(2, 3, 0.4, 0.85, 0.2),
      branching(4, {{{0, 0}}, {{2, 2}, {2, 3}}}),
      branching(5, {{{1, 1}, {1, 2}, {2, 1}, {2, 2}}}, 3),
  };
  std::vector<Encoded> enc;
  RecordStore all;
  int offset = 0;
  std::vector<TeeProgram> programs;
  for (std::size_t i = 0; i < features.size(); ++i) {
    enc.push_back(encode(features[i], 5 + i, offset));
    for (const auto& r : enc.back().d.records.records()) all.add(r);
    offset += static_cast<int>(enc.back().d.records.size());
    programs.push_back(enc.back().prog);
  }
  const int n = static_cast<int>(all.size());
  std::vector<double> means;
  std::string detail = "N=" + std::to_string(n);
  for (int k : {n, n / 2, 1}) {
    const auto subs = substitute(programs, cluster_records(all, k, 7));
    double sum = 0.0;
    int failed = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      try {
        const PolyMesh out = execute_tee(subs[i], enc[i].d.base, enc[i].d.base_patch, all).mesh;
        sum += relative_hausdorff(features[i].mesh, out);
      } catch (const Error&) {
        ++failed;
      }
    }
    const double mean = failed ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(features.size());
    means.push_back(mean);
    detail += ", K=" + std::to_string(k) + ": " + fmt("%.3e", mean);
    if (failed) detail += " (" + std::to_string(failed) + " rebuilds failed)";
  }
  Verdict v;
  v.pass = n >= 8 && means[0] <= 1e-5 && means[0] <= means[1] && means[1] <= means[2] && std::isfinite(means[2]);
  v.detail = detail;
  return v;
}

Verdict parser() {
  std::mt19937_64 rng(99);
  // Byte fuzz, weighted towards the token alphabet so deeper paths are reached.
  const std::string alphabet = "EPRegpsv0123456789 \t\n";
  int crashes = 0, accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s(std::uniform_int_distribution<int>(0, 64)(rng), '\0');
    const bool raw = i % 2 == 0;
    for (char& c : s)
      c = raw ? static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng))
              : alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    for (ParseMode mode : {ParseMode::Strict, ParseMode::Lenient}) {
      try {
        const TeeProgram p = parse_tee(s, mode);
        if (mode == ParseMode::Strict) ++accepted;
        (void)serialize_tee(p);
      } catch (const Error&) {
      } catch (...) {
        ++crashes;
      }
    }
  }
  int round_trips = 0;
  for (int i = 0; i < 100; ++i) {
    const TeeProgram p = random_program(rng, 30000, 40);
    const std::string text = serialize_tee(p);
    try {
      if (parse_tee(text) == p && serialize_tee(parse_tee(text)) == text) ++round_trips;
    } catch (const Error&) {
    }
  }
  const std::string sample = "E8124 E8124 E17698 E15286 E4630 P4 Re gp P4 sv 2222 2402 2562 2742";
  const TeeProgram expected{{TeeInstruction::apply(8124), TeeInstruction::apply(8124), TeeInstruction::apply(17698),
                             TeeInstruction::apply(15286), TeeInstruction::apply(4630), TeeInstruction::remember(4),
                             TeeInstruction::get_previous(4), TeeInstruction::select({2222, 2402, 2562, 2742})}};
  bool sample_ok = false;
  try {
    const TeeProgram p = parse_tee(sample);
    sample_ok = p == expected && serialize_tee(p) == sample;
  } catch (const Error&) {
  }
  Verdict v;
  v.pass = crashes == 0 && round_trips == 100 && sample_ok;
  v.detail = "fuzz crashes " + std::to_string(crashes) + " (" + std::to_string(accepted) + " strings parsed), " +
             std::to_string(round_trips) + "/100 round trips, sample program " + (sample_ok ? "exact" : "MISMATCH");
  return v;
}

// Uniform-weight Laplacian residual on the split triangulation, from its
// adjacency only.
double harmonic_residual(const ParamPatch& p) {
  std::vector<std::set<int>> adj(p.uv.size());
  for (const auto& t : p.split.tris)
    for (int k = 0; k < 3; ++k) {
      adj[t[k]].insert(t[(k + 1) % 3]);
      adj[t[(k + 1) % 3]].insert(t[k]);
    }
  std::set<int> boundary(p.split.boundary.begin(), p.split.boundary.end());
  double worst = 0.0;
  for (std::size_t v = 0; v < p.uv.size(); ++v) {
    if (boundary.count(static_cast<int>(v))) continue;
    Vec2 s = Vec2::Zero();
    for (int w : adj[v]) s += p.uv[w];
    worst = std::max(worst, (p.uv[v] - s / static_cast<double>(adj[v].size())).norm());
  }
  return worst;
}

Verdict harmonic_injectivity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  int flipped = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 7;
    PolyMesh g = planar_grid(n);
    auto& pos = g.mutable_positions();
    // Interior vertices move within a third of a cell, so the grid stays embedded.
    for (int r = 1; r < n; ++r)
      for (int c = 1; c < n; ++c) {
        Vec3& p = pos[r * (n + 1) + c];
        p += Vec3(u(rng), u(rng), 2 * u(rng)) * (1.0 / n);
      }
    const ParamPatch param = harmonic_disk_map(g, make_patch(g, all_faces(g)));
    for (const auto& t : param.split.tris) {
      const Vec2 a = param.uv[t[1]] - param.uv[t[0]], b = param.uv[t[2]] - param.uv[t[0]];
      if (a.x() * b.y() - a.y() * b.x() <= 0) ++flipped;
    }
    worst = std::max(worst, harmonic_residual(param));
  }
  Verdict v;
  v.pass = flipped == 0 && worst <= 1e-8;
  v.detail = std::to_string(flipped) + " flipped triangles over 100 patches, max residual " + fmt("%.2e", worst);
  return v;
}

// Root extrusion of an n-box top and bumps on random separated blocks of the
// cap; returns the feature and, per bump, the sorted base face centroids
// before the bump was extruded.
struct SelectionCase {
  Feature feature;
  std::vector<std::vector<Vec3>> blocks;
};

SelectionCase selection_case(std::mt19937_64& rng) {
  const int n = std::uniform_int_distribution<int>(4, 6)(rng);
  PolyMesh m = subdivided_box(n);
  auto root = synthetic_extrude(m, top_faces(m), 0.5, 0.9);
  SelectionCase sc{{"sel", root.mesh, root.sleeper}, {}};
  std::vector<std::vector<int>> taken(n, std::vector<int>(n, 0));
  std::vector<std::vector<int>> blocks;
  for (int attempt = 0; attempt < 20 && blocks.size() < 3; ++attempt) {
    const int w = std::uniform_int_distribution<int>(1, 2)(rng), h = std::uniform_int_distribution<int>(1, 2)(rng);
    const int i0 = std::uniform_int_distribution<int>(0, n - w)(rng), j0 = std::uniform_int_distribution<int>(0, n - h)(rng);
    bool free = true;
    for (int i = i0 - 1; i <= i0 + w; ++i)
      for (int j = j0 - 1; j <= j0 + h; ++j)
        if (i >= 0 && j >= 0 && i < n && j < n && taken[i][j]) free = false;
    if (!free) continue;
    std::vector<int> faces;
    for (int i = i0; i < i0 + w; ++i)
      for (int j = j0; j < j0 + h; ++j) {
        taken[i][j] = 1;
        faces.push_back(top_cell(m, n, i, j));
      }
    blocks.push_back(faces);
  }
  for (const auto& b : blocks) {
    std::vector<Vec3> c;
    for (int f : b) c.push_back(sc.feature.mesh.face_centroid(f));
    sc.blocks.push_back(c);
  }
  double height = 0.3;
  for (const auto& b : blocks) {
    auto e = synthetic_extrude(sc.feature.mesh, b, height, 0.75);
    sc.feature.mesh = e.mesh;
    height += 0.1;
  }
  return sc;
}

bool same_points(std::vector<Vec3> a, std::vector<Vec3> b) {
  if (a.size() != b.size()) return false;
  auto less = [](const Vec3& x, const Vec3& y) {
    return std::lexicographical_compare(x.data(), x.data() + 3, y.data(), y.data() + 3);
  };
  std::sort(a.begin(), a.end(), less);
  std::sort(b.begin(), b.end(), less);
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] - b[i]).norm() > 1e-7) return false;
  return true;
}

Verdict selection_fidelity() {
  std::mt19937_64 rng(31);
  int cases = 0, exact = 0;
  while (cases < 100) {
    const SelectionCase sc = selection_case(rng);
    const Encoded e = encode(sc.feature, static_cast<std::uint64_t>(cases));
    ExecOptions opt;
    opt.dtw_threshold = std::numeric_limits<double>::infinity();  // pure-quad only
    TeeExecutor ex(e.d.base, e.d.base_patch, e.d.records, opt);
    for (const auto& ins : e.prog.instructions) {
      if (ins.kind != TeeInstruction::Kind::Select) {
        ex.step(ins);
        continue;
      }
      ++cases;
      const std::size_t before = ex.gathered_faces().size();
      try {
        ex.step(ins);
      } catch (const Error&) {
        break;
      }
      if (ex.trace().back().cut) continue;
      std::vector<Vec3> got;
      for (std::size_t k = before; k < ex.gathered_faces().size(); ++k)
        got.push_back(ex.mesh().face_centroid(ex.gathered_faces()[k]));
      for (const auto& b : sc.blocks)
        if (same_points(got, b)) {
          ++exact;
          break;
        }
    }
  }
  const std::vector<Vec2> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  double err = 0.0;
  for (int K : {1, 5, 9}) {
    err = std::max(err, std::abs(edge_weight(Vec2(1, 0), Vec2(3, 0), square, K) - 0.0));
    err = std::max(err, std::abs(edge_weight(Vec2(2, 0), Vec2(2, -0.7), square, K) - K));
    err = std::max(err, std::abs(edge_weight(Vec2(1, 0.5), Vec2(2, 0.5), square, K) - 0.25 * K));
  }
  Verdict v;
  v.pass = exact == cases && err <= 1e-12;
  v.detail = std::to_string(exact) + "/" + std::to_string(cases) + " base patches recovered, edge_weight error " +
             fmt("%.1e", err);
  return v;
}

Verdict cube_census() {
  const auto loops = enumerate_face_loops(cube());
  bool census = loops.size() == 3;
  for (const auto& l : loops) census = census && l.size() == 4;
  std::mt19937_64 rng(8);
  int identity = 0;
  const PolyMesh box = subdivided_box(4);
  for (int i = 0; i < 50; ++i) {
    const Patch p = make_patch(box, random_disk_patch(box, rng, 1 + i % 12));
    const auto ext = extrude_patch(box, p);
    const auto col = collapse_face_loop(ext.mesh, ext.loop, &p.faces);
    if (col.mesh.faces() == box.faces() && connectivity_isomorphic(col.mesh, box)) ++identity;
  }
  Verdict v;
  v.pass = census && identity == 50;
  v.detail = std::to_string(loops.size()) + " cube loops" + (census ? " of 4 faces" : "") + ", " +
             std::to_string(identity) + "/50 extrude-collapse identities";
  return v;
}

Verdict linearization() {
  // Root with a two-node chain and a single node as branches.
  ExtrusionGraph g;
  g.nodes = {{0, 0, {}, {}}, {1, 1, {0}, {}}, {2, 2, {1}, {}}, {3, 3, {0}, {}}};
  // Oracle: all topological orders, filtered for nodes with one parent that
  // has one child staying right after it.
  std::set<std::vector<int>> valid;
  std::vector<int> perm{0, 1, 2, 3};
  do {
    std::vector<int> pos(4);
    for (int i = 0; i < 4; ++i) pos[perm[i]] = i;
    bool ok = true;
    for (const auto& n : g.nodes)
      for (int p : n.parents) ok = ok && pos[p] < pos[n.id];
    const auto kids = g.children();
    for (const auto& n : g.nodes)
      if (n.parents.size() == 1 && kids[n.parents[0]].size() == 1) ok = ok && pos[n.id] == pos[n.parents[0]] + 1;
    if (ok) valid.insert(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::set<std::vector<int>> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(linearize(g, s));
  Verdict v;
  v.pass = seen == valid && seen.size() == 2;
  v.detail = std::to_string(seen.size()) + " distinct orders over 1000 seeds, " + std::to_string(valid.size()) +
             " valid";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"lossless round trip", lossless_round_trip},
      {"guaranteed manifold", guaranteed_manifold},
      {"clustering trend", clustering_trend},
      {"parser and serializer", parser},
      {"harmonic map injectivity", harmonic_injectivity},
      {"selection fidelity", selection_fidelity},
      {"cube loop census", cube_census},
      {"randomized linearization", linearization},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
