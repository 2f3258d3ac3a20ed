#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "feqtee/extrusion.hpp"
#include "feqtee/tee.hpp"

namespace feqtee {

inline constexpr const char* kLibraryFormat = "feqtee-lib-v1";

/// Fixed patch every record is applied to before clustering: the 4x4 top of
/// a box whose sides are split 4x4.
struct CanonicalPatch {
  PolyMesh mesh;
  Patch patch;

  static const CanonicalPatch& get() {
    static const CanonicalPatch c = build();
    return c;
  }

 private:
  static CanonicalPatch build() {
    constexpr int n = 4;
    std::map<std::array<int, 3>, int> index;
    std::vector<Vec3> positions;
    auto vid = [&](std::array<int, 3> p) {
      auto [it, inserted] = index.emplace(p, static_cast<int>(positions.size()));
      if (inserted) positions.emplace_back(2.0 * p[0] / n - 1.0, 2.0 * p[1] / n - 1.0, 2.0 * p[2] / n - 1.0);
      return it->second;
    };
    std::vector<std::vector<int>> faces;
    std::vector<int> top;
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, w = (axis + 2) % 3;
      for (int side : {0, n})
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            std::array<int, 3> p{};
            p[axis] = side;
            p[u] = i;
            p[w] = j;
            auto q = p, r = p, s = p;
            q[u] += 1;
            r[u] += 1;
            r[w] += 1;
            s[w] += 1;
            std::vector<int> quad{vid(p), vid(q), vid(r), vid(s)};
            if (side == 0) std::reverse(quad.begin(), quad.end());
            if (axis == 2 && side == n) top.push_back(static_cast<int>(faces.size()));
            faces.push_back(std::move(quad));
          }
    }
    CanonicalPatch c;
    c.mesh = PolyMesh(std::move(positions), std::move(faces));
    c.patch = make_patch(c.mesh, top);
    return c;
  }
};

/// Positions of the canonical extended patch after applying `rec`, flattened
/// in vertex-id order.
inline std::vector<double> canonicalize(const ExtrusionRecord& rec) {
  const CanonicalPatch& c = CanonicalPatch::get();
  const ApplyResult res = apply_extrusion(c.mesh, c.patch, rec);
  std::vector<double> out;
  for (int v : patch_vertices(res.mesh, res.extended))
    for (int k = 0; k < 3; ++k) out.push_back(res.mesh.position(v)[k]);
  return out;
}

struct KMeansResult {
  std::vector<int> label;                 // per vector
  std::vector<std::vector<double>> mean;  // per cluster
  std::vector<int> representative;        // per cluster: index of the member nearest the mean, -1 if empty
  std::vector<double> objective;          // after each Lloyd iteration
  int iterations = 0;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace detail

/// k-means++ seeding followed by Lloyd iterations.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& x, int k, std::uint64_t seed, int max_iter = 100) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "k-means needs at least one vector");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k-means needs K >= 1");
  const std::size_t n = x.size();
  k = std::min<int>(k, static_cast<int>(n));
  std::mt19937_64 rng(seed);
  KMeansResult r;
  std::vector<char> chosen(n, 0);
  std::size_t first = rng() % n;
  r.mean.push_back(x[first]);
  chosen[first] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::sq_dist(x[i], r.mean[0]);
  while (static_cast<int>(r.mean.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double t = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        pick = i;
        t -= d2[i];
        if (t < 0.0) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng() % rest.size()];
    }
    chosen[pick] = 1;
    r.mean.push_back(x[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], detail::sq_dist(x[i], r.mean.back()));
  }

  r.label.assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = detail::sq_dist(x[i], r.mean[0]);
      for (int c = 1; c < k; ++c) {
        const double d = detail::sq_dist(x[i], r.mean[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      changed |= r.label[i] != best;
      r.label[i] = best;
      obj += bd;
    }
    r.iterations = it + 1;
    if (!changed) {
      r.objective.push_back(obj);
      break;
    }
    std::vector<std::vector<double>> sum(k, std::vector<double>(x[0].size(), 0.0));
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[r.label[i]];
      for (std::size_t j = 0; j < x[i].size(); ++j) sum[r.label[i]][j] += x[i][j];
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0)
        for (std::size_t j = 0; j < sum[c].size(); ++j) r.mean[c][j] = sum[c][j] / count[c];
    obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += detail::sq_dist(x[i], r.mean[r.label[i]]);
    r.objective.push_back(obj);
  }
  r.representative.assign(k, -1);
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const int c = r.label[i];
    const double d = detail::sq_dist(x[i], r.mean[c]);
    if (d < best[c]) {
      best[c] = d;
      r.representative[c] = static_cast<int>(i);
    }
  }
  return r;
}

struct ClusterLibrary {
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t feature_dim = 0;
  std::vector<int> representatives;  // record ids, ascending
  std::map<int, int> assignment;     // record id -> representative record id
  std::vector<int> excluded;         // records that could not be canonicalized

  nlohmann::json to_json() const {
    nlohmann::json assign = nlohmann::json::array();
    for (const auto& [a, b] : assignment) assign.push_back({a, b});
    return {{"format", kLibraryFormat}, {"K", k},           {"seed", seed},          {"feature_dim", feature_dim},
            {"representatives", representatives},          {"assignment", assign}, {"excluded", excluded}};
  }

  static ClusterLibrary from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != kLibraryFormat)
      throw Error(ErrorKind::Malformed, std::string("cluster library is not ") + kLibraryFormat);
    ClusterLibrary lib;
    try {
      lib.k = j.at("K").get<int>();
      lib.seed = j.at("seed").get<std::uint64_t>();
      lib.feature_dim = j.at("feature_dim").get<std::size_t>();
      lib.representatives = j.at("representatives").get<std::vector<int>>();
      for (const auto& p : j.at("assignment")) lib.assignment[p.at(0).get<int>()] = p.at(1).get<int>();
      if (j.contains("excluded")) lib.excluded = j.at("excluded").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Malformed, std::string("cluster library: ") + e.what());
    }
    return lib;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Malformed, "cannot write " + path);
    out << to_json().dump(2) << "\n";
  }

  static ClusterLibrary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Malformed, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::Malformed, path + " is not JSON");
    return from_json(j);
  }
};

/// Cluster the records of a store into at most K representatives.
inline ClusterLibrary cluster_records(const RecordStore& store, int k, std::uint64_t seed, int max_iter = 100,
                                      std::vector<std::string>* warnings = nullptr) {
  if (store.size() == 0) throw Error(ErrorKind::InvalidArgument, "no records to cluster");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "K must be at least 1");
  ClusterLibrary lib;
  lib.seed = seed;
  std::vector<int> ids;
  std::vector<std::vector<double>> vecs;
  for (const auto& r : store.records()) {
    try {
      vecs.push_back(canonicalize(r));
      ids.push_back(r.id);
    } catch (const Error& e) {
      lib.excluded.push_back(r.id);
      lib.assignment[r.id] = r.id;
      lib.representatives.push_back(r.id);
      if (warnings) warnings->push_back("record E" + std::to_string(r.id) + " excluded: " + e.what());
    }
  }
  if (!vecs.empty()) {
    lib.feature_dim = vecs[0].size();
    if (k > static_cast<int>(vecs.size()) && warnings)
      warnings->push_back("K=" + std::to_string(k) + " clamped to " + std::to_string(vecs.size()));
    const int kk = std::min<int>(k, static_cast<int>(vecs.size()));
    if (kk == static_cast<int>(vecs.size())) {
      for (int id : ids) {
        lib.assignment[id] = id;
        lib.representatives.push_back(id);
      }
    } else {
      const KMeansResult km = kmeans(vecs, kk, seed, max_iter);
      for (std::size_t i = 0; i < ids.size(); ++i) lib.assignment[ids[i]] = ids[km.representative[km.label[i]]];
      for (int rep : km.representative)
        if (rep >= 0) lib.representatives.push_back(ids[rep]);
    }
  }
  lib.k = k;
  std::sort(lib.representatives.begin(), lib.representatives.end());
  return lib;
}

/// Replace every E-id by its representative.
inline std::vector<TeeProgram> substitute(const std::vector<TeeProgram>& programs, const ClusterLibrary& lib) {
  std::vector<TeeProgram> out = programs;
  for (std::size_t p = 0; p < out.size(); ++p)
    for (std::size_t i = 0; i < out[p].size(); ++i) {
      auto& ins = out[p].instructions[i];
      if (ins.kind != TeeInstruction::Kind::Apply) continue;
      auto it = lib.assignment.find(ins.value);
      if (it == lib.assignment.end())
        throw Error(ErrorKind::UnknownExtrusion, "program " + std::to_string(p) + ", instruction " + std::to_string(i) +
                                                     ": record E" + std::to_string(ins.value) + " is not in the library",
                    i);
      ins.value = it->second;
    }
  return out;
}

}  // namespace feqtee
