#pragma once

#include <array>
#include <string>
#include <vector>

#include "feqtee/error.hpp"
#include "feqtee/geometry.hpp"

namespace feqtee {

/// Fixed unit-disk mesh used to turn uv curves into vertex-id sequences.
/// Vertex 0 is the center; ring r (1..R) holds 8r vertices at radius r/R,
/// angles 2*pi*j/(8r), numbered consecutively. A quad loop outside the unit
/// circle mirrors the attached face loop of an extrusion and carries no ids
/// that quantization can produce.
class GenericDisk {
 public:
  static constexpr int kDefaultRings = 32;

  explicit GenericDisk(int rings = kDefaultRings) : rings_(rings) {
    if (rings < 1) throw Error(ErrorKind::InvalidArgument, "generic disk needs at least one ring");
    vertices_.emplace_back(0.0, 0.0);
    for (int r = 1; r <= rings; ++r)
      for (int j = 0; j < 8 * r; ++j) vertices_.push_back(ring_point(r, j));
    for (int r = 1; r <= rings; ++r) zip(r);
    const int outer_start = static_cast<int>(vertices_.size());
    for (int j = 0; j < 8 * rings; ++j) {
      const double a = kTwoPi * j / (8.0 * rings);
      outer_.emplace_back((1.0 + 1.0 / rings) * std::cos(a), (1.0 + 1.0 / rings) * std::sin(a));
      const int k = (j + 1) % (8 * rings);
      loop_quads_.push_back({ring_start(rings) + j, outer_start + j, outer_start + k, ring_start(rings) + k});
    }
  }

  int rings() const { return rings_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  // Outer loop: vertex ids >= vertex_count() index outer_vertices().
  const std::vector<Vec2>& outer_vertices() const { return outer_; }
  const std::vector<std::array<int, 4>>& boundary_loop_faces() const { return loop_quads_; }

  static int ring_start(int r) { return r == 0 ? 0 : 1 + 4 * (r - 1) * r; }
  static std::size_t count_for(int rings) { return 1 + 4 * static_cast<std::size_t>(rings) * (rings + 1); }

  /// Nearest vertex (smallest id on ties); points outside the disk are
  /// pulled onto the unit circle first.
  int nearest(Vec2 p) const {
    if (p.norm() > 1.0) p.normalize();
    int best = 0;
    double best_d = p.squaredNorm();
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
      const double d = (vertices_[i] - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  std::vector<int> quantize(const std::vector<Vec2>& curve) const {
    std::vector<int> ids;
    for (const auto& p : curve) {
      const int id = nearest(p);
      if (ids.empty() || ids.back() != id) ids.push_back(id);
    }
    return ids;
  }

  std::vector<Vec2> dequantize(const std::vector<int>& ids) const {
    std::vector<Vec2> out;
    out.reserve(ids.size());
    for (int id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vertices_.size())
        throw Error(ErrorKind::OutOfRange, "generic-disk vertex id " + std::to_string(id) + " is out of range (0.." +
                                               std::to_string(vertices_.size() - 1) + ")");
      out.push_back(vertices_[id]);
    }
    return out;
  }

 private:
  Vec2 ring_point(int r, int j) const {
    const double a = kTwoPi * j / (8.0 * r);
    const double rad = static_cast<double>(r) / rings_;
    return {rad * std::cos(a), rad * std::sin(a)};
  }

  // Triangulate the annulus between rings r-1 and r by merging angles.
  void zip(int r) {
    const int na = r == 1 ? 1 : 8 * (r - 1), nb = 8 * r;
    const int sa = ring_start(r - 1), sb = ring_start(r);
    auto angle = [](int j, int n) { return kTwoPi * j / n; };
    int i = 0, j = 0;
    while (j < nb || (na > 1 && i < na)) {
      const int a = sa + i % na, b = sb + j % nb;
      const bool advance_outer = i >= na || (j < nb && (na == 1 || angle(j + 1, nb) <= angle(i + 1, na)));
      if (advance_outer) {
        triangles_.push_back({a, b, sb + (j + 1) % nb});
        ++j;
      } else {
        triangles_.push_back({a, b, sa + (i + 1) % na});
        ++i;
      }
    }
  }

  int rings_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Vec2> outer_;
  std::vector<std::array<int, 4>> loop_quads_;
};

/// Shared default-resolution disk.
inline const GenericDisk& default_generic_disk() {
  static const GenericDisk disk(GenericDisk::kDefaultRings);
  return disk;
}

}  // namespace feqtee
