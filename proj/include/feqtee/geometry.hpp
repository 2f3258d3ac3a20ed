#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace feqtee {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Newell normal; its length is twice the polygon area.
inline Vec3 newell_normal(std::span<const Vec3> pts) {
  Vec3 n = Vec3::Zero();
  const std::size_t k = pts.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[(i + 1) % k];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  return n;
}

// Sum of fan-triangle areas around the centroid; robust for non-planar quads.
inline double polygon_area(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    area += 0.5 * (pts[i] - c).cross(pts[(i + 1) % pts.size()] - c).norm();
  return area;
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross2(b - a, c - a);
}

inline double signed_area(std::span<const Vec2> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

inline Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return (p - closest_on_segment(p, a, b)).norm();
}

inline bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  if (segments_properly_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

/// Winding number of a closed polyline around p (0 outside for simple loops).
inline int winding_number(const Vec2& p, std::span<const Vec2> loop) {
  int wn = 0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross2(b - a, p - a) > 0) ++wn;
    } else {
      if (b.y() <= p.y() && cross2(b - a, p - a) < 0) --wn;
    }
  }
  return wn;
}

inline double distance_to_polyline(const Vec2& p, std::span<const Vec2> loop) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i)
    best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]));
  return best;
}

/// Barycentric coordinates of p in triangle (a,b,c); unnormalized if degenerate.
inline std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = cross2(b - a, c - a);
  if (area == 0.0) return {1.0, 0.0, 0.0};
  const double l1 = cross2(c - b, p - b) / area;
  const double l2 = cross2(a - c, p - c) / area;
  return {l1, l2, 1.0 - l1 - l2};
}

inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double angle_of(const Vec2& p) {
  double a = std::atan2(p.y(), p.x());
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

inline double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

inline Vec2 rotate(const Vec2& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

}  // namespace feqtee
