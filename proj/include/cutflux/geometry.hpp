#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

namespace cutflux {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Clockwise quarter turn: (x, y) -> (y, -x).
inline Vec2 rotate_cw(const Vec2& v) { return {v.y(), -v.x()}; }

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

/// Shoelace area, positive for counter-clockwise vertex order.
inline double polygon_area(std::span<const Vec2> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += cross(p, q);
  }
  return 0.5 * s;
}

inline Vec2 vertex_mean(std::span<const Vec2> poly) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : poly) c += p;
  return c / static_cast<double>(poly.size());
}

/// Barycentric coordinates of x with respect to the triangle (a, b, c).
inline Eigen::Vector3d barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& x) {
  const double area = signed_area(a, b, c);
  return {signed_area(x, b, c) / area, signed_area(a, x, c) / area, signed_area(a, b, x) / area};
}

/// A straight segment; used for edge fragments and interface pieces.
struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double length() const { return (b - a).norm(); }
  Vec2 midpoint() const { return 0.5 * (a + b); }
};

}  // namespace cutflux
