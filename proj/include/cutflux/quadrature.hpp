#pragma once

#include <span>
#include <vector>

#include "cutflux/geometry.hpp"

namespace cutflux {

/// Points and positive weights integrating polynomials up to `degree` exactly.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  double measure() const;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q) s += weights[q] * f(points[q]);
    return s;
  }

  void append(const QuadratureRule& other);
};

inline constexpr int kMaxQuadratureDegree = 4;

/// Symmetric rule on the triangle (a, b, c), degree in [0, 4]. With
/// `refinements` > 0 the triangle is split uniformly into 4^refinements
/// children before the rule is applied.
QuadratureRule triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int degree, int refinements = 0);

/// Convex polygon, fan-triangulated from its vertex mean.
QuadratureRule polygon_rule(std::span<const Vec2> polygon, int degree, int refinements = 0);

/// Gauss-Legendre rule on the segment [a, b].
QuadratureRule segment_rule(const Vec2& a, const Vec2& b, int degree);

}  // namespace cutflux
