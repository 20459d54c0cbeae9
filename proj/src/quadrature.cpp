#include "cutflux/quadrature.hpp"

#include <array>
#include <cmath>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw Error(ErrorKind::invalid_argument, "quadrature degree must lie in [0, 4]");
  }
}

struct BaryPoint {
  double l0, l1, l2, w;  // barycentric coordinates and weight relative to the area
};

// Centroid rule (degree 1), the 3-point interior rule (degree 2) and the
// 6-point Dunavant rule (degree 4). All weights positive.
const std::vector<BaryPoint>& reference_points(int degree) {
  static const std::vector<BaryPoint> p1 = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0}};
  static const std::vector<BaryPoint> p2 = {
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
      {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
  };
  static const std::vector<BaryPoint> p4 = [] {
    const double a1 = 0.44594849091596488632, b1 = 1.0 - 2.0 * a1, w1 = 0.22338158967801146570;
    const double a2 = 0.091576213509770743460, b2 = 1.0 - 2.0 * a2, w2 = 0.10995174365532186764;
    return std::vector<BaryPoint>{
        {b1, a1, a1, w1}, {a1, b1, a1, w1}, {a1, a1, b1, w1},
        {b2, a2, a2, w2}, {a2, b2, a2, w2}, {a2, a2, b2, w2},
    };
  }();
  if (degree <= 1) return p1;
  if (degree == 2) return p2;
  return p4;
}

void add_triangle(QuadratureRule& rule, const Vec2& a, const Vec2& b, const Vec2& c, int refinements) {
  if (refinements > 0) {
    const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    add_triangle(rule, a, ab, ca, refinements - 1);
    add_triangle(rule, ab, b, bc, refinements - 1);
    add_triangle(rule, ca, bc, c, refinements - 1);
    add_triangle(rule, ab, bc, ca, refinements - 1);
    return;
  }
  const double area = std::abs(signed_area(a, b, c));
  for (const auto& q : reference_points(rule.degree)) {
    rule.points.push_back(q.l0 * a + q.l1 * b + q.l2 * c);
    rule.weights.push_back(q.w * area);
  }
}

}  // namespace

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void QuadratureRule::append(const QuadratureRule& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

QuadratureRule triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int degree, int refinements) {
  check_degree(degree);
  QuadratureRule rule;
  rule.degree = degree;
  add_triangle(rule, a, b, c, refinements);
  return rule;
}

QuadratureRule polygon_rule(std::span<const Vec2> polygon, int degree, int refinements) {
  check_degree(degree);
  if (polygon.size() < 3) throw Error(ErrorKind::invalid_argument, "polygon needs at least 3 vertices");
  QuadratureRule rule;
  rule.degree = degree;
  if (polygon.size() == 3) {
    add_triangle(rule, polygon[0], polygon[1], polygon[2], refinements);
    return rule;
  }
  const Vec2 c = vertex_mean(polygon);
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    add_triangle(rule, c, polygon[i], polygon[(i + 1) % polygon.size()], refinements);
  }
  return rule;
}

QuadratureRule segment_rule(const Vec2& a, const Vec2& b, int degree) {
  check_degree(degree);
  QuadratureRule rule;
  rule.degree = degree;
  const double len = (b - a).norm();
  const Vec2 mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto push = [&](double s, double w) {
    rule.points.push_back(mid + s * half);
    rule.weights.push_back(0.5 * len * w);
  };
  if (degree <= 1) {
    push(0.0, 2.0);
  } else if (degree <= 3) {
    const double s = 1.0 / std::sqrt(3.0);
    push(-s, 1.0);
    push(s, 1.0);
  } else {
    const double s = std::sqrt(0.6);
    push(-s, 5.0 / 9.0);
    push(0.0, 8.0 / 9.0);
    push(s, 5.0 / 9.0);
  }
  return rule;
}

}  // namespace cutflux
