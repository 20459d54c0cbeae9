#include <cmath>

#include "cutflux/cutgeom.hpp"
#include "cutflux/errors.hpp"
#include "cutflux/mesh.hpp"
#include "cutflux/quadrature.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cutflux;

namespace {

InterfacePolyline vertical(double x) { return InterfacePolyline({{x, -1.0}, {x, 2.0}}); }

}  // namespace

TEST_CASE("clip reference triangle at x = 0.4") {
  const CutCell c = clip_triangle({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, vertical(0.4));
  CHECK(c.area[0] == doctest::Approx(0.32).epsilon(1e-14));
  CHECK(c.area[1] == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(polygon_area(c.piece[0]) == doctest::Approx(0.32).epsilon(1e-14));
  CHECK(c.gamma.length() == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(c.fragment_length(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(c.fragment_length(0, 1) == doctest::Approx(0.6).epsilon(1e-14));
  // hypotenuse lies in phase 2 beyond x = 0.4 and in phase 1 before it
  CHECK(c.fragment_length(1, 0) + c.fragment_length(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.normal.isApprox(Vec2(1, 0)));
}

TEST_CASE("clip rejects uncut triangles") {
  try {
    clip_triangle({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, vertical(3.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::degenerate_cut || e.kind() == ErrorKind::unsupported_geometry));
  }
}

TEST_CASE("classification of the 2x2 grid") {
  const Mesh m = build_structured_mesh(2, 2);
  const CutTopology topo = classify(m, vertical(std::sqrt(2.0) / 2.0));
  CHECK(topo.cut_cells().size() == 4);
  // brute-force oracle: a triangle is cut iff its vertices straddle the line
  int straddling = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    double lo = 1e9, hi = -1e9;
    for (const Vec2& v : m.vertices(t)) {
      lo = std::min(lo, v.x() - std::sqrt(2.0) / 2.0);
      hi = std::max(hi, v.x() - std::sqrt(2.0) / 2.0);
    }
    const bool cut = lo < 0.0 && hi > 0.0;
    straddling += cut;
    CHECK(topo.triangle_cut(t) == cut);
    if (cut) CHECK((topo.triangle_in(0, t) && topo.triangle_in(1, t)));
  }
  CHECK(straddling == 4);
  for (const CutCell& c : topo.cut_cells()) {
    CHECK(c.total_area() == doctest::Approx(m.area(c.triangle)).epsilon(1e-14));
  }
}

TEST_CASE("interface outside the mesh") {
  const Mesh m = build_structured_mesh(3, 3);
  const CutTopology topo = classify(m, vertical(5.0));
  CHECK(topo.cut_cells().empty());
  CHECK(static_cast<int>(topo.triangles(0).size()) == m.num_triangles());
  CHECK(topo.triangles(1).empty());
}

TEST_CASE("mesh nodes on the interface are degenerate") {
  const Mesh m = build_structured_mesh(4, 4);
  CHECK_THROWS_AS(classify(m, vertical(0.5)), Error);
  try {
    classify(m, vertical(0.5));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_cut);
  }
}

TEST_CASE("tilted interface pieces tile the cells") {
  const Mesh m = build_structured_mesh(7, 7);
  // kink outside the domain; a kink inside a cell is rejected
  const CutTopology topo = classify(m, InterfacePolyline({{0.3, -0.2}, {0.8, 1.3}, {1.5, 1.4}}));
  REQUIRE(!topo.cut_cells().empty());
  double total = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topo.triangles(i)) total += topo.piece_area(t, i);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  for (int e = 0; e < m.num_edges(); ++e) {
    const double sum = topo.edge_fragment(e, 0).length() + topo.edge_fragment(e, 1).length();
    if (topo.edge_cut(e)) CHECK(sum == doctest::Approx(m.edge(e).length).epsilon(1e-13));
  }
  try {
    classify(m, InterfacePolyline({{0.3, -0.2}, {0.45, 0.5}, {0.8, 1.3}}));
    FAIL("expected unsupported-geometry");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_geometry);
  }
}

TEST_CASE("quadrature") {
  const Vec2 a(0, 0), b(1, 0), c(0, 1);
  CHECK(triangle_rule(a, b, c, 0).integrate([](const Vec2&) { return 1.0; }) == doctest::Approx(0.5));
  CHECK(triangle_rule(a, b, c, 2).integrate([](const Vec2& x) { return x.x() * x.x(); }) ==
        doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(segment_rule(Vec2(0, 0), Vec2(0.6, 0), 0).integrate([](const Vec2&) { return 1.0; }) ==
        doctest::Approx(0.6));
  for (int deg = 0; deg <= kMaxQuadratureDegree; ++deg) {
    for (int p = 0; p <= deg; ++p) {
      const int q = deg - p;
      const auto f = [&](const Vec2& x) { return std::pow(x.x(), p) * std::pow(x.y(), q); };
      CHECK(triangle_rule(a, b, c, deg).integrate(f) ==
            doctest::Approx(test::reference_monomial(p, q)).epsilon(1e-13));
      CHECK(triangle_rule(a, b, c, deg, 2).integrate(f) ==
            doctest::Approx(test::reference_monomial(p, q)).epsilon(1e-13));
    }
  }
  // unit square as a polygon: int x^2 y^2 = 1/9
  const std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polygon_rule(square, 4).integrate([](const Vec2& x) { return x.x() * x.x() * x.y() * x.y(); }) ==
        doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  // Gauss points: int_0^2 s^5 = 32/3 with the three-point rule (degree 4 request)
  CHECK(segment_rule(Vec2(0, 0), Vec2(0, 2), 4).integrate([](const Vec2& x) { return std::pow(x.y(), 5); }) ==
        doctest::Approx(32.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("interface weights") {
  const InterfaceWeights w = interface_weights(1.0, 3.0);
  CHECK(w.omega1 == doctest::Approx(0.75));
  CHECK(w.omega2 == doctest::Approx(0.25));
  CHECK(w.k_gamma == doctest::Approx(0.75));
  CHECK(w.k_max == 3.0);
  const InterfaceWeights s = interface_weights(2.5, 2.5);
  CHECK(s.omega1 == 0.5);
  CHECK(s.k_gamma == doctest::Approx(1.25));
  const InterfaceWeights big = interface_weights(1.0, 1e6);
  CHECK(big.k_gamma < 1.0);
  CHECK(big.omega1 == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(interface_weights(0.0, 1.0), Error);
}

TEST_CASE("interface text round trip") {
  const InterfacePolyline p({{0.1, 0.0}, {0.4, 0.6}, {0.2, 1.0}});
  std::stringstream ss;
  write_interface(p, ss);
  CHECK(read_interface(ss).vertices() == p.vertices());
  std::istringstream bad("interface 1\n0 0\n");
  CHECK_THROWS_AS(read_interface(bad), Error);
}
