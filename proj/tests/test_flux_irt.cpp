#include "cutflux/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cutflux;
using test::Solved;

namespace {

// Classical RT0 basis dual to the mean outward flux (1/h_l) int_{F_l} psi . nu
// over local edge l (vertices l, l+1): psi_l = h_l / (2|T|) (x - v_{l+2}).
Vec2 classical_rt0(const std::array<Vec2, 3>& v, int l, const Vec2& x) {
  const double area = signed_area(v[0], v[1], v[2]);
  const double h = (v[(l + 1) % 3] - v[l]).norm();
  return h / (2.0 * area) * (x - v[(l + 2) % 3]);
}

double source_norm(const Solved& s) {
  double sum = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : s.topology->triangles(i)) {
      sum += s.topology->region_rule(t, i, 4).integrate([&](const Vec2& x) { return std::pow(s.data.source(i, x), 2); });
    }
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("equal coefficients give the standard RT0 basis") {
  const Mesh m = build_structured_mesh(6, 6);
  const CutTopology topo = classify(m, InterfacePolyline({{0.31, -0.1}, {0.77, 1.1}}));
  for (const CutCell& cell : topo.cut_cells()) {
    const IRTLocalBasis basis = irt_local_basis(cell, 3.0, 3.0);
    for (int l = 0; l < 3; ++l) {
      for (int i = 0; i < kNumPhases; ++i) {
        for (const Vec2& x : cell.piece[i]) {
          CHECK((basis.value(l, i, x) - classical_rt0(cell.vertices, l, x)).norm() <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("IRT basis duality and interface conditions") {
  for (double k2 : {1e-3, 1.0, 10.0, 1e3}) {
    const Mesh m = build_structured_mesh(8, 8);
    const CutTopology topo = classify(m, manufactured("M2").interface());
    const InterfaceWeights w = interface_weights(1.0, k2);
    for (const CutCell& cell : topo.cut_cells()) {
      const IRTLocalBasis basis = irt_local_basis(cell, 1.0, k2);
      double scale = 0.0;
      for (int l = 0; l < 3; ++l) {
        for (int i = 0; i < kNumPhases; ++i) {
          for (const Vec2& x : cell.piece[i]) scale = std::max(scale, basis.value(l, i, x).norm());
        }
      }
      for (int l = 0; l < 3; ++l) {
        for (int j = 0; j < 3; ++j) {
          const Vec2 a = cell.vertices[j], b = cell.vertices[(j + 1) % 3];
          const Vec2 nu = rotate_cw(b - a) / (b - a).norm();
          double flux = 0.0;
          for (int i = 0; i < kNumPhases; ++i) {
            const Segment f = cell.fragment[j][i];
            if (f.length() == 0.0) continue;
            flux += segment_rule(f.a, f.b, 1).integrate([&](const Vec2& x) { return basis.value(l, i, x).dot(nu); });
          }
          CHECK(std::abs(flux / (b - a).norm() - (l == j ? 1.0 : 0.0)) <= 1e-10);
        }
        // normal continuity everywhere on Gamma_T, weighted tangential
        // continuity at its midpoint, and matching divergence
        for (double s : {0.0, 0.5, 1.0}) {
          const Vec2 x = cell.gamma.a + s * (cell.gamma.b - cell.gamma.a);
          CHECK(std::abs((basis.value(l, 0, x) - basis.value(l, 1, x)).dot(cell.normal)) <= 1e-10 * scale);
        }
        const Vec2 mid = cell.gamma.midpoint();
        CHECK(std::abs(w.omega1 * basis.value(l, 0, mid).dot(cell.tangent) -
                       w.omega2 * basis.value(l, 1, mid).dot(cell.tangent)) <= 1e-10 * scale);
        CHECK(std::abs(basis.coef[l][0](2) - basis.coef[l][1](2)) <= 1e-10 * scale);
      }
    }
  }
}

TEST_CASE("reference triangle cut at x = 0.4") {
  const CutCell cell = clip_triangle({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, InterfacePolyline({{0.4, -1.0}, {0.4, 2.0}}));
  const IRTLocalBasis basis = irt_local_basis(cell, 1.0, 10.0);
  CHECK(basis.constraint_residual <= 1e-12);
  CHECK(basis.condition < kIRTConditionLimit);
  const Eigen::Matrix<double, 6, 6> a = irt_constraint_matrix(cell, basis.frame, 1.0, 10.0);
  for (int l = 0; l < 3; ++l) {
    Eigen::Matrix<double, 6, 1> x;
    x << basis.coef[l][0], basis.coef[l][1];
    Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
    e(l) = 1.0;
    CHECK((a * x - e).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero data gives a zero IRT flux") {
  const Solved s(6, "M0");
  const MultiplierResult mult = build_multiplier(*s.u, s.data);
  const GlobalIRTFlux sigma = reconstruct_irt(*s.u, mult.theta, s.data);
  for (double f : sigma.edge_flux) CHECK(f == 0.0);
  CHECK(conservation_audit_irt(sigma, s.data).max <= 1e-12);
}

TEST_CASE("IRT edge fluxes on uncut edges") {
  const Solved s(8, "M1", 1.0, 1.0);
  const MultiplierResult mult = build_multiplier(*s.u, s.data);
  const GlobalIRTFlux sigma = reconstruct_irt(*s.u, mult.theta, s.data);
  for (int e = 0; e < s.mesh.num_edges(); ++e) {
    const Edge& E = s.mesh.edge(e);
    if (E.boundary() || s.topology->edge_cut(e) || s.topology->triangle_cut(E.minus) ||
        s.topology->triangle_cut(E.plus)) {
      continue;
    }
    const int i = s.topology->triangle_phase(E.minus);
    const double k = s.data.k[i];
    const double expected = E.length * 0.5 * k * (s.u->gradient(i, E.minus) + s.u->gradient(i, E.plus)).dot(E.normal) -
                            k * E.length * mult.theta.mean(i, e);
    CHECK(sigma.edge_flux[e] == doctest::Approx(expected).epsilon(1e-12));
    // the RT0 field on either side carries that flux
    const Vec2 mid = 0.5 * (s.mesh.node(E.nodes[0]) + s.mesh.node(E.nodes[1]));
    for (int t : {E.minus, E.plus}) {
      CHECK(sigma.value(t, i, mid).dot(E.normal) * E.length == doctest::Approx(sigma.edge_flux[e]).epsilon(1e-10));
    }
  }
}

TEST_CASE("IRT conservation") {
  // piecewise constant data on a tilted interface: pi_T^0 f is exact
  {
    CaseConfig c;
    c.case_id = "const";
    c.f1 = c.f2 = 1.0;
    c.slope = 0.23;
    c.nx = c.ny = 9;
    const CaseResult r = run_case(c);
    CHECK(r.conservation <= 1e-8);
  }
  for (int nx : {8, 16, 32}) {
    const Solved s(nx);
    const double fnorm = source_norm(s);
    const MultiplierResult mult = build_multiplier(*s.u, s.data);
    const GlobalIRTFlux sigma = reconstruct_irt(*s.u, mult.theta, s.data);
    CHECK(conservation_audit_irt(sigma, s.data).max <= 1e-8 * fnorm);
    // divergence theorem on every cell: sum of outward edge fluxes balances int_T f
    for (int t = 0; t < s.mesh.num_triangles(); ++t) {
      double out = 0.0;
      for (int j = 0; j < 3; ++j) out += s.mesh.edge_orientation(t, j) * sigma.edge_flux[s.mesh.triangle_edges(t)[j]];
      double load = 0.0;
      for (int i = 0; i < kNumPhases; ++i) {
        if (s.topology->triangle_in(i, t)) {
          load += s.topology->region_rule(t, i, 4).integrate([&](const Vec2& x) { return s.data.source(i, x); });
        }
      }
      CHECK(std::abs(out + load) / s.mesh.area(t) <= 1e-8 * fnorm);
    }
  }
}

TEST_CASE("IRT transmission across contrasts") {
  for (double k2 : {1e-3, 1.0, 1e3}) {
    const Solved s(12, "M2", 1.0, k2);
    const MultiplierResult mult = build_multiplier(*s.u, s.data);
    const GlobalIRTFlux sigma = reconstruct_irt(*s.u, mult.theta, s.data);
    const TransmissionAudit a = transmission_audit(sigma);
    CHECK(a.flux_scale > 0.0);
    CHECK(a.interface_jump <= 1e-10 * a.flux_scale);
    CHECK(a.edge_violation <= 1e-10 * a.flux_scale);
    // independent sampling of the normal jump
    for (int t : s.topology->cut_triangles()) {
      const CutCell& c = *s.topology->cut_cell(t);
      for (double q : {0.1, 0.37, 0.9}) {
        const Vec2 x = c.gamma.a + q * (c.gamma.b - c.gamma.a);
        CHECK(std::abs((sigma.value(t, 0, x) - sigma.value(t, 1, x)).dot(c.normal)) <= 1e-10 * a.flux_scale);
      }
    }
  }
}
