#include <random>

#include "cutflux/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cutflux;
using test::Solved;

namespace {

MultiplierField random_multiplier(const Mesh& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  MultiplierField mu = MultiplierField::zero(mesh);
  for (int i = 0; i < kNumPhases; ++i) {
    for (auto& e : mu.values[i]) e = {d(rng), d(rng)};
  }
  return mu;
}

BrokenField random_broken(const Mesh& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  BrokenField v = BrokenField::zero(mesh);
  for (int i = 0; i < kNumPhases; ++i) {
    for (auto& t : v.values[i]) t = {d(rng), d(rng), d(rng)};
  }
  return v;
}

// Continuous hat of `node` in phase i, restricted to T_h^i.
BrokenField hat(const CutTopology& topo, int i, int node) {
  const Mesh& mesh = topo.mesh();
  BrokenField v = BrokenField::zero(mesh);
  for (int t : mesh.node_triangles(node)) {
    if (topo.triangle_in(i, t)) v.values[i][t][mesh.local_vertex(t, node)] = 1.0;
  }
  return v;
}

}  // namespace

TEST_CASE("b_h vanishes on continuous fields") {
  const Solved s(6);
  std::mt19937 rng(3);
  const BrokenField u = BrokenField::from_primal(*s.u);
  for (int k = 0; k < 5; ++k) {
    CHECK(std::abs(eval_b_h(random_multiplier(s.mesh, rng), u, *s.topology, s.data)) < 1e-14);
  }
  CHECK(kernel_defect(*s.u, s.data) == 0.0);
}

TEST_CASE("b_h on a single edge") {
  const Solved s(6, "M1", 2.0, 10.0);
  // an uncut interior edge of phase 1
  int edge = -1;
  for (int e : s.topology->edges(0)) {
    const Edge& E = s.mesh.edge(e);
    if (!E.boundary() && !s.topology->edge_cut(e) && !s.topology->triangle_cut(E.minus) &&
        !s.topology->triangle_cut(E.plus)) {
      edge = e;
      break;
    }
  }
  REQUIRE(edge >= 0);
  const Edge& E = s.mesh.edge(edge);
  MultiplierField mu = MultiplierField::zero(s.mesh);
  mu.values[0][edge] = {1.0, 1.0};
  BrokenField v = BrokenField::zero(s.mesh);
  v.values[0][E.minus] = {1.0, 1.0, 1.0};
  CHECK(eval_b_h(mu, v, *s.topology, s.data) == doctest::Approx(2.0 * E.length).epsilon(1e-14));
}

TEST_CASE("d_h") {
  const Solved s(5);
  std::mt19937 rng(5);
  const BrokenField u = BrokenField::from_primal(*s.u);
  CHECK(std::abs(eval_d_h(u, u, *s.topology, s.data)) < 1e-14);
  const BrokenField a = random_broken(s.mesh, rng), b = random_broken(s.mesh, rng);
  CHECK(eval_d_h(a, b, *s.topology, s.data) == doctest::Approx(eval_d_h(b, a, *s.topology, s.data)).epsilon(1e-13));

  // one interior edge of the 1x1 square, single phase, k = 3
  const Mesh m = build_structured_mesh(1, 1);
  const CutTopology topo = classify(m, InterfacePolyline({{5.0, -1.0}, {5.0, 2.0}}));
  ProblemData data;
  data.k = {3.0, 1.0};
  int e = 0;
  while (m.edge(e).boundary()) ++e;
  const Edge& E = m.edge(e);
  // u = x on T-, 2y on T+;  v = y on T-, 0 on T+
  BrokenField uf = BrokenField::zero(m), vf = BrokenField::zero(m);
  for (int a = 0; a < 3; ++a) {
    uf.values[0][E.minus][a] = m.vertices(E.minus)[a].x();
    uf.values[0][E.plus][a] = 2.0 * m.vertices(E.plus)[a].y();
    vf.values[0][E.minus][a] = m.vertices(E.minus)[a].y();
  }
  // closed form: int_F <k grad u . n> [[v]] + <k grad v . n> [[u]]; both
  // jumps are linear along F, so endpoint averages times |F| are exact
  const Vec2 p = m.node(E.nodes[0]), q = m.node(E.nodes[1]);
  const double flux_u = 0.5 * 3.0 * (Vec2(1, 0) + Vec2(0, 2)).dot(E.normal);
  const double flux_v = 0.5 * 3.0 * Vec2(0, 1).dot(E.normal);
  const double jump_v = 0.5 * (p.y() + q.y()) * E.length;
  const double jump_u = 0.5 * ((p.x() - 2 * p.y()) + (q.x() - 2 * q.y())) * E.length;
  const double expected = flux_u * jump_v + flux_v * jump_u;
  CHECK(eval_d_h(uf, vf, topo, data) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("residual of conforming tests") {
  const Solved s(8);
  const ResidualTable table = residual_table(*s.u, s.data);
  for (int i = 0; i < kNumPhases; ++i) {
    for (int n = 0; n < s.mesh.num_nodes(); ++n) {
      if (s.u->dofmap().dof(i, n) < 0) continue;
      CHECK(std::abs(residual(*s.u, hat(*s.topology, i, n), s.data)) <= 1e-9 * table.gross);
    }
  }
  const Solved zero(4, "M0");
  CHECK(residual(*zero.u, BrokenField::basis(zero.mesh, 0, 3, 1), zero.data) == 0.0);
}

TEST_CASE("vertex residuals sum to the cell balance") {
  const Solved s(8);
  const ResidualTable table = residual_table(*s.u, s.data);
  const InterfaceWeights w = s.data.weights();
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : s.topology->triangles(i)) {
      // r(chi_T^i) = int_{T^i} f - a_Gamma(u, chi) + sum_F jump_sign <k grad u . n> |F cap Omega^i|
      double balance = s.topology->region_rule(t, i, kSourceQuadratureDegree).integrate([&](const Vec2& x) {
        return s.data.source(i, x);
      });
      if (const CutCell* c = s.topology->cut_cell(t)) {
        const double side = i == 0 ? 1.0 : -1.0;  // [chi] = +-1
        const double h = s.mesh.diameter(t);
        const double mean_flux = w.omega1 * s.data.k[0] * s.u->gradient(0, t).dot(c->normal) +
                                 w.omega2 * s.data.k[1] * s.u->gradient(1, t).dot(c->normal);
        balance -= segment_rule(c->gamma.a, c->gamma.b, 3).integrate([&](const Vec2& x) {
          return side * (s.data.gamma * w.k_gamma / h * s.u->jump(t, x) - mean_flux);
        });
      }
      for (int e : s.mesh.triangle_edges(t)) {
        if (!s.topology->edge_in(i, e)) continue;
        const Edge& E = s.mesh.edge(e);
        const int other = E.boundary() ? E.minus : E.plus;
        const double flux =
            0.5 * s.data.k[i] * (s.u->gradient(i, E.minus) + s.u->gradient(i, other)).dot(E.normal);
        balance += jump_sign(E, t) * flux * s.topology->edge_fragment(e, i).length();
      }
      CHECK(std::abs(table.r[i][t].sum() - balance) <= 1e-9 * table.gross);
    }
  }
}

TEST_CASE("node patches") {
  const Solved zero(6, "M0");
  const ResidualTable zt = residual_table(*zero.u, zero.data);
  for (int n = 0; n < zero.mesh.num_nodes(); n += 5) {
    for (int i = 0; i < kNumPhases; ++i) {
      if (!zero.topology->node_in(i, n)) continue;
      const PatchSolution p = solve_node_patch(n, i, *zero.u, zt, zero.data);
      for (const auto& th : p.theta) CHECK((th[0] == 0.0 && th[1] == 0.0));
    }
  }

  const Solved s(8);
  const ResidualTable table = residual_table(*s.u, s.data);
  int node = -1;
  for (int n = 0; n < s.mesh.num_nodes(); ++n) {
    if ((s.mesh.node(n) - Vec2(0.25, 0.5)).norm() < 1e-12) node = n;
  }
  const PatchSolution p = solve_node_patch(node, 0, *s.u, table, s.data);
  CHECK(p.cols == 12);
  CHECK(p.rows == 18 + 1);
  CHECK(p.rank <= 12);
  CHECK(p.residual <= kPatchTolerance);
}

TEST_CASE("global multiplier identity, exhaustively") {
  for (const char* id : {"M1", "M2"}) {
    const Solved s(8, id);
    const MultiplierResult mult = build_multiplier(*s.u, s.data);
    const ResidualTable table = residual_table(*s.u, s.data);
    double worst = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      for (int t : s.topology->triangles(i)) {
        for (int a = 0; a < 3; ++a) {
          const BrokenField v = BrokenField::basis(s.mesh, i, t, a);
          worst = std::max(worst, std::abs(eval_b_h(mult.theta, v, *s.topology, s.data) - residual(*s.u, v, s.data)));
        }
      }
    }
    CHECK(worst / table.gross <= 1e-8);
    CHECK(multiplier_identity_defect(mult.theta, *s.u, table, s.data) <= 1e-8);
    CHECK(constraint_residual(mult.theta, *s.topology) <= 1e-9);

    // constraint at every constrained node, recomputed from the edge values
    for (int i = 0; i < kNumPhases; ++i) {
      for (int n = 0; n < s.mesh.num_nodes(); ++n) {
        if (!constrained_node(*s.topology, i, n)) continue;
        double sum = 0.0, scale = 0.0;
        for (int e : s.mesh.node_edges(n)) {
          const double v = node_edge_sign(s.mesh, n, e) * s.mesh.edge(e).length * mult.theta.at(s.mesh, i, e, n);
          sum += v;
          scale = std::max(scale, std::abs(v));
        }
        CHECK(std::abs(sum) <= 1e-9 * std::max(scale, 1e-300));
      }
    }
  }
}

TEST_CASE("zero data gives a zero multiplier") {
  const Solved s(6, "M0");
  const MultiplierResult mult = build_multiplier(*s.u, s.data);
  CHECK(multiplier_norm(mult.theta, *s.topology, s.data) == 0.0);
}

TEST_CASE("inf-sup smoke test") {
  std::vector<double> per_mesh, per_contrast;
  for (int nx : {4, 8}) {
    const Solved s(nx, "M1", 1.0, 1.0);
    const auto beta = verify_infsup_smoke(*s.topology, s.data);
    REQUIRE(beta.has_value());
    CHECK(*beta > 0.0);
    per_mesh.push_back(*beta);
  }
  CHECK(std::max(per_mesh[0], per_mesh[1]) <= 2.0 * std::min(per_mesh[0], per_mesh[1]));
  for (double k2 : {1e-3, 1.0, 1e3}) {
    const Solved s(4, "M1", 1.0, k2);
    per_contrast.push_back(*verify_infsup_smoke(*s.topology, s.data));
  }
  const auto [lo, hi] = std::minmax_element(per_contrast.begin(), per_contrast.end());
  CHECK(*hi <= 3.0 * *lo);
}
