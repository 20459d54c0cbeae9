#include <Eigen/Eigenvalues>
#include <set>

#include "cutflux/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cutflux;
using test::Solved;

TEST_CASE("dof map of the 4x4 grid with a vertical interface") {
  const Mesh m = build_structured_mesh(4, 4);
  const CutTopology topo = classify(m, InterfacePolyline({{std::sqrt(0.5), 0.0}, {std::sqrt(0.5), 1.0}}));
  const DofMap dm(topo);
  // Omega_h^1 spans x <= 0.75, Omega_h^2 spans x >= 0.5; count interior grid
  // nodes of each by enumeration.
  int expected = 0;
  for (int a = 1; a < 4; ++a) {
    for (int b = 1; b < 4; ++b) {
      const double x = 0.25 * a;
      expected += (x <= 0.75) + (x >= 0.5);
    }
  }
  CHECK(expected == 15);
  CHECK(dm.size() == expected);
  std::set<std::pair<int, int>> seen;
  for (int d = 0; d < dm.size(); ++d) {
    CHECK(dm.dof(dm.phase_of(d), dm.node_of(d)) == d);
    seen.insert({dm.node_of(d), dm.phase_of(d)});
  }
  CHECK(static_cast<int>(seen.size()) == dm.size());
}

TEST_CASE("dof map without an interface") {
  const Mesh m = build_structured_mesh(5, 5);
  const CutTopology topo = classify(m, InterfacePolyline({{-1.0, -1.0}, {-1.0, 2.0}}));
  const DofMap dm(topo);
  CHECK(dm.num_dofs(1) == 16);
  CHECK(dm.num_dofs(0) == 0);
}

TEST_CASE("assembled system") {
  const Mesh m = build_structured_mesh(2, 2);
  const ManufacturedCase mc = manufactured("M1");
  const CutTopology topo = classify(m, mc.interface());
  const DofMap dm(topo);
  ProblemData data = mc.problem(10.0, 0.1);
  const LinearSystem sys = assemble_system(topo, dm, data);
  CHECK(sys.matrix.max_asymmetry() <= 1e-12 * sys.matrix.max_abs());
  const Eigen::MatrixXd a = sys.matrix.to_dense();
  REQUIRE(a.rows() <= 30);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues()(0) > 0.0);

  data.f = {};
  const LinearSystem zero = assemble_system(topo, dm, data);
  CHECK(std::all_of(zero.rhs.begin(), zero.rhs.end(), [](double v) { return v == 0.0; }));
  const PrimalField u = solve_primal(topo, data);
  for (double c : u.coefficients()) CHECK(c == 0.0);
}

TEST_CASE("default penalties are coercive on sliver cuts") {
  // slivers of relative width 1e-6 on either side, both contrast directions
  for (double k2 : {1e-3, 1.0, 1e3}) {
    for (double offset : {1e-6, 1.0 - 1e-6}) {
      const Mesh m = build_structured_mesh(8, 8);
      const ManufacturedCase mc = manufactured_family(1.0, k2, 0.5 + offset / 8.0, 0.0);
      const CutTopology topo = classify(m, mc.interface());
      const DofMap dm(topo);
      const Eigen::MatrixXd a = assemble_system(topo, dm, mc.problem()).matrix.to_dense();
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues()(0) > 0.0);
    }
  }
}

TEST_CASE("Galerkin consistency") {
  const Solved s(8);
  const LinearSystem sys = assemble_system(*s.topology, s.u->dofmap(), s.data);
  const std::vector<double> au = sys.matrix * std::span<const double>(s.u->coefficients());
  double res = 0.0, scale = 0.0;
  for (std::size_t d = 0; d < au.size(); ++d) {
    res = std::max(res, std::abs(au[d] - sys.rhs[d]));
    scale = std::max(scale, std::abs(sys.rhs[d]));
  }
  CHECK(res <= 1e-9 * scale);
}

TEST_CASE("energy norm") {
  const Solved s(8);
  const DofMap& dm = s.u->dofmap();
  CHECK(energy_norm(PrimalField(*s.topology, dm, std::vector<double>(dm.size(), 0.0)), s.data) == 0.0);

  std::vector<double> scaled = s.u->coefficients();
  for (double& c : scaled) c *= -3.0;
  CHECK(energy_norm(PrimalField(*s.topology, dm, scaled), s.data) ==
        doctest::Approx(3.0 * energy_norm(*s.u, s.data)).epsilon(1e-13));

  // hat function of node (0.25, 0.5), far from the interface: on the
  // diagonal-split grid its Dirichlet energy is 4 (five-point stencil)
  const Mesh& m = s.mesh;
  int node = -1;
  for (int n = 0; n < m.num_nodes(); ++n) {
    if ((m.node(n) - Vec2(0.25, 0.5)).norm() < 1e-12) node = n;
  }
  REQUIRE(node >= 0);
  std::vector<double> hat(dm.size(), 0.0);
  hat[dm.dof(0, node)] = 1.0;
  const double norm = energy_norm(PrimalField(*s.topology, dm, hat), s.data);
  CHECK(norm * norm == doctest::Approx(4.0 * s.data.k[0]).epsilon(1e-13));
}

TEST_CASE("energy error against an overkill recomputation") {
  const Solved s(8);
  const double e = energy_error(s.mc.gradient, *s.u, s.data);
  double sum = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : s.topology->triangles(i)) {
      const Vec2 g = s.u->gradient(i, t);
      sum += s.topology->region_rule(t, i, 4, 4).integrate(
          [&](const Vec2& x) { return s.data.k[i] * (s.mc.gradient[i](x) - g).squaredNorm(); });
    }
  }
  CHECK(e == doctest::Approx(std::sqrt(sum)).epsilon(1e-6));
}

TEST_CASE("energy error decreases at first order") {
  std::vector<double> errors;
  for (int nx : {8, 16, 32, 64}) {
    const Solved s(nx);
    errors.push_back(energy_error(s.mc.gradient, *s.u, s.data));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) CHECK(errors[k] < errors[k - 1]);
  const double ratio = errors[0] / errors[1];
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("problem data validation") {
  ProblemData d;
  d.k = {1.0, -1.0};
  CHECK_THROWS_AS(d.validate(), Error);
}
