#include "cutflux/cutfem.hpp"

#include <cmath>

#include "cutflux/errors.hpp"

namespace cutflux {

void ProblemData::validate() const {
  for (int i = 0; i < kNumPhases; ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) throw Error(ErrorKind::invalid_argument, "diffusivity must be positive", k[i]);
  }
  if (!(gamma >= 0.0)) throw Error(ErrorKind::invalid_argument, "negative Nitsche penalty", gamma);
  if (!(beta >= 0.0)) throw Error(ErrorKind::invalid_argument, "negative ghost penalty", beta);
}

DofMap::DofMap(const CutTopology& topology) {
  const Mesh& mesh = topology.mesh();
  for (int i = 0; i < kNumPhases; ++i) {
    // Zero trace on the part of the outer boundary seen by phase i: both
    // end points of every boundary edge in F_h^i.
    std::vector<char> fixed(mesh.num_nodes(), 0);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edge(e).boundary() && topology.edge_in(i, e)) fixed[mesh.edge(e).nodes[0]] = fixed[mesh.edge(e).nodes[1]] = 1;
    }
    dof_[i].assign(mesh.num_nodes(), -1);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      if (!topology.node_in(i, n) || fixed[n]) continue;
      dof_[i][n] = size();
      node_of_.push_back(n);
      phase_of_.push_back(i);
      ++count_[i];
    }
  }
}

DofMap build_dofmap(const CutTopology& topology) { return DofMap(topology); }

std::array<Vec2, 3> hat_gradients(const std::array<Vec2, 3>& v) {
  const double twice_area = cross(v[1] - v[0], v[2] - v[0]);
  std::array<Vec2, 3> g;
  // grad(phi_a) is the inward normal of the opposite edge scaled by its length.
  for (int a = 0; a < 3; ++a) {
    const Vec2 opposite = v[(a + 2) % 3] - v[(a + 1) % 3];
    g[a] = Vec2(-opposite.y(), opposite.x()) / twice_area;
  }
  return g;
}

PrimalField::PrimalField(const CutTopology& topology, DofMap dofmap, std::vector<double> coefficients)
    : topology_(&topology), dofmap_(std::move(dofmap)), coefficients_(std::move(coefficients)) {
  if (static_cast<int>(coefficients_.size()) != dofmap_.size()) {
    throw Error(ErrorKind::invalid_argument, "coefficient vector does not match the dof map");
  }
}

double PrimalField::nodal(int i, int node) const {
  const int d = dofmap_.dof(i, node);
  return d >= 0 ? coefficients_[d] : 0.0;
}

std::array<double, 3> PrimalField::cell_values(int i, int t) const {
  const auto& tri = topology_->mesh().triangle(t);
  return {nodal(i, tri[0]), nodal(i, tri[1]), nodal(i, tri[2])};
}

double PrimalField::value(int i, int t, const Vec2& x) const {
  const auto v = topology_->mesh().vertices(t);
  const Eigen::Vector3d lambda = barycentric(v[0], v[1], v[2], x);
  const auto c = cell_values(i, t);
  return lambda[0] * c[0] + lambda[1] * c[1] + lambda[2] * c[2];
}

Vec2 PrimalField::gradient(int i, int t) const {
  const auto g = hat_gradients(topology_->mesh().vertices(t));
  const auto c = cell_values(i, t);
  return c[0] * g[0] + c[1] * g[1] + c[2] * g[2];
}

namespace forms {

Eigen::Matrix3d volume(const CutTopology& topology, int t, int i, double k) {
  const auto g = hat_gradients(topology.mesh().vertices(t));
  const double scale = k * topology.piece_area(t, i);
  Eigen::Matrix3d m;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) m(a, b) = scale * g[a].dot(g[b]);
  }
  return m;
}

Eigen::Matrix<double, 6, 6> interface(const CutTopology& topology, const CutCell& cell, const ProblemData& data,
                                      double penalty_factor) {
  const int t = cell.triangle;
  const Mesh& mesh = topology.mesh();
  const auto g = hat_gradients(cell.vertices);
  const InterfaceWeights w = data.weights();
  const double h = mesh.diameter(t);
  const double penalty = penalty_factor * w.k_gamma / h;

  // Local basis A = (phase, vertex): jump [phi_A] = +-phi_a, flux mean
  // {k grad phi_A . n} = omega_i k_i grad phi_a . n (constant on Gamma_T).
  Eigen::Matrix<double, 6, 1> flux;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int a = 0; a < 3; ++a) flux(3 * i + a) = w.omega(i) * data.k[i] * g[a].dot(cell.normal);
  }
  const QuadratureRule rule = segment_rule(cell.gamma.a, cell.gamma.b, 2);
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::Vector3d lambda = barycentric(cell.vertices[0], cell.vertices[1], cell.vertices[2], rule.points[q]);
    Eigen::Matrix<double, 6, 1> jump;
    jump << lambda, -lambda;
    m += rule.weights[q] * (penalty * jump * jump.transpose() - flux * jump.transpose() - jump * flux.transpose());
  }
  return m;
}

Eigen::Matrix<double, 6, 6> ghost(const CutTopology& topology, int e, double k) {
  const Mesh& mesh = topology.mesh();
  const Edge& edge = mesh.edge(e);
  if (edge.boundary()) throw Error(ErrorKind::invalid_argument, "ghost penalty on a boundary edge");
  const auto gm = hat_gradients(mesh.vertices(edge.minus));
  const auto gp = hat_gradients(mesh.vertices(edge.plus));
  Eigen::Matrix<double, 6, 1> d;
  for (int a = 0; a < 3; ++a) {
    d(a) = gm[a].dot(edge.normal);
    d(3 + a) = -gp[a].dot(edge.normal);
  }
  const double h = edge.length;
  return (k * h * h) * d * d.transpose();
}

Eigen::Vector3d load(const CutTopology& topology, int t, int i, const ProblemData& data) {
  const auto v = topology.mesh().vertices(t);
  const QuadratureRule rule = topology.region_rule(t, i, kSourceQuadratureDegree);
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    b += rule.weights[q] * data.source(i, rule.points[q]) * barycentric(v[0], v[1], v[2], rule.points[q]);
  }
  return b;
}

}  // namespace forms

LinearSystem assemble_system(const CutTopology& topology, const DofMap& dofmap, const ProblemData& data) {
  data.validate();
  const Mesh& mesh = topology.mesh();
  std::vector<Triplet> triplets;
  std::vector<double> rhs(dofmap.size(), 0.0);

  auto scatter = [&](const auto& local, const auto& ids) {
    for (int a = 0; a < static_cast<int>(ids.size()); ++a) {
      if (ids[a] < 0) continue;
      for (int b = 0; b < static_cast<int>(ids.size()); ++b) {
        if (ids[b] >= 0 && local(a, b) != 0.0) triplets.push_back({ids[a], ids[b], local(a, b)});
      }
    }
  };

  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      const auto& tri = mesh.triangle(t);
      const std::array<int, 3> ids{dofmap.dof(i, tri[0]), dofmap.dof(i, tri[1]), dofmap.dof(i, tri[2])};
      scatter(forms::volume(topology, t, i, data.k[i]), ids);
      const Eigen::Vector3d b = forms::load(topology, t, i, data);
      for (int a = 0; a < 3; ++a) {
        if (ids[a] >= 0) rhs[ids[a]] += b[a];
      }
    }
    if (data.beta > 0.0) {
      for (int e : topology.ghost_edges(i)) {
        const Edge& edge = mesh.edge(e);
        const auto& tm = mesh.triangle(edge.minus);
        const auto& tp = mesh.triangle(edge.plus);
        std::array<int, 6> ids{};
        for (int a = 0; a < 3; ++a) {
          ids[a] = dofmap.dof(i, tm[a]);
          ids[3 + a] = dofmap.dof(i, tp[a]);
        }
        const Eigen::Matrix<double, 6, 6> g = data.beta * forms::ghost(topology, e, data.k[i]);
        scatter(g, ids);
      }
    }
  }
  for (const CutCell& cell : topology.cut_cells()) {
    const auto& tri = mesh.triangle(cell.triangle);
    std::array<int, 6> ids{};
    for (int i = 0; i < kNumPhases; ++i) {
      for (int a = 0; a < 3; ++a) ids[3 * i + a] = dofmap.dof(i, tri[a]);
    }
    scatter(forms::interface(topology, cell, data, data.gamma), ids);
  }
  return {assemble(triplets, dofmap.size(), true), std::move(rhs)};
}

PrimalField solve_primal(const CutTopology& topology, const ProblemData& data, double tol) {
  DofMap dofmap(topology);
  LinearSystem system = assemble_system(topology, dofmap, data);
  SolveReport rep = solve_spd(system.matrix, system.rhs, tol);
  PrimalField field(topology, std::move(dofmap), std::move(rep.x));
  field.solver_iterations = rep.iterations;
  field.solver_residual = rep.relative_residual;
  return field;
}

double energy_norm(const PrimalField& field, const ProblemData& data) {
  const CutTopology& topology = field.topology();
  const Mesh& mesh = topology.mesh();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      s += data.k[i] * topology.piece_area(t, i) * field.gradient(i, t).squaredNorm();
    }
    for (int e : topology.ghost_edges(i)) {
      const Edge& edge = mesh.edge(e);
      const double jump = (field.gradient(i, edge.minus) - field.gradient(i, edge.plus)).dot(edge.normal);
      s += data.k[i] * edge.length * edge.length * jump * jump;
    }
  }
  const InterfaceWeights w = data.weights();
  for (const CutCell& cell : topology.cut_cells()) {
    const QuadratureRule rule = segment_rule(cell.gamma.a, cell.gamma.b, 2);
    const double scale = w.k_gamma / mesh.diameter(cell.triangle);
    s += scale * rule.integrate([&](const Vec2& x) {
      const double j = field.jump(cell.triangle, x);
      return j * j;
    });
  }
  return std::sqrt(s);
}

double energy_error(const std::array<VectorFn, kNumPhases>& exact_gradient, const PrimalField& field,
                    const ProblemData& data, int refinements) {
  const CutTopology& topology = field.topology();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      const Vec2 gh = field.gradient(i, t);
      const QuadratureRule rule = topology.region_rule(t, i, kSourceQuadratureDegree, refinements);
      s += data.k[i] * rule.integrate([&](const Vec2& x) { return (exact_gradient[i](x) - gh).squaredNorm(); });
    }
  }
  return std::sqrt(s);
}

double l2_error(const std::array<ScalarFn, kNumPhases>& exact, const PrimalField& field, int refinements) {
  const CutTopology& topology = field.topology();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      const QuadratureRule rule = topology.region_rule(t, i, kSourceQuadratureDegree, refinements);
      s += rule.integrate([&](const Vec2& x) {
        const double d = exact[i](x) - field.value(i, t, x);
        return d * d;
      });
    }
  }
  return std::sqrt(s);
}

}  // namespace cutflux
