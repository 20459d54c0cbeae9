#include "cutflux/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

double relative(double value, double scale) { return scale > 0.0 ? value / scale : value; }

int endpoint_index(const Edge& edge, int node) { return edge.nodes[0] == node ? 0 : 1; }

// <k grad v . n_F> on edge e for phase i.
double mean_flux(const Mesh& mesh, int e, double k, const Vec2& grad_minus, const Vec2& grad_plus) {
  const Edge& edge = mesh.edge(e);
  if (edge.boundary()) return k * grad_minus.dot(edge.normal);
  return 0.5 * k * (grad_minus + grad_plus).dot(edge.normal);
}

}  // namespace

BrokenField BrokenField::zero(const Mesh& mesh) {
  BrokenField v;
  for (auto& phase : v.values) phase.assign(mesh.num_triangles(), {0.0, 0.0, 0.0});
  return v;
}

BrokenField BrokenField::from_primal(const PrimalField& field) {
  const Mesh& mesh = field.topology().mesh();
  BrokenField v = zero(mesh);
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : field.topology().triangles(i)) v.values[i][t] = field.cell_values(i, t);
  }
  return v;
}

BrokenField BrokenField::basis(const Mesh& mesh, int i, int t, int a) {
  BrokenField v = zero(mesh);
  v.values[i][t][a] = 1.0;
  return v;
}

Vec2 BrokenField::gradient(const Mesh& mesh, int i, int t) const {
  const auto g = hat_gradients(mesh.vertices(t));
  const auto& c = values[i][t];
  return c[0] * g[0] + c[1] * g[1] + c[2] * g[2];
}

double BrokenField::value(const Mesh& mesh, int i, int t, const Vec2& x) const {
  const auto v = mesh.vertices(t);
  const Eigen::Vector3d lambda = barycentric(v[0], v[1], v[2], x);
  const auto& c = values[i][t];
  return lambda[0] * c[0] + lambda[1] * c[1] + lambda[2] * c[2];
}

MultiplierField MultiplierField::zero(const Mesh& mesh) {
  MultiplierField mu;
  for (auto& phase : mu.values) phase.assign(mesh.num_edges(), {0.0, 0.0});
  return mu;
}

double MultiplierField::at(const Mesh& mesh, int i, int e, int node) const {
  return values[i][e][endpoint_index(mesh.edge(e), node)];
}

double edge_jump(const Mesh& mesh, const BrokenField& v, int i, int e, int node) {
  const Edge& edge = mesh.edge(e);
  const double minus = v.values[i][edge.minus][mesh.local_vertex(edge.minus, node)];
  if (edge.boundary()) return minus;
  return minus - v.values[i][edge.plus][mesh.local_vertex(edge.plus, node)];
}

bool constrained_node(const CutTopology& topology, int i, int node) {
  const Mesh& mesh = topology.mesh();
  if (!topology.node_in(i, node)) return false;
  for (int t : mesh.node_triangles(node)) {
    if (!topology.triangle_in(i, t)) return false;
  }
  for (int e : mesh.node_edges(node)) {
    if (!topology.edge_in(i, e)) return false;
  }
  return true;
}

double eval_b_h(const MultiplierField& mu, const BrokenField& v, const CutTopology& topology, const ProblemData& data) {
  const Mesh& mesh = topology.mesh();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int e : topology.edges(i)) {
      const Edge& edge = mesh.edge(e);
      double nodal = 0.0;
      for (int a = 0; a < 2; ++a) nodal += mu.values[i][e][a] * edge_jump(mesh, v, i, e, edge.nodes[a]);
      s += 0.5 * data.k[i] * edge.length * nodal;
    }
  }
  return s;
}

double eval_d_h(const BrokenField& u, const BrokenField& v, const CutTopology& topology, const ProblemData& data) {
  const Mesh& mesh = topology.mesh();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int e : topology.edges(i)) {
      const Edge& edge = mesh.edge(e);
      const Segment frag = topology.edge_fragment(e, i);
      const double len = frag.length();
      if (len == 0.0) continue;
      const int tp = edge.boundary() ? edge.minus : edge.plus;
      const double flux_u = mean_flux(mesh, e, data.k[i], u.gradient(mesh, i, edge.minus), u.gradient(mesh, i, tp));
      const double flux_v = mean_flux(mesh, e, data.k[i], v.gradient(mesh, i, edge.minus), v.gradient(mesh, i, tp));
      // Jumps are linear along the fragment: midpoint times length is exact.
      const Vec2 m = frag.midpoint();
      auto jump = [&](const BrokenField& w) {
        const double minus = w.value(mesh, i, edge.minus, m);
        return edge.boundary() ? minus : minus - w.value(mesh, i, edge.plus, m);
      };
      s += len * (flux_u * jump(v) + flux_v * jump(u));
    }
  }
  return s;
}

ResidualTable residual_table(const PrimalField& u, const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  ResidualTable table;
  std::array<std::vector<Eigen::Vector3d>, kNumPhases> gross;
  for (int i = 0; i < kNumPhases; ++i) {
    table.r[i].assign(mesh.num_triangles(), Eigen::Vector3d::Zero());
    gross[i].assign(mesh.num_triangles(), Eigen::Vector3d::Zero());
  }
  auto cell = [&](int i, int t) {
    const auto c = u.cell_values(i, t);
    return Eigen::Vector3d(c[0], c[1], c[2]);
  };
  auto add = [&](int i, int t, const Eigen::Vector3d& term) {
    table.r[i][t] += term;
    gross[i][t] += term.cwiseAbs();
  };

  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      add(i, t, forms::load(topology, t, i, data));
      add(i, t, -(forms::volume(topology, t, i, data.k[i]) * cell(i, t)));
    }
    if (data.beta > 0.0) {
      for (int e : topology.ghost_edges(i)) {
        const Edge& edge = mesh.edge(e);
        Eigen::Matrix<double, 6, 1> w;
        w << cell(i, edge.minus), cell(i, edge.plus);
        const Eigen::Matrix<double, 6, 1> g = data.beta * (forms::ghost(topology, e, data.k[i]) * w);
        add(i, edge.minus, -g.head<3>());
        add(i, edge.plus, -g.tail<3>());
      }
    }
    for (int e : topology.edges(i)) {
      const Edge& edge = mesh.edge(e);
      const Segment frag = topology.edge_fragment(e, i);
      if (frag.length() == 0.0) continue;
      const int tp = edge.boundary() ? edge.minus : edge.plus;
      const double flux = mean_flux(mesh, e, data.k[i], u.gradient(i, edge.minus), u.gradient(i, tp));
      const Vec2 m = frag.midpoint();
      for (int t : {edge.minus, edge.plus}) {
        if (t < 0) continue;
        const auto v = mesh.vertices(t);
        const Eigen::Vector3d phi = barycentric(v[0], v[1], v[2], m);
        add(i, t, (jump_sign(edge, t) * flux * frag.length()) * phi);
      }
    }
  }
  for (const CutCell& cc : topology.cut_cells()) {
    const int t = cc.triangle;
    Eigen::Matrix<double, 6, 1> w;
    w << cell(0, t), cell(1, t);
    const Eigen::Matrix<double, 6, 1> g = forms::interface(topology, cc, data, data.gamma) * w;
    add(0, t, -g.head<3>());
    add(1, t, -g.tail<3>());
  }
  for (int i = 0; i < kNumPhases; ++i) {
    for (const auto& g : gross[i]) table.gross = std::max(table.gross, g.maxCoeff());
  }
  return table;
}

double residual(const PrimalField& u, const BrokenField& v, const ProblemData& data) {
  const ResidualTable table = residual_table(u, data);
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : u.topology().triangles(i)) {
      for (int a = 0; a < 3; ++a) s += table.r[i][t][a] * v.values[i][t][a];
    }
  }
  return s;
}

PatchSolution solve_node_patch(int node, int i, const PrimalField& u, const ResidualTable& table,
                               const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  if (node < 0 || node >= mesh.num_nodes() || !topology.node_in(i, node)) {
    throw Error(ErrorKind::invalid_argument, "node " + std::to_string(node) + " is not in the fictitious domain");
  }
  PatchSolution p;
  p.node = node;
  p.phase = i;
  for (int e : mesh.node_edges(node)) {
    if (topology.edge_in(i, e)) p.edges.push_back(e);
  }
  const int nedges = static_cast<int>(p.edges.size());
  p.cols = 2 * nedges;

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int t : mesh.node_triangles(node)) {
    if (!topology.triangle_in(i, t)) continue;
    const auto& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(p.cols);
      for (int j = 0; j < nedges; ++j) {
        const int e = p.edges[j];
        if (mesh.local_edge(t, e) < 0) continue;
        const Edge& edge = mesh.edge(e);
        if (tri[a] != edge.nodes[0] && tri[a] != edge.nodes[1]) continue;
        row[2 * j + endpoint_index(edge, tri[a])] += 0.5 * data.k[i] * edge.length * jump_sign(edge, t);
      }
      const double b = tri[a] == node ? table.r[i][t][a] : 0.0;
      if (row.isZero() && b == 0.0) continue;
      rows.push_back(std::move(row));
      rhs.push_back(b);
    }
  }
  const int equations = static_cast<int>(rows.size());
  const bool constrained = constrained_node(topology, i, node);
  if (constrained) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(p.cols);
    for (int j = 0; j < nedges; ++j) {
      const Edge& edge = mesh.edge(p.edges[j]);
      row[2 * j + endpoint_index(edge, node)] = node_edge_sign(mesh, node, p.edges[j]) * edge.length;
    }
    rows.push_back(std::move(row));
    rhs.push_back(0.0);
  }
  p.rows = static_cast<int>(rows.size());

  Eigen::MatrixXd a(p.rows, p.cols);
  Eigen::VectorXd b(p.rows);
  Eigen::VectorXd scale(p.rows);
  for (int r = 0; r < p.rows; ++r) {
    const double m = rows[r].cwiseAbs().maxCoeff();
    scale[r] = m > 0.0 ? 1.0 / m : 1.0;
    a.row(r) = scale[r] * rows[r].transpose();
    b[r] = scale[r] * rhs[r];
  }
  p.theta.assign(nedges, {0.0, 0.0});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.cols);
  if (p.rows > 0 && p.cols > 0) {
    const DenseSolution sol = solve_dense(a, b, DenseMode::least_squares);
    x = sol.x;
    p.rank = sol.rank;
  }
  // Residual of the unscaled equation rows relative to the data scale, and
  // of the constraint relative to the size of its terms.
  double eq = 0.0, bnorm = 0.0;
  for (int r = 0; r < equations; ++r) {
    eq += std::pow(rows[r].dot(x) - rhs[r], 2);
    bnorm += rhs[r] * rhs[r];
  }
  p.residual = relative(std::sqrt(eq), std::sqrt(bnorm) + table.gross);
  if (constrained) {
    const Eigen::VectorXd& c = rows.back();
    p.residual = std::max(p.residual, relative(std::abs(c.dot(x)), c.cwiseProduct(x).cwiseAbs().sum()));
  }
  if (!(p.residual <= kPatchTolerance)) {
    throw Error(ErrorKind::inconsistent_patch,
                "patch of node " + std::to_string(node) + " phase " + std::to_string(i) + " has residual " +
                    std::to_string(p.residual),
                p.residual);
  }
  for (int j = 0; j < nedges; ++j) p.theta[j] = {x[2 * j], x[2 * j + 1]};
  return p;
}

MultiplierResult build_multiplier(const PrimalField& u, const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  const ResidualTable table = residual_table(u, data);
  MultiplierResult result;
  result.theta = MultiplierField::zero(mesh);
  for (int i = 0; i < kNumPhases; ++i) {
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      if (!topology.node_in(i, n)) continue;
      PatchSolution p = solve_node_patch(n, i, u, table, data);
      for (std::size_t j = 0; j < p.edges.size(); ++j) {
        for (int a = 0; a < 2; ++a) result.theta.values[i][p.edges[j]][a] += p.theta[j][a];
      }
      result.max_patch_residual = std::max(result.max_patch_residual, p.residual);
      p.theta.clear();
      result.patches.push_back(std::move(p));
    }
  }
  return result;
}

double multiplier_identity_defect(const MultiplierField& theta, const PrimalField& u, const ResidualTable& table,
                                  const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  double worst = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int t : topology.triangles(i)) {
      const auto& tri = mesh.triangle(t);
      for (int a = 0; a < 3; ++a) {
        double b = 0.0;
        for (int e : mesh.triangle_edges(t)) {
          if (!topology.edge_in(i, e)) continue;
          const Edge& edge = mesh.edge(e);
          if (tri[a] != edge.nodes[0] && tri[a] != edge.nodes[1]) continue;
          b += 0.5 * data.k[i] * edge.length * jump_sign(edge, t) * theta.at(mesh, i, e, tri[a]);
        }
        worst = std::max(worst, std::abs(b - table.r[i][t][a]));
      }
    }
  }
  return relative(worst, table.gross);
}

double constraint_residual(const MultiplierField& theta, const CutTopology& topology) {
  const Mesh& mesh = topology.mesh();
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      if (!constrained_node(topology, i, n)) continue;
      double s = 0.0;
      for (int e : mesh.node_edges(n)) {
        const double term = node_edge_sign(mesh, n, e) * mesh.edge(e).length * theta.at(mesh, i, e, n);
        s += term;
        scale = std::max(scale, std::abs(term));
      }
      worst = std::max(worst, std::abs(s));
    }
  }
  return relative(worst, scale);
}

double kernel_defect(const PrimalField& u, const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  const BrokenField v = BrokenField::from_primal(u);
  double worst = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int e : topology.edges(i)) {
      const Edge& edge = mesh.edge(e);
      for (int a = 0; a < 2; ++a) {
        worst = std::max(worst, std::abs(0.5 * data.k[i] * edge.length * edge_jump(mesh, v, i, e, edge.nodes[a])));
      }
    }
  }
  return worst;
}

double multiplier_norm(const MultiplierField& mu, const CutTopology& topology, const ProblemData& data) {
  const Mesh& mesh = topology.mesh();
  double s = 0.0;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int e : topology.edges(i)) {
      const double h = mesh.edge(e).length;
      const double p = mu.values[i][e][0], q = mu.values[i][e][1];
      s += data.k[i] * h * h * (p * p + p * q + q * q) / 3.0;
    }
  }
  return std::sqrt(s);
}

std::optional<double> verify_infsup_smoke(const CutTopology& topology, const ProblemData& data) {
  data.validate();
  const Mesh& mesh = topology.mesh();
  std::map<std::array<int, 3>, int> mid;  // (phase, edge, endpoint)
  std::map<std::array<int, 3>, int> did;  // (phase, triangle, vertex)
  for (int i = 0; i < kNumPhases; ++i) {
    for (int e : topology.edges(i)) {
      for (int a = 0; a < 2; ++a) mid.emplace(std::array<int, 3>{i, e, a}, static_cast<int>(mid.size()));
    }
    for (int t : topology.triangles(i)) {
      for (int a = 0; a < 3; ++a) did.emplace(std::array<int, 3>{i, t, a}, static_cast<int>(did.size()));
    }
  }
  const int nm = static_cast<int>(mid.size());
  const int nd = static_cast<int>(did.size());
  if (nm > kInfSupMaxDofs) return std::nullopt;

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nm, nd);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nm, nm);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nd, nd);
  for (int i = 0; i < kNumPhases; ++i) {
    const double k = data.k[i];
    for (int e : topology.edges(i)) {
      const Edge& edge = mesh.edge(e);
      const double h = edge.length;
      const int m0 = mid.at({i, e, 0}), m1 = mid.at({i, e, 1});
      const double c = k * h * h / 6.0;
      m(m0, m0) += 2 * c;
      m(m1, m1) += 2 * c;
      m(m0, m1) += c;
      m(m1, m0) += c;
      // Jump of v at the two end points as a combination of broken dofs.
      std::array<std::vector<std::pair<int, double>>, 2> jump;
      for (int a = 0; a < 2; ++a) {
        for (int t : {edge.minus, edge.plus}) {
          if (t < 0) continue;
          const int dof = did.at({i, t, mesh.local_vertex(t, edge.nodes[a])});
          jump[a].push_back({dof, static_cast<double>(jump_sign(edge, t))});
          b(a == 0 ? m0 : m1, dof) += 0.5 * k * h * jump_sign(edge, t);
        }
      }
      // int_F k / h [[v]]^2 with [[v]] linear along F.
      for (int a = 0; a < 2; ++a) {
        for (int c2 = 0; c2 < 2; ++c2) {
          const double w = (k / h) * h / 6.0 * (a == c2 ? 2.0 : 1.0);
          for (const auto& [p, sp] : jump[a]) {
            for (const auto& [q, sq] : jump[c2]) d(p, q) += w * sp * sq;
          }
        }
      }
    }
    for (int t : topology.triangles(i)) {
      const Eigen::Matrix3d vol = forms::volume(topology, t, i, k);
      for (int a = 0; a < 3; ++a) {
        for (int c2 = 0; c2 < 3; ++c2) d(did.at({i, t, a}), did.at({i, t, c2})) += vol(a, c2);
      }
    }
    for (int e : topology.ghost_edges(i)) {
      const Edge& edge = mesh.edge(e);
      const Eigen::Matrix<double, 6, 6> g = forms::ghost(topology, e, k);
      std::array<int, 6> ids{};
      for (int a = 0; a < 3; ++a) {
        ids[a] = did.at({i, edge.minus, a});
        ids[3 + a] = did.at({i, edge.plus, a});
      }
      for (int a = 0; a < 6; ++a) {
        for (int c2 = 0; c2 < 6; ++c2) d(ids[a], ids[c2]) += g(a, c2);
      }
    }
  }
  const InterfaceWeights w = data.weights();
  for (const CutCell& cc : topology.cut_cells()) {
    const int t = cc.triangle;
    const double scale = w.k_gamma / mesh.diameter(t);
    const QuadratureRule rule = segment_rule(cc.gamma.a, cc.gamma.b, 2);
    std::array<int, 6> ids{};
    for (int i = 0; i < kNumPhases; ++i) {
      for (int a = 0; a < 3; ++a) ids[3 * i + a] = did.at({i, t, a});
    }
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector3d lambda = barycentric(cc.vertices[0], cc.vertices[1], cc.vertices[2], rule.points[q]);
      Eigen::Matrix<double, 6, 1> j;
      j << lambda, -lambda;
      const Eigen::Matrix<double, 6, 6> local = rule.weights[q] * scale * j * j.transpose();
      for (int a = 0; a < 6; ++a) {
        for (int c2 = 0; c2 < 6; ++c2) d(ids[a], ids[c2]) += local(a, c2);
      }
    }
  }

  // Null space of the M_h sign constraints.
  std::vector<Eigen::VectorXd> constraints;
  for (int i = 0; i < kNumPhases; ++i) {
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      if (!constrained_node(topology, i, n)) continue;
      Eigen::VectorXd c = Eigen::VectorXd::Zero(nm);
      for (int e : mesh.node_edges(n)) {
        c[mid.at({i, e, endpoint_index(mesh.edge(e), n)})] = node_edge_sign(mesh, n, e) * mesh.edge(e).length;
      }
      constraints.push_back(std::move(c));
    }
  }
  const int nc = static_cast<int>(constraints.size());
  Eigen::MatrixXd z;
  if (nc == 0) {
    z = Eigen::MatrixXd::Identity(nm, nm);
  } else {
    Eigen::MatrixXd ct(nm, nc);
    for (int c = 0; c < nc; ++c) ct.col(c) = constraints[c];
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(ct);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(nm, nm);
    z = q.rightCols(nm - nc);
  }
  const Eigen::LLT<Eigen::MatrixXd> dllt(d);
  if (dllt.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "broken-space norm matrix is not definite");
  const Eigen::MatrixXd bz = b.transpose() * z;
  const Eigen::MatrixXd s = bz.transpose() * dllt.solve(bz);
  const Eigen::MatrixXd mz = z.transpose() * m * z;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()),
                                                                    0.5 * (mz + mz.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "generalized eigenproblem failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

void write_patch_csv(const std::vector<PatchSolution>& patches, std::ostream& out) {
  out << "node,phase,rows,cols,rank,residual\n";
  out.precision(17);
  for (const auto& p : patches) {
    out << p.node << ',' << p.phase + 1 << ',' << p.rows << ',' << p.cols << ',' << p.rank << ',' << p.residual << '\n';
  }
}

}  // namespace cutflux
