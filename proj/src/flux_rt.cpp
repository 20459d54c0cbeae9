#include "cutflux/flux_rt.hpp"

#include <cmath>
#include <ostream>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

// Legendre parameter s in [-1, 1] of x on the edge, from nodes[0] to nodes[1].
double edge_parameter(const Mesh& mesh, const Edge& edge, const Vec2& x) {
  const Vec2& a = mesh.node(edge.nodes[0]);
  const Vec2 d = mesh.node(edge.nodes[1]) - a;
  return 2.0 * (x - a).dot(d) / d.squaredNorm() - 1.0;
}

bool two_sided(const CutTopology& topology, int i, const Edge& edge) {
  return !edge.boundary() && topology.triangle_in(i, edge.minus) && topology.triangle_in(i, edge.plus);
}

// Basis {1, xi_1, xi_2} truncated to the degree.
Eigen::VectorXd monomials(int degree, const RTFrame& frame, const Vec2& x) {
  Eigen::VectorXd p(degree == 0 ? 1 : 3);
  p[0] = 1.0;
  if (degree > 0) p.tail<2>() = frame.local(x);
  return p;
}

// L2 projection onto P^m(T) of the source seen by phase i (extended on cut cells).
LocalPolynomial project_source(int t, int i, const CutTopology& topology, const ExtendedSource& f_ext,
                               const ProblemData& data) {
  const Mesh& mesh = topology.mesh();
  const int m = f_ext.degree;
  const RTFrame frame = RTFrame::of(mesh, t);
  const int n = m == 0 ? 1 : 3;
  const auto v = mesh.vertices(t);
  const QuadratureRule whole = triangle_rule(v[0], v[1], v[2], 2);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < whole.points.size(); ++q) {
    const Eigen::VectorXd p = monomials(m, frame, whole.points[q]);
    mass += whole.weights[q] * p * p.transpose();
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const QuadratureRule own = topology.region_rule(t, i, kSourceQuadratureDegree);
  for (std::size_t q = 0; q < own.points.size(); ++q) {
    rhs += own.weights[q] * data.source(i, own.points[q]) * monomials(m, frame, own.points[q]);
  }
  if (const CutCell* cell = topology.cut_cell(t)) {
    const LocalPolynomial& g = f_ext.cells[i][t];
    const QuadratureRule rest = polygon_rule(cell->complement(i), 2);
    for (std::size_t q = 0; q < rest.points.size(); ++q) {
      rhs += rest.weights[q] * g(rest.points[q]) * monomials(m, frame, rest.points[q]);
    }
  }
  return {frame, mass.ldlt().solve(rhs)};
}

}  // namespace

int rt_dimension(int degree) {
  if (degree == 0) return 3;
  if (degree == 1) return 8;
  throw Error(ErrorKind::invalid_argument, "Raviart-Thomas degree must be 0 or 1", degree);
}

Vec2 rt_shape(int degree, int k, const Vec2& xi) {
  if (degree == 0) {
    switch (k) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      default: return xi;
    }
  }
  switch (k) {
    case 0: return {1.0, 0.0};
    case 1: return {xi.x(), 0.0};
    case 2: return {xi.y(), 0.0};
    case 3: return {0.0, 1.0};
    case 4: return {0.0, xi.x()};
    case 5: return {0.0, xi.y()};
    case 6: return xi * xi.x();
    default: return xi * xi.y();
  }
}

double rt_shape_divergence(int degree, int k, const Vec2& xi, double scale) {
  if (degree == 0) return k == 2 ? 2.0 / scale : 0.0;
  switch (k) {
    case 1:
    case 5: return 1.0 / scale;
    case 6: return 3.0 * xi.x() / scale;
    case 7: return 3.0 * xi.y() / scale;
    default: return 0.0;
  }
}

double LocalPolynomial::operator()(const Vec2& x) const {
  if (c.size() == 0) return 0.0;
  double s = c[0];
  if (c.size() == 3) {
    const Vec2 xi = frame.local(x);
    s += c[1] * xi.x() + c[2] * xi.y();
  }
  return s;
}

LocalPolynomial extend_source(int t, int i, const PrimalField& u, const ProblemData& data, int degree) {
  if (degree != 0 && degree != 1) throw Error(ErrorKind::invalid_argument, "extension degree must be 0 or 1", degree);
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  const CutCell* cell = topology.cut_cell(t);
  if (!cell) throw Error(ErrorKind::invalid_argument, "source extension needs a cut cell");
  const auto& region = cell->complement(i);
  const double area = polygon_area(region);
  if (!(area > kMinPieceAreaRatio * mesh.area(t))) {
    throw Error(ErrorKind::degenerate_cut, "complement piece of cell " + std::to_string(t) + " is degenerate", area);
  }
  LocalPolynomial g;
  g.frame = {vertex_mean(region), std::sqrt(area)};
  const int n = degree == 0 ? 1 : 3;

  const QuadratureRule rule = polygon_rule(region, 2);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd p = monomials(degree, g.frame, rule.points[q]);
    mass += rule.weights[q] * p * p.transpose();
  }

  const InterfaceWeights w = data.weights();
  const double h = mesh.diameter(t);
  const double flux_jump = (data.k[0] * u.gradient(0, t) - data.k[1] * u.gradient(1, t)).dot(cell->normal);
  const double sign = i == 0 ? -1.0 : 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const QuadratureRule gamma = segment_rule(cell->gamma.a, cell->gamma.b, 3);
  for (std::size_t q = 0; q < gamma.points.size(); ++q) {
    const Vec2& x = gamma.points[q];
    const double integrand = flux_jump * (w.omega(i) - 1.0) + sign * data.gamma * w.k_gamma / h * u.jump(t, x);
    rhs += gamma.weights[q] * integrand * monomials(degree, g.frame, x);
  }
  // Half the normal-gradient jump on the parts of the edges lying in the
  // other phase; only edges shared with another cell of T_h^i contribute.
  for (int e : mesh.triangle_edges(t)) {
    const Edge& edge = mesh.edge(e);
    if (!two_sided(topology, i, edge)) continue;
    const Segment frag = topology.edge_fragment(e, 1 - i);
    if (frag.length() == 0.0) continue;
    const double jump = data.k[i] * (u.gradient(i, edge.minus) - u.gradient(i, edge.plus)).dot(edge.normal);
    const QuadratureRule fr = segment_rule(frag.a, frag.b, 1);
    for (std::size_t q = 0; q < fr.points.size(); ++q) {
      rhs += fr.weights[q] * 0.5 * jump * monomials(degree, g.frame, fr.points[q]);
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().maxCoeff())) {
    throw Error(ErrorKind::degenerate_cut, "singular mass matrix on complement of cell " + std::to_string(t));
  }
  g.c = ldlt.solve(rhs);
  return g;
}

ExtendedSource extend_sources(const PrimalField& u, const ProblemData& data, int degree) {
  const CutTopology& topology = u.topology();
  ExtendedSource f;
  f.degree = degree;
  for (int i = 0; i < kNumPhases; ++i) {
    f.cells[i].assign(topology.mesh().num_triangles(), {});
    for (int t : topology.cut_triangles()) f.cells[i][t] = extend_source(t, i, u, data, degree);
  }
  return f;
}

Vec2 SubdomainRTFlux::value(int t, const Vec2& x) const {
  const RTFrame frame = RTFrame::of(topology->mesh(), t);
  const Vec2 xi = frame.local(x);
  Vec2 s = Vec2::Zero();
  for (int k = 0; k < coefficients[t].size(); ++k) s += coefficients[t][k] * rt_shape(degree, k, xi);
  return s;
}

double SubdomainRTFlux::divergence(int t, const Vec2& x) const {
  const RTFrame frame = RTFrame::of(topology->mesh(), t);
  const Vec2 xi = frame.local(x);
  double s = 0.0;
  for (int k = 0; k < coefficients[t].size(); ++k) s += coefficients[t][k] * rt_shape_divergence(degree, k, xi, frame.scale);
  return s;
}

SubdomainRTFlux reconstruct_rt_phase(int i, const PrimalField& u, const MultiplierField& theta, const ProblemData& data,
                                     int degree) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  const int n = rt_dimension(degree);
  const double k = data.k[i];
  SubdomainRTFlux sigma;
  sigma.topology = &topology;
  sigma.phase = i;
  sigma.degree = degree;
  sigma.edge_moments.assign(mesh.num_edges(), Eigen::Vector2d::Zero());
  sigma.coefficients.assign(mesh.num_triangles(), Eigen::VectorXd());

  std::vector<char> done(mesh.num_edges(), 0);
  for (int t : topology.triangles(i)) {
    for (int e : mesh.triangle_edges(t)) {
      if (done[e]) continue;
      done[e] = 1;
      const Edge& edge = mesh.edge(e);
      const double h = edge.length;
      double mean;
      if (two_sided(topology, i, edge)) {
        mean = 0.5 * k * (u.gradient(i, edge.minus) + u.gradient(i, edge.plus)).dot(edge.normal);
      } else {
        mean = k * u.gradient(i, t).dot(edge.normal);
      }
      Eigen::Vector2d mom(h * mean, 0.0);
      if (topology.edge_in(i, e)) {
        const double p = theta.values[i][e][0], q = theta.values[i][e][1];
        mom[0] -= 0.5 * k * h * (p + q);
        mom[1] -= 0.5 * k * h * (q - p);
      }
      sigma.edge_moments[e] = mom;
    }
  }

  const InterfaceWeights w = data.weights();
  for (int t : topology.triangles(i)) {
    const RTFrame frame = RTFrame::of(mesh, t);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    int row = 0;
    for (int e : mesh.triangle_edges(t)) {
      const Edge& edge = mesh.edge(e);
      const QuadratureRule rule = segment_rule(mesh.node(edge.nodes[0]), mesh.node(edge.nodes[1]), 3);
      for (int mom = 0; mom <= degree; ++mom) {
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const Vec2& x = rule.points[q];
          const double wgt = mom == 0 ? 1.0 : edge_parameter(mesh, edge, x);
          for (int c = 0; c < n; ++c) a(row, c) += rule.weights[q] * wgt * rt_shape(degree, c, frame.local(x)).dot(edge.normal);
        }
        b[row] = sigma.edge_moments[e][mom];
        ++row;
      }
    }
    if (degree == 1) {
      const auto v = mesh.vertices(t);
      const QuadratureRule rule = triangle_rule(v[0], v[1], v[2], 2);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        for (int c = 0; c < n; ++c) {
          const Vec2 s = rt_shape(degree, c, frame.local(rule.points[q]));
          a(row, c) += rule.weights[q] * s.x();
          a(row + 1, c) += rule.weights[q] * s.y();
        }
      }
      Vec2 interior = mesh.area(t) * k * u.gradient(i, t);
      if (const CutCell* cell = topology.cut_cell(t)) {
        const QuadratureRule g = segment_rule(cell->gamma.a, cell->gamma.b, 1);
        const double jump_integral = g.integrate([&](const Vec2& x) { return u.jump(t, x); });
        interior -= w.omega(i) * k * jump_integral * cell->normal;
      }
      for (int e : mesh.triangle_edges(t)) {
        if (!topology.ghost(i, e)) continue;
        const Edge& edge = mesh.edge(e);
        const double jump = (u.gradient(i, edge.minus) - u.gradient(i, edge.plus)).dot(edge.normal);
        interior += data.beta * edge.length * edge.length * k * jump * jump_sign(edge, t) * edge.normal;
      }
      b[row] = interior.x();
      b[row + 1] = interior.y();
    }
    sigma.coefficients[t] = solve_dense(a, b, DenseMode::square).x;
  }
  return sigma;
}

std::array<SubdomainRTFlux, kNumPhases> reconstruct_rt(const PrimalField& u, const MultiplierField& theta,
                                                       const ProblemData& data, int degree) {
  return {reconstruct_rt_phase(0, u, theta, data, degree), reconstruct_rt_phase(1, u, theta, data, degree)};
}

CellAudit conservation_audit_rt(const SubdomainRTFlux& sigma, const ExtendedSource& f_ext, const ProblemData& data) {
  if (f_ext.degree != sigma.degree) throw Error(ErrorKind::invalid_argument, "extension and flux degrees differ");
  const CutTopology& topology = *sigma.topology;
  const Mesh& mesh = topology.mesh();
  CellAudit audit;
  for (int t : topology.triangles(sigma.phase)) {
    const LocalPolynomial pf = project_source(t, sigma.phase, topology, f_ext, data);
    const auto v = mesh.vertices(t);
    const QuadratureRule rule = triangle_rule(v[0], v[1], v[2], 2);
    const double r2 = rule.integrate([&](const Vec2& x) {
      const double d = sigma.divergence(t, x) + pf(x);
      return d * d;
    });
    const double r = std::sqrt(r2);
    audit.cells.push_back(t);
    audit.residuals.push_back(r);
    audit.max = std::max(audit.max, r);
  }
  return audit;
}

double interface_jump_rt(const SubdomainRTFlux& sigma1, const SubdomainRTFlux& sigma2) {
  const CutTopology& topology = *sigma1.topology;
  double s = 0.0;
  for (const CutCell& cell : topology.cut_cells()) {
    const QuadratureRule rule = segment_rule(cell.gamma.a, cell.gamma.b, 4);
    s += rule.integrate([&](const Vec2& x) {
      const double d = (sigma1.value(cell.triangle, x) - sigma2.value(cell.triangle, x)).dot(cell.normal);
      return d * d;
    });
  }
  return std::sqrt(s);
}

void write_audit_csv(const CellAudit& audit, int phase, const CutTopology& topology, std::ostream& out) {
  out << "cell,phase,residual,cut\n";
  out.precision(17);
  for (std::size_t c = 0; c < audit.cells.size(); ++c) {
    const int t = audit.cells[c];
    out << t << ',' << phase + 1 << ',' << audit.residuals[c] << ',' << (topology.triangle_cut(t) ? 1 : 0) << '\n';
  }
}

}  // namespace cutflux
