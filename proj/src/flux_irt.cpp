#include "cutflux/flux_irt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

RTFrame frame_of(const CutCell& cell) {
  double h = 0.0;
  for (int j = 0; j < 3; ++j) h = std::max(h, (cell.vertices[(j + 1) % 3] - cell.vertices[j]).norm());
  return {(cell.vertices[0] + cell.vertices[1] + cell.vertices[2]) / 3.0, h};
}

Vec2 affine(const Eigen::Vector3d& c, const RTFrame& frame, const Vec2& x) {
  return Vec2(c[0], c[1]) + c[2] * frame.local(x);
}

}  // namespace

Vec2 IRTLocalBasis::value(int l, int i, const Vec2& x) const { return affine(coef[l][i], frame, x); }

Eigen::Matrix<double, 6, 6> irt_constraint_matrix(const CutCell& cell, const RTFrame& frame, double k1, double k2) {
  const InterfaceWeights w = interface_weights(k1, k2);
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  for (int j = 0; j < 3; ++j) {
    const Vec2& p = cell.vertices[j];
    const Vec2& q = cell.vertices[(j + 1) % 3];
    const double h = (q - p).norm();
    const Vec2 nu = rotate_cw(q - p) / h;
    const double d = frame.local(p).dot(nu);
    for (int i = 0; i < kNumPhases; ++i) {
      const double share = cell.fragment_length(j, i) / h;
      a(j, 3 * i + 0) = share * nu.x();
      a(j, 3 * i + 1) = share * nu.y();
      a(j, 3 * i + 2) = share * d;
    }
  }
  const Vec2& n = cell.normal;
  const Vec2& t = cell.tangent;
  const double dn = frame.local(cell.gamma.a).dot(n);
  const double dt = frame.local(cell.gamma.midpoint()).dot(t);
  const double sgn[2] = {1.0, -1.0};
  for (int i = 0; i < kNumPhases; ++i) {
    a(3, 3 * i + 0) = sgn[i] * n.x();
    a(3, 3 * i + 1) = sgn[i] * n.y();
    a(3, 3 * i + 2) = sgn[i] * dn;
    a(4, 3 * i + 2) = sgn[i];
    // k_Gamma [k^-1 psi . t] = omega_1 psi^1 . t - omega_2 psi^2 . t
    const double om = sgn[i] * w.omega(i);
    a(5, 3 * i + 0) = om * t.x();
    a(5, 3 * i + 1) = om * t.y();
    a(5, 3 * i + 2) = om * dt;
  }
  return a;
}

IRTLocalBasis irt_local_basis(const CutCell& cell, double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error(ErrorKind::invalid_argument, "diffusivities must be positive");
  IRTLocalBasis basis;
  basis.triangle = cell.triangle;
  basis.frame = frame_of(cell);
  const Eigen::Matrix<double, 6, 6> a = irt_constraint_matrix(cell, basis.frame, k1, k2);
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(a);
  const auto& sv = svd.singularValues();
  basis.condition = sv[5] > 0.0 ? sv[0] / sv[5] : std::numeric_limits<double>::infinity();
  if (!std::isfinite(basis.condition)) {
    throw Error(ErrorKind::unisolvence_failure,
                "singular immersed basis system on cell " + std::to_string(cell.triangle), basis.condition);
  }
  if (basis.condition > kIRTConditionLimit) {
    throw Error(ErrorKind::degenerate_cut, "ill-conditioned immersed basis on cell " + std::to_string(cell.triangle),
                basis.condition);
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(a);
  for (int l = 0; l < 3; ++l) {
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    rhs[l] = 1.0;
    const Eigen::Matrix<double, 6, 1> x = lu.solve(rhs);
    basis.constraint_residual = std::max(basis.constraint_residual, (a * x - rhs).cwiseAbs().maxCoeff());
    basis.coef[l][0] = x.head<3>();
    basis.coef[l][1] = x.tail<3>();
  }
  if (basis.constraint_residual > kIRTDualityTolerance) {
    throw Error(ErrorKind::unisolvence_failure,
                "immersed basis duality check failed on cell " + std::to_string(cell.triangle),
                basis.constraint_residual);
  }
  return basis;
}

Vec2 GlobalIRTFlux::value(int t, int i, const Vec2& x) const {
  return affine(cells[t][i], RTFrame::of(topology->mesh(), t), x);
}

double GlobalIRTFlux::divergence(int t, int i) const {
  return 2.0 * cells[t][i][2] / topology->mesh().diameter(t);
}

Eigen::Vector3d rt0_from_fluxes(const Mesh& mesh, int t, const std::array<double, 3>& flux) {
  const RTFrame frame = RTFrame::of(mesh, t);
  const auto v = mesh.vertices(t);
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int j = 0; j < 3; ++j) {
    const Edge& edge = mesh.edge(mesh.triangle_edges(t)[j]);
    const double h = edge.length;
    a(j, 0) = h * edge.normal.x();
    a(j, 1) = h * edge.normal.y();
    a(j, 2) = h * frame.local(v[j]).dot(edge.normal);
    b[j] = flux[j];
  }
  return a.fullPivLu().solve(b);
}

GlobalIRTFlux reconstruct_irt(const PrimalField& u, const MultiplierField& theta, const ProblemData& data) {
  data.validate();
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  GlobalIRTFlux sigma;
  sigma.topology = &topology;
  sigma.edge_flux.assign(mesh.num_edges(), 0.0);
  sigma.cells.assign(mesh.num_triangles(), {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()});

  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    double flux = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      if (!topology.edge_in(i, e)) continue;
      const double k = data.k[i];
      Vec2 grad = u.gradient(i, edge.minus);
      if (!edge.boundary()) grad = 0.5 * (grad + u.gradient(i, edge.plus));
      flux += topology.edge_fragment(e, i).length() * k * grad.dot(edge.normal) - k * edge.length * theta.mean(i, e);
    }
    sigma.edge_flux[e] = flux;
  }

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (topology.triangle_cut(t)) continue;
    std::array<double, 3> flux{};
    for (int j = 0; j < 3; ++j) flux[j] = sigma.edge_flux[mesh.triangle_edges(t)[j]];
    const Eigen::Vector3d c = rt0_from_fluxes(mesh, t, flux);
    sigma.cells[t] = {c, c};
  }
  for (const CutCell& cell : topology.cut_cells()) {
    const int t = cell.triangle;
    IRTLocalBasis basis = irt_local_basis(cell, data.k[0], data.k[1]);
    // Re-express in the frame of the mesh triangle (same centroid and
    // diameter, so only a guard against rounding in the two frames).
    const RTFrame target = RTFrame::of(mesh, t);
    std::array<Eigen::Vector3d, kNumPhases> c{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
    for (int l = 0; l < 3; ++l) {
      const int e = mesh.triangle_edges(t)[l];
      const double dof = mesh.edge_orientation(t, l) * sigma.edge_flux[e] / mesh.edge(e).length;
      for (int i = 0; i < kNumPhases; ++i) {
        Eigen::Vector3d q = basis.coef[l][i];
        const double ratio = target.scale / basis.frame.scale;
        const Vec2 shift = (target.center - basis.frame.center) / basis.frame.scale;
        // a + b (x - c0)/h0 = (a + b shift) + (b h/h0) (x - c)/h
        q.head<2>() += q[2] * shift;
        q[2] *= ratio;
        c[i] += dof * q;
      }
    }
    sigma.cells[t] = c;
    sigma.bases.push_back(std::move(basis));
  }
  return sigma;
}

CellAudit conservation_audit_irt(const GlobalIRTFlux& sigma, const ProblemData& data) {
  const CutTopology& topology = *sigma.topology;
  const Mesh& mesh = topology.mesh();
  CellAudit audit;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double s = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      const double area = topology.piece_area(t, i);
      if (area == 0.0) continue;
      s += area * sigma.divergence(t, i);
      const QuadratureRule rule = topology.region_rule(t, i, kSourceQuadratureDegree);
      s += rule.integrate([&](const Vec2& x) { return data.source(i, x); });
    }
    const double r = std::abs(s) / mesh.area(t);
    audit.cells.push_back(t);
    audit.residuals.push_back(r);
    audit.max = std::max(audit.max, r);
  }
  return audit;
}

TransmissionAudit transmission_audit(const GlobalIRTFlux& sigma) {
  const CutTopology& topology = *sigma.topology;
  const Mesh& mesh = topology.mesh();
  TransmissionAudit audit;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int i = 0; i < kNumPhases; ++i) {
      for (const Vec2& p : topology.piece(t, i)) audit.flux_scale = std::max(audit.flux_scale, sigma.value(t, i, p).norm());
    }
  }
  for (const CutCell& cell : topology.cut_cells()) {
    const int t = cell.triangle;
    for (const Vec2& x : {cell.gamma.a, cell.gamma.midpoint(), cell.gamma.b}) {
      const double jump = (sigma.value(t, 0, x) - sigma.value(t, 1, x)).dot(cell.normal);
      audit.interface_jump = std::max(audit.interface_jump, std::abs(jump));
    }
  }
  for (int e : topology.cut_edges()) {
    const Edge& edge = mesh.edge(e);
    if (edge.boundary()) continue;
    auto side = [&](int t) {
      double s = 0.0;
      for (int i = 0; i < kNumPhases; ++i) {
        const Segment frag = topology.edge_fragment(e, i);
        s += frag.length() * sigma.value(t, i, frag.midpoint()).dot(edge.normal);
      }
      return s;
    };
    audit.edge_violation = std::max(audit.edge_violation, std::abs(side(edge.minus) - side(edge.plus)));
  }
  return audit;
}

void write_irt_audit_csv(const CellAudit& conservation, const GlobalIRTFlux& sigma, std::ostream& out) {
  out << "cell,kind,residual\n";
  out.precision(17);
  for (std::size_t c = 0; c < conservation.cells.size(); ++c) {
    out << conservation.cells[c] << ",conservation," << conservation.residuals[c] << '\n';
  }
  for (const auto& b : sigma.bases) out << b.triangle << ",condition," << b.condition << '\n';
}

}  // namespace cutflux
