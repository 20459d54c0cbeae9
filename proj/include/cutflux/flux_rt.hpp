#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "cutflux/multipliers.hpp"

namespace cutflux {

/// Raviart-Thomas shape functions on one triangle, written in the local
/// coordinate xi = (x - center) / scale. Degree 0: (1,0), (0,1), xi.
/// Degree 1: the six components of (P1)^2 followed by xi xi_1, xi xi_2.
struct RTFrame {
  Vec2 center = Vec2::Zero();
  double scale = 1.0;

  static RTFrame of(const Mesh& mesh, int t) { return {mesh.centroid(t), mesh.diameter(t)}; }
  Vec2 local(const Vec2& x) const { return (x - center) / scale; }
};

int rt_dimension(int degree);
Vec2 rt_shape(int degree, int k, const Vec2& xi);
/// Divergence in physical coordinates.
double rt_shape_divergence(int degree, int k, const Vec2& xi, double scale);

/// Polynomial of degree <= 1 in the local coordinate of a frame:
/// c0 + c1 xi_1 + c2 xi_2 (only c0 for degree 0).
struct LocalPolynomial {
  RTFrame frame;
  Eigen::VectorXd c;

  double operator()(const Vec2& x) const;
};

/// f^i on T_C^i for every cut cell; `cells[i][t]` is empty for uncut t.
struct ExtendedSource {
  int degree = 0;
  std::array<std::vector<LocalPolynomial>, kNumPhases> cells;
};

/// Degree-m extension of f^i to the complement piece of the cut cell t.
LocalPolynomial extend_source(int t, int i, const PrimalField& u, const ProblemData& data, int degree);
ExtendedSource extend_sources(const PrimalField& u, const ProblemData& data, int degree);

/// sigma_h^i in RT^m(Omega_h^i).
struct SubdomainRTFlux {
  const CutTopology* topology = nullptr;
  int phase = 0;
  int degree = 0;
  /// Per edge: int_F sigma . n_F w for w = 1 and w = s (Legendre on [-1, 1]
  /// from nodes[0] to nodes[1]).
  std::vector<Eigen::Vector2d> edge_moments;
  /// Per triangle of T_h^i: coefficients in the RTFrame of the triangle.
  std::vector<Eigen::VectorXd> coefficients;

  bool defined(int t) const { return coefficients[t].size() > 0; }
  Vec2 value(int t, const Vec2& x) const;
  double divergence(int t, const Vec2& x) const;
};

SubdomainRTFlux reconstruct_rt_phase(int i, const PrimalField& u, const MultiplierField& theta, const ProblemData& data,
                                     int degree);
std::array<SubdomainRTFlux, kNumPhases> reconstruct_rt(const PrimalField& u, const MultiplierField& theta,
                                                       const ProblemData& data, int degree);

struct CellAudit {
  std::vector<int> cells;
  std::vector<double> residuals;
  double max = 0.0;
};

/// ||div sigma^i + pi^m f^i||_T on every T of T_h^i, with the extended source
/// on cut cells. Source integrals use the same rule as the load vector.
CellAudit conservation_audit_rt(const SubdomainRTFlux& sigma, const ExtendedSource& f_ext, const ProblemData& data);

/// L2 norm over Gamma of sigma^1 . n_Gamma - sigma^2 . n_Gamma.
double interface_jump_rt(const SubdomainRTFlux& sigma1, const SubdomainRTFlux& sigma2);

/// "cell,phase,residual,cut"
void write_audit_csv(const CellAudit& audit, int phase, const CutTopology& topology, std::ostream& out);

}  // namespace cutflux
