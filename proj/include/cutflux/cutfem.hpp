#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cutflux/cutgeom.hpp"
#include "cutflux/linalg.hpp"

namespace cutflux {

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;

/// Nitsche penalty default. 10 is not enough once a sliver sits on the
/// low-diffusion side of a high-contrast interface (the harmonic weights put
/// the whole flux term there); 50 stays coercive on every cut we sampled.
inline constexpr double kDefaultNitschePenalty = 50.0;
inline constexpr double kDefaultGhostPenalty = 0.1;

/// Coefficients, sources and stabilization of the two-phase problem.
struct ProblemData {
  std::array<double, kNumPhases> k{1.0, 1.0};
  std::array<ScalarFn, kNumPhases> f;  // empty callable means f = 0
  double gamma = kDefaultNitschePenalty;
  double beta = kDefaultGhostPenalty;

  double source(int i, const Vec2& x) const { return f[i] ? f[i](x) : 0.0; }
  InterfaceWeights weights() const { return interface_weights(k[0], k[1]); }
  /// Throws invalid-argument unless k_i > 0 and gamma, beta >= 0.
  void validate() const;
};

/// Degree of the quadrature used for every volume and source integral.
inline constexpr int kSourceQuadratureDegree = 4;

/// Independent P1 spaces on the two fictitious domains. Nodes of cut-band
/// triangles carry one unknown per phase. Homogeneous Dirichlet values are
/// eliminated at the end points of outer boundary edges of F_h^i; an outer
/// node of Omega_h^i that touches no such edge stays free.
class DofMap {
 public:
  explicit DofMap(const CutTopology& topology);

  int size() const { return static_cast<int>(node_of_.size()); }
  int num_dofs(int i) const { return count_[i]; }
  /// Global id of (phase, node) or -1.
  int dof(int i, int node) const { return dof_[i][node]; }
  int node_of(int d) const { return node_of_[d]; }
  int phase_of(int d) const { return phase_of_[d]; }

 private:
  std::array<std::vector<int>, kNumPhases> dof_;
  std::vector<int> node_of_;
  std::vector<int> phase_of_;
  std::array<int, kNumPhases> count_{};
};

DofMap build_dofmap(const CutTopology& topology);

/// Gradients of the three P1 hat functions of a triangle.
std::array<Vec2, 3> hat_gradients(const std::array<Vec2, 3>& v);

/// u_h = (u_h^1, u_h^2), continuous piecewise linear on each fictitious domain.
class PrimalField {
 public:
  PrimalField(const CutTopology& topology, DofMap dofmap, std::vector<double> coefficients);

  const CutTopology& topology() const { return *topology_; }
  const DofMap& dofmap() const { return dofmap_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  /// Nodal value of u_h^i (zero at eliminated nodes).
  double nodal(int i, int node) const;
  std::array<double, 3> cell_values(int i, int t) const;
  double value(int i, int t, const Vec2& x) const;
  Vec2 gradient(int i, int t) const;
  /// [u_h] = u_h^1 - u_h^2 at x in the cut triangle t.
  double jump(int t, const Vec2& x) const { return value(0, t, x) - value(1, t, x); }

  int solver_iterations = 0;
  double solver_residual = 0.0;

 private:
  const CutTopology* topology_;
  DofMap dofmap_;
  std::vector<double> coefficients_;
};

struct LinearSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
};

/// Stiffness matrix of a_h and load vector of l_h.
LinearSystem assemble_system(const CutTopology& topology, const DofMap& dofmap, const ProblemData& data);

PrimalField solve_primal(const CutTopology& topology, const ProblemData& data,
                         double tol = kDefaultSolverTolerance);

/// ||v_h||_h (ghost penalty term without the beta factor).
double energy_norm(const PrimalField& field, const ProblemData& data);

/// |u - u_h|_{1,K} from the exact gradients on each phase. Volume integrals
/// use the refined degree-4 rule on each physical piece.
double energy_error(const std::array<VectorFn, kNumPhases>& exact_gradient, const PrimalField& field,
                    const ProblemData& data, int refinements = 1);

/// ||u - u_h|| on Omega^1 and Omega^2 together.
double l2_error(const std::array<ScalarFn, kNumPhases>& exact, const PrimalField& field, int refinements = 1);

namespace forms {

/// k |T cap Omega^i| grad(phi_a) . grad(phi_b).
Eigen::Matrix3d volume(const CutTopology& topology, int t, int i, double k);

/// a_Gamma on a cut triangle; local order (phase 0 vertices, phase 1 vertices).
Eigen::Matrix<double, 6, 6> interface(const CutTopology& topology, const CutCell& cell, const ProblemData& data,
                                      double penalty_factor);

/// Ghost-penalty j_i on an interior edge, without the beta factor; local order
/// (minus triangle vertices, plus triangle vertices).
Eigen::Matrix<double, 6, 6> ghost(const CutTopology& topology, int e, double k);

/// int_{T cap Omega^i} f^i phi_a.
Eigen::Vector3d load(const CutTopology& topology, int t, int i, const ProblemData& data);

}  // namespace forms

}  // namespace cutflux
