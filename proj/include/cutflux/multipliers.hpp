#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cutflux/cutfem.hpp"

namespace cutflux {

/// Piecewise linear, discontinuous per phase: values[i][t] are the values at
/// the three local vertices of t. Entries of triangles outside T_h^i are
/// ignored.
struct BrokenField {
  std::array<std::vector<std::array<double, 3>>, kNumPhases> values;

  static BrokenField zero(const Mesh& mesh);
  static BrokenField from_primal(const PrimalField& field);
  /// phi_P chi_T for local vertex `a` of t in phase i.
  static BrokenField basis(const Mesh& mesh, int i, int t, int a);

  Vec2 gradient(const Mesh& mesh, int i, int t) const;
  double value(const Mesh& mesh, int i, int t, const Vec2& x) const;
};

/// theta^i on every edge of F_h^i, linear along the edge: values[i][e][a] is
/// the value at mesh.edge(e).nodes[a].
struct MultiplierField {
  std::array<std::vector<std::array<double, 2>>, kNumPhases> values;

  static MultiplierField zero(const Mesh& mesh);
  /// Value at `node`, which must be an endpoint of e.
  double at(const Mesh& mesh, int i, int e, int node) const;
  /// pi_F^0 theta^i.
  double mean(int i, int e) const { return 0.5 * (values[i][e][0] + values[i][e][1]); }
};

/// [[v^i]](N) on edge e of F_h^i; one-sided value on boundary edges.
double edge_jump(const Mesh& mesh, const BrokenField& v, int i, int e, int node);

/// Sign of [[phi_P chi_T]] on edge e: +1 when t is the minus (or only)
/// neighbour of e, -1 otherwise.
inline int jump_sign(const Edge& edge, int t) { return edge.plus == t ? -1 : 1; }

/// Nodes of Omega_h^i carrying the M_h sign constraint: every triangle around
/// the node lies in T_h^i and every edge at the node lies in F_h^i.
bool constrained_node(const CutTopology& topology, int i, int node);

/// b_h(mu, v) with the nodal quadrature on each edge.
double eval_b_h(const MultiplierField& mu, const BrokenField& v, const CutTopology& topology, const ProblemData& data);

/// d_h(u, v), both symmetric terms, on the physical edge fragments.
double eval_d_h(const BrokenField& u, const BrokenField& v, const CutTopology& topology, const ProblemData& data);

/// r_h(phi_P chi_T) for every (phase, triangle, local vertex). `gross` is the
/// largest sum of absolute values of the individual terms and serves as the
/// scale for relative checks.
struct ResidualTable {
  std::array<std::vector<Eigen::Vector3d>, kNumPhases> r;
  double gross = 0.0;
};

ResidualTable residual_table(const PrimalField& u, const ProblemData& data);

/// r_h(v) for an arbitrary broken test function.
double residual(const PrimalField& u, const BrokenField& v, const ProblemData& data);

struct PatchSolution {
  int node = -1;
  int phase = 0;
  std::vector<int> edges;                  // F_N cap F_h^i
  std::vector<std::array<double, 2>> theta;  // per edge, at (nodes[0], nodes[1])
  int rows = 0;
  int cols = 0;
  int rank = 0;
  double residual = 0.0;  // relative
};

inline constexpr double kPatchTolerance = 1e-9;

/// Local multiplier theta_N^i. Throws inconsistent-patch when the least
/// squares residual exceeds kPatchTolerance.
PatchSolution solve_node_patch(int node, int i, const PrimalField& u, const ResidualTable& table,
                               const ProblemData& data);

struct MultiplierResult {
  MultiplierField theta;
  std::vector<PatchSolution> patches;  // without theta, for diagnostics
  double max_patch_residual = 0.0;
};

MultiplierResult build_multiplier(const PrimalField& u, const ProblemData& data);

/// max over the D_h basis of |b_h(theta, v) - r_h(v)| / gross.
double multiplier_identity_defect(const MultiplierField& theta, const PrimalField& u, const ResidualTable& table,
                                  const ProblemData& data);

/// max over constrained nodes of |sum_F s_N^F h_F theta|_F(N)|, relative to
/// the largest h_F |theta|.
double constraint_residual(const MultiplierField& theta, const CutTopology& topology);

/// max over multiplier basis functions of |b_h(mu, u_h)|.
double kernel_defect(const PrimalField& u, const ProblemData& data);

/// ||mu||_M^2 = sum_i sum_F int_F k_i h_F mu^2.
double multiplier_norm(const MultiplierField& mu, const CutTopology& topology, const ProblemData& data);

inline constexpr int kInfSupMaxDofs = 2000;

/// Smallest generalized singular value of b_h on M_h x D_h in the
/// ||.||_M / ||.||_D geometry. Empty when the multiplier space exceeds
/// kInfSupMaxDofs.
std::optional<double> verify_infsup_smoke(const CutTopology& topology, const ProblemData& data);

/// "node,phase,rows,cols,rank,residual"
void write_patch_csv(const std::vector<PatchSolution>& patches, std::ostream& out);

}  // namespace cutflux
