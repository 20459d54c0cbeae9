#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "cutflux/flux_rt.hpp"

namespace cutflux {

/// Lowest-order immersed Raviart-Thomas basis of one cut cell. Shape function
/// l on piece i is a + b xi with (a_x, a_y, b) = coef[l][i] and xi the local
/// coordinate of `frame`. Shape function l is dual to the outward flux
/// (1/h_F) int_F psi . nu over local edge l.
struct IRTLocalBasis {
  int triangle = -1;
  RTFrame frame;
  std::array<std::array<Eigen::Vector3d, kNumPhases>, 3> coef{};
  double condition = 0.0;
  /// Largest absolute residual of the six defining rows over the three
  /// solves.
  double constraint_residual = 0.0;

  Vec2 value(int l, int i, const Vec2& x) const;
};

inline constexpr double kIRTConditionLimit = 1e12;
inline constexpr double kIRTDualityTolerance = 1e-10;

/// The six defining rows of a piecewise field (a^1, b^1, a^2, b^2) on the cut
/// cell: three outward edge fluxes divided by h_F, then the normal jump on
/// Gamma, the divergence difference and the weighted mean tangential jump.
Eigen::Matrix<double, 6, 6> irt_constraint_matrix(const CutCell& cell, const RTFrame& frame, double k1, double k2);

IRTLocalBasis irt_local_basis(const CutCell& cell, double k1, double k2);

/// sigma_h in IRT^0: one flux per edge, int_F sigma . n_F with the global
/// edge normal.
struct GlobalIRTFlux {
  const CutTopology* topology = nullptr;
  std::vector<double> edge_flux;
  /// Per triangle and phase: (a_x, a_y, b) in RTFrame::of(t). Equal on both
  /// phases for uncut triangles.
  std::vector<std::array<Eigen::Vector3d, kNumPhases>> cells;
  std::vector<IRTLocalBasis> bases;  // one per cut cell, in cut_cells() order

  Vec2 value(int t, int i, const Vec2& x) const;
  /// Constant divergence of the piece (t, i).
  double divergence(int t, int i) const;
};

/// Coefficients (a_x, a_y, b) of the RT^0 field on t with the given
/// whole-edge fluxes along the global normals of the local edges.
Eigen::Vector3d rt0_from_fluxes(const Mesh& mesh, int t, const std::array<double, 3>& flux);

GlobalIRTFlux reconstruct_irt(const PrimalField& u, const MultiplierField& theta, const ProblemData& data);

/// |int_T div sigma + int_{T^1} f^1 + int_{T^2} f^2| / |T| on every cell.
CellAudit conservation_audit_irt(const GlobalIRTFlux& sigma, const ProblemData& data);

struct TransmissionAudit {
  double interface_jump = 0.0;     // max |[sigma . n_Gamma]|, sampled at three points per Gamma_T
  double edge_violation = 0.0;     // max |int_F sigma|_{T-} . n - int_F sigma|_{T+} . n| on cut edges
  double flux_scale = 0.0;         // max |sigma| over piece vertices
};

TransmissionAudit transmission_audit(const GlobalIRTFlux& sigma);

/// "cell,kind,residual" then optional basis conditions as "cell,condition,<value>".
void write_irt_audit_csv(const CellAudit& conservation, const GlobalIRTFlux& sigma, std::ostream& out);

}  // namespace cutflux
