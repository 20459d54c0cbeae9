#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cutflux/flux_irt.hpp"

namespace cutflux {

/// sigma_h on the piece (t, i) at x.
using FluxEval = std::function<Vec2(int t, int i, const Vec2& x)>;

FluxEval flux_eval(const GlobalIRTFlux& sigma);
FluxEval flux_eval(const std::array<SubdomainRTFlux, kNumPhases>& sigma);

struct PerEntity {
  std::vector<int> ids;
  std::vector<double> values;

  double euclidean() const;
};

/// eta_T = ||K^{-1/2} (sigma_h - K grad u_h)||_T, phase by phase on cut cells.
PerEntity eta_cell(const FluxEval& sigma, const PrimalField& u, const ProblemData& data, int refinements = 0);

struct InterfaceIndicators {
  PerEntity edges;  // eta_F on cut edges
  PerEntity cells;  // eta~_T on cut cells
};

/// eta_F = sqrt(h_F / k_Gamma) ||[[sigma . n_F - pi_F^0 sigma . n_F]]||_F and
/// eta~_T = sqrt(k_max) / h_T ||[u_h]||_{Gamma_T}.
InterfaceIndicators eta_interface(const FluxEval& sigma, const PrimalField& u, const ProblemData& data);

/// (h_T^2 / k_T) ||f - pi_T^0 f||_T^2 per cell (squared contributions are
/// returned as their square roots).
PerEntity data_oscillation(const CutTopology& topology, const ProblemData& data, int refinements = 0);

struct EstimatorReport {
  PerEntity eta_T;
  PerEntity eta_F;
  PerEntity eta_tilde;
  PerEntity oscillation;
  double eta = 0.0;
  double eta_gamma = 0.0;
  double epsilon = 0.0;
  /// int_Gamma [sigma . n_Gamma]^2, square-rooted; only meaningful for the
  /// subdomain fluxes, which are not continuous across Gamma.
  double transmission_term = 0.0;
  std::optional<double> exact_error;
  double effectivity = 0.0;
  bool exact_case = false;  // zero error and zero estimator
  bool reliable = false;    // effectivity >= 1 - 1e-6 with C = 1

  double total() const { return eta + eta_gamma + epsilon; }
};

EstimatorReport estimate(const FluxEval& sigma, const PrimalField& u, const ProblemData& data);

/// Fills exact_error, effectivity, exact_case and reliable.
void effectivity(EstimatorReport& report, double exact_error);

/// Cell rows "cell,eta_T,eta_tilde,oscillation" then edge rows
/// "edge,eta_F" after a blank line.
void write_estimator_csv(const EstimatorReport& report, int num_cells, std::ostream& out);

}  // namespace cutflux
