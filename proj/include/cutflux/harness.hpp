#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cutflux/estimators.hpp"
#include "cutflux/manufactured.hpp"

namespace cutflux {

enum class FluxMethod { rt0, rt1, irt0 };

FluxMethod parse_flux_method(const std::string& name);
const char* to_string(FluxMethod method);

/// Everything a run needs. Loaded from an INI-style file with sections
/// [mesh], [interface], [problem], [solver], [flux], [output], [converge] and
/// [sweep]; every field has a default.
struct CaseConfig {
  // [mesh]
  int nx = 16;
  int ny = 16;
  Rect rect;
  std::string mesh_file;
  // [interface]; alpha/slope override the manufactured geometry
  std::string interface_file;
  std::optional<double> alpha;
  std::optional<double> slope;
  // [problem]; case is M0, M1, M2 or const (piecewise constant f, no exact solution)
  std::string case_id = "M1";
  double k1 = 1.0;
  double k2 = 10.0;
  double gamma = kDefaultNitschePenalty;
  double beta = kDefaultGhostPenalty;
  double f1 = 1.0;  // const case only
  double f2 = 1.0;
  // [solver]
  double tol = 1e-12;
  // [flux]
  FluxMethod flux = FluxMethod::irt0;
  // [output]
  bool vtk = false;
  bool clipped = true;
  bool matrix = false;
  // [converge]
  int levels = 4;
  int base_nx = 8;
  // [sweep]
  int sweep_nx = 16;
  std::vector<double> contrasts{1e-3, 1.0, 1e3};
  std::vector<double> offsets{0.3, 1e-3, 1e-6};  // in units of h

  /// Throws invalid-argument on inconsistent values.
  void validate() const;
};

CaseConfig load_config(std::istream& in);
CaseConfig load_config_file(const std::string& path);

/// Audit tolerances, all relative.
inline constexpr double kConservationTolerance = 1e-8;  // times ||f||
inline constexpr double kTransmissionTolerance = 1e-10; // times max |sigma|
inline constexpr double kIdentityTolerance = 1e-8;
inline constexpr double kConstraintTolerance = 1e-9;
/// Absolute floor used when the data vanish.
inline constexpr double kTrivialTolerance = 1e-12;

struct CaseResult {
  std::string case_id;
  FluxMethod flux = FluxMethod::irt0;
  int nx = 0;
  double h = 0.0;
  std::array<int, kNumPhases> dofs{};
  int cut_cells = 0;
  int iterations = 0;
  double solver_residual = 0.0;
  double f_norm = 0.0;
  bool has_exact = false;
  double energy_error = 0.0;
  double l2_error = 0.0;
  EstimatorReport estimators;
  // audit maxima
  double conservation = 0.0;       // relative to ||f|| (absolute when f = 0)
  double transmission = 0.0;       // IRT: relative to max |sigma|; 0 for subdomain fluxes
  double edge_violation = 0.0;     // IRT weak continuity, relative to max |sigma|
  double rt_interface_jump = 0.0;  // subdomain fluxes: ||[sigma~ . n_Gamma]||_Gamma
  double multiplier_identity = 0.0;
  double constraint = 0.0;
  double kernel = 0.0;
  double max_patch_residual = 0.0;
  double wall_seconds = 0.0;

  bool audits_pass() const;
};

/// Manufactured case (or constant data) described by the config.
ManufacturedCase case_data(const CaseConfig& config);

/// classify -> solve -> multipliers -> flux -> audits -> estimators. When
/// `out_dir` is non-empty the per-run files are written there. Errors carry
/// the failing stage in their message.
CaseResult run_case(const CaseConfig& config, const std::string& out_dir = "");

struct ConvergenceRow {
  int nx = 0;
  double h = 0.0;
  int dofs = 0;
  double energy_error = 0.0;
  double l2_error = 0.0;
  double eta = 0.0;
  double eta_gamma = 0.0;
  double epsilon = 0.0;
  double effectivity = 0.0;
  bool audits_pass = false;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double energy_rate = 0.0;
  double l2_rate = 0.0;
  double min_effectivity = 0.0;
  double max_effectivity = 0.0;

  bool rates_pass() const;
  bool effectivity_pass() const;
};

/// Least-squares slope of log(value) against log(h) over the last `window`
/// points.
double fitted_rate(const std::vector<double>& h, const std::vector<double>& value, int window = 3);

/// Levels nx = base_nx * 2^l, l < levels.
ConvergenceStudy convergence_study(const CaseConfig& config);
void write_convergence_csv(const ConvergenceStudy& study, std::ostream& out);

struct SweepRow {
  double contrast = 0.0;
  double offset = 0.0;  // in units of h
  std::string status = "ok";  // or the error kind
  int iterations = 0;
  double conservation = 0.0;
  double transmission = 0.0;
  double multiplier_identity = 0.0;
  double constraint = 0.0;
  double effectivity = 0.0;
  double min_irt_condition = 0.0;
  double max_irt_condition = 0.0;
  bool pass = false;
};

struct RobustnessSweep {
  std::vector<SweepRow> rows;
  double effectivity_spread = 0.0;  // max / min over successful rows

  bool pass() const;
};

/// Vertical interface x = 1/2 + offset h on a mesh with a grid line at
/// x = 1/2, for every (contrast k2/k1, offset) pair. Errors are recorded per
/// row.
RobustnessSweep robustness_sweep(const CaseConfig& config);
void write_sweep_csv(const RobustnessSweep& sweep, std::ostream& out);

inline constexpr double kEnergyRateRange[2] = {0.85, 1.15};
inline constexpr double kL2RateRange[2] = {1.7, 2.3};
inline constexpr double kEffectivityRange[2] = {0.8, 25.0};
inline constexpr double kEffectivityLevelSpread = 2.0;
inline constexpr double kEffectivitySweepSpread = 5.0;

}  // namespace cutflux
