#pragma once

#include <array>
#include <cmath>
#include <string>

#include "cutflux/cutfem.hpp"

namespace cutflux {

/// Exact solution and data on the unit square with a straight interface
/// x = alpha + slope (y - 1/2), Omega^1 on its left.
///
/// k1 u^1 = x phi sin(pi y) and k2 u^2 = (x - 1) g(y) phi sin(pi y) with
/// phi = x - x_Gamma(y) and g = x_Gamma / (x_Gamma - 1). Both u^i vanish on
/// Gamma and k1 grad u^1 = k2 grad u^2 there, so [u] = 0 and
/// [K grad u . n] = 0; u is zero on the outer boundary.
struct ManufacturedCase {
  std::string id;
  double k1 = 1.0;
  double k2 = 10.0;
  double alpha = 0.0;
  double slope = 0.0;
  std::array<ScalarFn, kNumPhases> u;
  std::array<VectorFn, kNumPhases> gradient;
  std::array<ScalarFn, kNumPhases> f;

  /// Directed segment from (x_Gamma(0), 0) to (x_Gamma(1), 1).
  InterfacePolyline interface() const;
  ProblemData problem(double gamma = kDefaultNitschePenalty, double beta = kDefaultGhostPenalty) const;
};

inline const double kDefaultAlpha = std::sqrt(2.0) / 2.0;
inline constexpr double kTiltedSlope = 0.1;

/// Straight-interface family used by every case.
ManufacturedCase manufactured_family(double k1, double k2, double alpha, double slope);

/// "M0" (zero data, interface as M1), "M1" (vertical interface at
/// sqrt(2)/2), "M2" (M1 tilted with slope 0.1). Unknown ids raise
/// invalid-argument.
ManufacturedCase manufactured(const std::string& id, double k1 = 1.0, double k2 = 10.0);

}  // namespace cutflux
