#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "cutflux/harness.hpp"

namespace cutflux::test {

// One solved configuration with everything that refers back into it kept
// alive together (topology and field hold pointers).
struct Solved {
  Mesh mesh;
  ManufacturedCase mc;
  std::unique_ptr<CutTopology> topology;
  ProblemData data;
  std::unique_ptr<PrimalField> u;

  Solved(int nx, const std::string& id = "M1", double k1 = 1.0, double k2 = 10.0, std::optional<double> alpha = {},
         std::optional<double> slope = {})
      : mesh(build_structured_mesh(nx, nx)) {
    CaseConfig c;
    c.case_id = id;
    c.k1 = k1;
    c.k2 = k2;
    c.alpha = alpha;
    c.slope = slope;
    mc = case_data(c);
    topology = std::make_unique<CutTopology>(classify(mesh, mc.interface()));
    data = mc.problem();
    u = std::make_unique<PrimalField>(solve_primal(*topology, data, 1e-12));
  }
  Solved(const Solved&) = delete;
};

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// int_T x^a y^b over the reference triangle (0,0),(1,0),(0,1): a! b! / (a+b+2)!
inline double reference_monomial(int a, int b) {
  return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

}  // namespace cutflux::test
