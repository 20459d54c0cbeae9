// Acceptance driver: one PASS/FAIL line per criterion. Reads a pinned config
// (configs/acceptance.ini by default); exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cutflux/errors.hpp"
#include "cutflux/harness.hpp"

using namespace cutflux;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d %-24s %s  %s\n", id, name, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

std::vector<int> levels(const CaseConfig& config) {
  std::vector<int> nx;
  for (int l = 0; l < config.levels; ++l) nx.push_back(config.base_nx << l);
  return nx;
}

struct Worst {
  double conservation = 0.0;
  double transmission = 0.0;
  double identity = 0.0;
  double constraint = 0.0;
  double kernel = 0.0;
  bool ok = true;
  double seconds = 0.0;
  int runs = 0;
};

// Every case x mesh x contrast with one flux method.
Worst case_sweep(const CaseConfig& config, FluxMethod flux) {
  Worst w;
  const auto start = Clock::now();
  for (const char* id : {"M0", "M1", "M2"}) {
    for (int nx : levels(config)) {
      for (double contrast : config.contrasts) {
        CaseConfig c = config;
        c.case_id = id;
        c.nx = c.ny = nx;
        c.k1 = 1.0;
        c.k2 = contrast;
        c.flux = flux;
        try {
          const CaseResult r = run_case(c);
          const double cons_tol = r.f_norm > 0.0 ? kConservationTolerance : kTrivialTolerance;
          w.ok = w.ok && r.conservation <= cons_tol && r.max_patch_residual <= kPatchTolerance;
          w.conservation = std::max(w.conservation, r.conservation);
          w.transmission = std::max({w.transmission, r.transmission, r.edge_violation});
          w.identity = std::max(w.identity, r.multiplier_identity);
          w.constraint = std::max(w.constraint, r.constraint);
          w.kernel = std::max(w.kernel, r.kernel);
        } catch (const Error& e) {
          std::printf("  %s nx=%d k2=%g: %s\n", id, nx, contrast, e.what());
          w.ok = false;
        }
        ++w.runs;
      }
    }
  }
  w.seconds = seconds_since(start);
  return w;
}

Vec2 classical_rt0(const std::array<Vec2, 3>& v, int l, const Vec2& x) {
  const double area = signed_area(v[0], v[1], v[2]);
  const double h = (v[(l + 1) % 3] - v[l]).norm();
  return h / (2.0 * area) * (x - v[(l + 2) % 3]);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "configs/acceptance.ini";
  CaseConfig config;
  try {
    config = load_config_file(path);
  } catch (const Error& e) {
    std::printf("cannot load %s: %s\n", path.c_str(), e.what());
    return 2;
  }
  std::printf("config %s  gamma %g  beta %g\n", path.c_str(), config.gamma, config.beta);

  // 1, 2, 4: IRT0 over the full case sweep
  const Worst irt = case_sweep(config, FluxMethod::irt0);
  report(1, "irt-conservation", irt.ok && irt.conservation <= kConservationTolerance && irt.seconds < 60.0,
         fmt("max %.3e over %.0f runs in %.1f s", irt.conservation, irt.runs, irt.seconds));

  double rt_jump = 0.0;
  {
    CaseConfig c = config;
    c.case_id = "M1";
    c.nx = c.ny = config.base_nx;
    c.k1 = 1.0;
    c.k2 = 10.0;
    c.flux = FluxMethod::rt0;
    rt_jump = run_case(c).rt_interface_jump;
  }
  report(2, "strong-transmission", irt.ok && irt.transmission <= kTransmissionTolerance && rt_jump > 0.0,
         fmt("irt max %.3e, subdomain rt0 jump %.3e", irt.transmission, rt_jump));

  // 3: subdomain RT^m
  const Worst rt0 = case_sweep(config, FluxMethod::rt0);
  const Worst rt1 = case_sweep(config, FluxMethod::rt1);
  report(3, "subdomain-conservation",
         rt0.ok && rt1.ok && rt0.conservation <= kConservationTolerance && rt1.conservation <= kConservationTolerance,
         fmt("m=0 %.3e, m=1 %.3e in %.1f s", rt0.conservation, rt1.conservation, rt0.seconds + rt1.seconds));

  report(4, "multiplier", irt.identity <= kIdentityTolerance && irt.kernel == 0.0 && irt.constraint <= kConstraintTolerance,
         fmt("identity %.3e, kernel %.3e, constraint %.3e", irt.identity, irt.kernel, irt.constraint));

  // 5, 6: convergence and effectivity on M1; 8 is printed after 7
  bool sweep_rows = true, degenerate = false;
  std::size_t sweep_size = 0;
  std::string message = "no error";
  {
    CaseConfig c = config;
    c.case_id = "M1";
    c.flux = FluxMethod::irt0;
    const auto start = Clock::now();
    const ConvergenceStudy study = convergence_study(c);
    const double secs = seconds_since(start);
    bool audits = true;
    for (const auto& row : study.rows) audits = audits && row.audits_pass;
    report(5, "convergence", study.rates_pass() && audits && secs < 120.0,
           fmt("energy rate %.3f, L2 rate %.3f in %.1f s", study.energy_rate, study.l2_rate, secs));

    const RobustnessSweep sweep = robustness_sweep(c);
    report(6, "effectivity", study.effectivity_pass() && sweep.effectivity_spread <= kEffectivitySweepSpread,
           fmt("levels [%.2f, %.2f], contrast spread %.2f", study.min_effectivity, study.max_effectivity,
               sweep.effectivity_spread));

    // 8: offset sweep plus the degenerate placement
    {
      CaseConfig d = c;
      d.nx = d.ny = config.sweep_nx;
      d.alpha = 0.5;
      d.slope = 0.0;
      try {
        run_case(d);
      } catch (const Error& e) {
        degenerate = e.kind() == ErrorKind::degenerate_cut;
        message = e.what();
      }
    }
    for (const auto& r : sweep.rows) sweep_rows = sweep_rows && r.pass;
    sweep_size = sweep.rows.size();
  }

  // 7: inf-sup smoke test
  {
    const auto start = Clock::now();
    auto estimate = [&](int nx, double k2) {
      const Mesh mesh = build_structured_mesh(nx, nx);
      const ManufacturedCase mc = manufactured("M1", 1.0, k2);
      const CutTopology topology = classify(mesh, mc.interface());
      const auto beta = verify_infsup_smoke(topology, mc.problem(config.gamma, config.beta));
      return beta.value_or(0.0);
    };
    const double b4 = estimate(4, 1.0), b8 = estimate(8, 1.0);
    std::vector<double> per_contrast;
    for (double k2 : config.contrasts) per_contrast.push_back(estimate(4, k2));
    const auto [lo, hi] = std::minmax_element(per_contrast.begin(), per_contrast.end());
    const double secs = seconds_since(start);
    const bool pass = b4 > 0.0 && b8 > 0.0 && std::max(b4, b8) <= 2.0 * std::min(b4, b8) && *lo > 0.0 &&
                      *hi <= 3.0 * *lo && secs < 10.0;
    report(7, "inf-sup", pass, fmt("nx4 %.4f, nx8 %.4f, contrast range [%.4f, %.4f]", b4, b8, *lo, *hi) +
                                   fmt(" in %.1f s", secs));
  }

  report(8, "geometric-robustness", sweep_rows && degenerate,
         fmt("%.0f sweep rows, offset 0: ", static_cast<double>(sweep_size)) + message);

  // 9: trivial data and equal coefficients
  {
    const Mesh mesh = build_structured_mesh(config.base_nx, config.base_nx);
    const ManufacturedCase mc = manufactured("M0", 1.0, 10.0);
    const CutTopology topology = classify(mesh, mc.interface());
    const ProblemData data = mc.problem(config.gamma, config.beta);
    const PrimalField u = solve_primal(topology, data, config.tol);
    const MultiplierResult mult = build_multiplier(u, data);
    const GlobalIRTFlux sigma = reconstruct_irt(u, mult.theta, data);
    double flux = max_abs(sigma.edge_flux);
    for (const auto& cell : sigma.cells) {
      for (const auto& c : cell) flux = std::max(flux, c.cwiseAbs().maxCoeff());
    }
    const EstimatorReport est = estimate(flux_eval(sigma), u, data);
    const double zeros = std::max({max_abs(u.coefficients()), multiplier_norm(mult.theta, topology, data), flux,
                                   est.eta, est.eta_gamma, est.epsilon});

    CaseConfig c = config;
    c.case_id = "M0";
    c.nx = c.ny = config.base_nx;
    const CaseResult r = run_case(c);
    const double audits = std::max({r.conservation, r.transmission, r.edge_violation, r.multiplier_identity,
                                    r.constraint, r.kernel});

    double basis = 0.0;
    for (double k : config.contrasts) {
      const Mesh m = build_structured_mesh(config.sweep_nx, config.sweep_nx);
      const CutTopology t = classify(m, manufactured("M2").interface());
      for (const CutCell& cell : t.cut_cells()) {
        const IRTLocalBasis b = irt_local_basis(cell, k, k);
        for (int l = 0; l < 3; ++l) {
          for (int i = 0; i < kNumPhases; ++i) {
            for (const Vec2& x : cell.piece[i]) {
              basis = std::max(basis, (b.value(l, i, x) - classical_rt0(cell.vertices, l, x)).norm());
            }
          }
        }
      }
    }
    report(9, "trivial-cases", zeros <= kTrivialTolerance && audits <= kTrivialTolerance && basis <= 1e-10,
           fmt("zero data max %.3e, audits %.3e, equal-k basis %.3e", zeros, audits, basis));
  }

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
