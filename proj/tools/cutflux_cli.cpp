// Command line driver: run one case, a convergence study, or the robustness sweep.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cutflux/errors.hpp"
#include "cutflux/harness.hpp"

namespace {

using namespace cutflux;

struct Options {
  std::string config;
  std::string out = ".";
  std::string flux;
};

CaseConfig prepare(const Options& opt) {
  CaseConfig config = opt.config.empty() ? CaseConfig{} : load_config_file(opt.config);
  if (!opt.flux.empty()) config.flux = parse_flux_method(opt.flux);
  config.validate();
  return config;
}

std::ofstream create(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write '" + path + "'");
  return out;
}

int run(const Options& opt) {
  const CaseConfig config = prepare(opt);
  const CaseResult r = run_case(config, opt.out);
  std::printf("case %s  flux %s  nx %d  dofs %d+%d  cut cells %d  cg %d its\n", r.case_id.c_str(), to_string(r.flux),
              r.nx, r.dofs[0], r.dofs[1], r.cut_cells, r.iterations);
  if (r.has_exact) {
    std::printf("energy error %.6e  L2 error %.6e  effectivity %.4f\n", r.energy_error, r.l2_error,
                r.estimators.effectivity);
  }
  std::printf("eta %.6e  eta_gamma %.6e  osc %.6e\n", r.estimators.eta, r.estimators.eta_gamma,
              r.estimators.epsilon);
  std::printf("conservation %.3e  transmission %.3e  identity %.3e  constraint %.3e  kernel %.3e\n", r.conservation,
              r.transmission, r.multiplier_identity, r.constraint, r.kernel);
  if (r.flux != FluxMethod::irt0) std::printf("subdomain flux interface jump %.6e\n", r.rt_interface_jump);
  std::printf("wall %.2f s  audits %s\n", r.wall_seconds, r.audits_pass() ? "pass" : "FAIL");
  return r.audits_pass() ? 0 : 1;
}

int converge(const Options& opt) {
  const CaseConfig config = prepare(opt);
  const ConvergenceStudy study = convergence_study(config);
  auto out = create(opt.out, "convergence.csv");
  write_convergence_csv(study, out);
  bool audits = true;
  for (const auto& row : study.rows) {
    std::printf("nx %3d  h %.4e  energy %.6e  L2 %.6e  effectivity %.4f  audits %s\n", row.nx, row.h,
                row.energy_error, row.l2_error, row.effectivity, row.audits_pass ? "pass" : "FAIL");
    audits = audits && row.audits_pass;
  }
  std::printf("rates: energy %.3f  L2 %.3f  (%s)\n", study.energy_rate, study.l2_rate,
              study.rates_pass() ? "pass" : "FAIL");
  std::printf("effectivity in [%.4f, %.4f]  (%s)\n", study.min_effectivity, study.max_effectivity,
              study.effectivity_pass() ? "pass" : "FAIL");
  return audits && study.rates_pass() && study.effectivity_pass() ? 0 : 1;
}

int sweep(const Options& opt) {
  const CaseConfig config = prepare(opt);
  const RobustnessSweep result = robustness_sweep(config);
  auto out = create(opt.out, "sweep.csv");
  write_sweep_csv(result, out);
  for (const auto& row : result.rows) {
    std::printf("k2/k1 %-7g offset %-7g h  %-16s cons %.2e  trans %.2e  eff %.4f  %s\n", row.contrast, row.offset,
                row.status.c_str(), row.conservation, row.transmission, row.effectivity, row.pass ? "pass" : "FAIL");
  }
  std::printf("effectivity spread %.3f  (%s)\n", result.effectivity_spread, result.pass() ? "pass" : "FAIL");
  return result.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CutFEM interface solver with equilibrated flux reconstruction"};
  app.require_subcommand(1);
  Options opt;
  auto add = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--flux", opt.flux, "flux reconstruction")->check(CLI::IsMember({"rt0", "rt1", "irt0"}));
  };
  auto* run_cmd = app.add_subcommand("run", "solve one case and write its report");
  auto* converge_cmd = app.add_subcommand("converge", "refinement study with fitted rates");
  auto* sweep_cmd = app.add_subcommand("sweep", "contrast / interface offset sweep");
  add(run_cmd);
  add(converge_cmd);
  add(sweep_cmd);
  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run(opt);
    if (converge_cmd->parsed()) return converge(opt);
    return sweep(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
