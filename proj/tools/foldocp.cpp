#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "foldocp/harness/config.hpp"
#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/harness/export.hpp"
#include "foldocp/harness/scenario.hpp"
#include "foldocp/kernels.hpp"

using namespace foldocp;
using namespace foldocp::harness;

namespace {

void write_outputs(const ScenarioConfig& cfg, const RunReport& rep) {
  const std::string csv = cfg.output.dir + "/" + cfg.output.csv;
  export_csv(rep, csv);
  if (cfg.output.svg) export_svg_plots(rep, cfg.output.dir);
  std::printf("wrote %s\n", csv.c_str());
}

void print_summary(const RunReport& rep) {
  std::printf("scenario %s: %zu knots, converged %s, %d iterations",
              rep.scenario.c_str(), rep.records.size(), rep.solver.converged ? "yes" : "no",
              rep.solver.iterations);
  if (rep.continuation_stages > 0) std::printf(" (%d continuation stages)", rep.continuation_stages);
  std::printf("\n");
  std::printf("final residual %.3e, max knot residual %.3e, condition estimate %.3e\n",
              rep.solver.final_residual, rep.max_kkt_residual, rep.solver.condition_estimate);
  std::printf("final attitude error %.6e, cost %.6e, u in [%.6f, %.6f]%s\n",
              rep.final_attitude_error, rep.cost, rep.u_min, rep.u_max,
              rep.arm_in_box ? "" : " OUTSIDE the arm-angle box");
}

int run_solve(const std::string& path, const std::string& bc, const std::string& out) {
  ScenarioConfig cfg = load_config(path);
  if (!bc.empty()) {
    cfg.boundary = parse_boundary_mode(bc);
    cfg.validate();
  }
  if (!out.empty()) cfg.output.dir = out;
  const RunReport rep = run_scenario(cfg);
  print_summary(rep);
  write_outputs(cfg, rep);
  if (!rep.arm_in_box) {
    std::fprintf(stderr, "error: arm angle left the admissible box [%g, %g]\n", cfg.box.lo,
                 cfg.box.hi);
    return exit_code(ErrorKind::NoConvergence);
  }
  return 0;
}

int run_simulate(const std::string& path, const std::string& mode, const std::string& out) {
  ScenarioConfig cfg = load_config(path);
  if (!out.empty()) cfg.output.dir = out;
  const RunReport rep = simulate(cfg, mode == "rk4" ? SimulateMode::Rk4 : SimulateMode::Dlp);
  const double n0 = rep.records.front().Pi_norm;
  const double n1 = rep.records.back().Pi_norm;
  std::printf("simulate %s: %zu knots, |Pi| %.17g -> %.17g (relative change %.3e)\n", mode.c_str(),
              rep.records.size(), n0, n1, n0 > 0 ? std::abs(n1 - n0) / n0 : 0.0);
  write_outputs(cfg, rep);
  return 0;
}

int run_check(const std::string& suite, bool json, std::uint64_t seed) {
  const DiagnosticsSummary sum = run_checks(suite, seed);
  std::fputs(json ? sum.to_json().c_str() : sum.to_text().c_str(), stdout);
  return sum.all_pass() ? 0 : 1;
}

int run_sweep(const std::string& path, const std::string& param, const std::vector<double>& values,
              const std::string& out) {
  ScenarioConfig cfg = load_config(path);
  if (!out.empty()) cfg.output.dir = out;
  const auto rows = sweep(cfg, param, values);
  std::string csv = param + ",N,converged,iterations,final_residual,final_attitude_error,cost,error\n";
  bool all = true;
  std::printf("%-12s %6s %5s %5s %12s %12s %12s\n", param.c_str(), "N", "conv", "iter", "residual",
              "att_error", "cost");
  for (const auto& r : rows) {
    all = all && r.converged;
    std::printf("%-12.6g %6d %5s %5d %12.3e %12.3e %12.5e %s\n", r.value, r.N,
                r.converged ? "yes" : "no", r.iterations, r.final_residual, r.final_attitude_error,
                r.cost, r.error.c_str());
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%d,%.17g,%.17g,%.17g,", r.value, r.N,
                  r.converged ? 1 : 0, r.iterations, r.final_residual, r.final_attitude_error, r.cost);
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    csv += buf + err + "\n";
  }
  write_text(cfg.output.dir + "/sweep.csv", csv);
  std::printf("wrote %s/sweep.csv\n", cfg.output.dir.c_str());
  return all ? 0 : exit_code(ErrorKind::NoConvergence);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete optimal attitude control of a foldable quadrotor"};
  app.require_subcommand(1);

  std::string config, mode = "dlp", bc, suite = "all", param, out;
  std::vector<double> values;
  bool json = false;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "forward simulation of the unforced body");
  sim->add_option("--config", config, "scenario JSON")->required();
  sim->add_option("--mode", mode, "integrator")->check(CLI::IsMember({"rk4", "dlp"}));
  sim->add_option("--out", out, "output directory (overrides output.dir)");

  auto* sol = app.add_subcommand("solve", "solve the discrete optimal control problem");
  sol->add_option("--config", config, "scenario JSON")->required();
  sol->add_option("--bc", bc, "boundary conditions")
      ->check(CLI::IsMember({"fixed", "shooting", "free-terminal"}));
  sol->add_option("--out", out, "output directory (overrides output.dir)");

  auto* chk = app.add_subcommand("check", "run the diagnostics suites");
  chk->add_option("--suite", suite, "suite")
      ->check(CLI::IsMember({"liealg", "plant", "ocp", "varint", "solver", "all"}));
  chk->add_flag("--json", json, "machine-readable summary");
  chk->add_option("--seed", seed, "sampling seed");

  auto* swp = app.add_subcommand("sweep", "repeat a solve over parameter values");
  swp->add_option("--config", config, "scenario JSON")->required();
  swp->add_option("--param", param, "h, N, c1, c2, c3 or c4")->required();
  swp->add_option("--values", values, "parameter values")->required();
  swp->add_option("--out", out, "output directory (overrides output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::Validation);
  }

  try {
    if (*sim) return run_simulate(config, mode, out);
    if (*sol) return run_solve(config, bc, out);
    if (*chk) return run_check(suite, json, seed);
    if (*swp) return run_sweep(config, param == "h" ? "h_s" : param, values, out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
