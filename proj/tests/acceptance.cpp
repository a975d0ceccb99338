// Acceptance criteria 1-10. One line per criterion:
//   [PASS] C<n> <name>: <measured> (<threshold>) <detail>
// Usage: acceptance <path-to-foldocp> [n ...]   (no numbers: run all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "foldocp/harness/config.hpp"
#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/harness/euler.hpp"
#include "foldocp/harness/scenario.hpp"
#include "foldocp/kernels.hpp"
#include "foldocp/solver.hpp"

using namespace foldocp;
using liealg::Mat3;
using liealg::Vec3;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string text;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string e3(double v) { return fmt("%.3e", v); }

std::mt19937_64 rng(20240601);

Vec3 random_ball(double r) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  while (true) {
    const Vec3 v(d(rng), d(rng), d(rng));
    if (v.squaredNorm() <= 1.0) return r * v;
  }
}

Outcome c1_cayley() {
  double orth = 0.0, closed = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 x = random_ball(10.0);
    const Mat3 c = liealg::cay(x).matrix();
    const Mat3 X = liealg::hat(x);
    const Mat3 ref = (Mat3::Identity() - X).inverse() * (Mat3::Identity() + X);
    orth = std::max(orth, (c.transpose() * c - Mat3::Identity()).norm());
    closed = std::max(closed, (c - ref).norm());
  }
  return {orth < 1e-12 && closed < 1e-12,
          "orthogonality " + e3(orth) + ", closed form vs (I-X)^-1(I+X) " + e3(closed) +
              " (< 1e-12, 10^4 samples, |x| <= 10)"};
}

Outcome c2_dcay() {
  double worst = 0.0;
  const double eps = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = random_ball(5.0);
    const Vec3 v = random_ball(1.0);
    const Mat3 D = (liealg::cay(x + eps * v).matrix() - liealg::cay(x - eps * v).matrix()) /
                   (2 * eps) * liealg::cay(x).matrix().transpose();
    const Vec3 fd = 0.5 * liealg::vee(0.5 * (D - D.transpose()));
    const Vec3 ex = liealg::dcay(x, v);
    worst = std::max(worst, (fd - ex).norm() / ex.norm());
  }
  std::string table = "\n      |x|        vs raw differential   vs normalized";
  for (const auto& r : harness::dcay_deviation_table(6, 7)) {
    table += "\n      " + e3(r.norm_x) + "  " + e3(r.vs_raw) + "             " + e3(r.vs_normalized);
  }
  return {worst < 1e-6, "max relative FD error " + e3(worst) + " (< 1e-6, 10^3 samples)" + table};
}

Outcome c3_casimir() {
  const auto pl = plant::Plant::calibrated();
  const auto cs = harness::casimir_study(pl, plant::kNominalArmAngle, Vec3(0.3, 0.1, 0.2), 0.01,
                                         100000);
  const double ratio = cs.rk4_drift / std::max(cs.dlp_drift, 1e-300);
  return {cs.dlp_drift < 1e-10 && ratio >= 1e3,
          "DLP drift " + e3(cs.dlp_drift) + " (< 1e-10), RK4 drift " + e3(cs.rk4_drift) +
              ", ratio " + e3(ratio) + " (>= 1e3), 10^5 steps at h = 0.01"};
}

Outcome c4_order() {
  const auto rows = harness::trapezoidal_order_study(plant::Plant::calibrated(),
                                                     {0.02, 0.01, 0.005}, 1.0);
  bool ok = rows.size() == 3;
  std::string s;
  for (const auto& r : rows) {
    s += "h=" + fmt("%g", r.h) + " err=" + e3(r.error);
    if (r.ratio > 0.0) {
      s += " ratio=" + fmt("%.3f", r.ratio);
      ok = ok && r.ratio >= 3.5 && r.ratio <= 4.5;
    }
    s += "; ";
  }
  return {ok, s + "(ratios in [3.5, 4.5])"};
}

Outcome c5_kkt() {
  auto cfg = harness::default_config(harness::ScenarioKind::Tracking);
  cfg.grid.N = 100;
  cfg.solver.tol_residual = 1e-11;
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto res = solver::newton_solve(p, solver::initial_guess(p, bc), bc, cfg.solver);
  if (!res.report.converged) return {false, "Newton did not converge"};
  const double S = varint::extended_cost(p, res.traj);
  const Eigen::VectorXd fd = harness::fd_gradient(p, res.traj);
  // g_0, Pi_0 and u_0 are imposed, so their rows are boundary equations
  double worst = 0.0;
  for (int i = 0; i < fd.size(); ++i) {
    if (i < 7) continue;
    worst = std::max(worst, std::abs(fd(i)));
  }
  const double tol = 1e-6 * (1.0 + std::abs(S));

  // tau_k from the closed form, then the derivative of S in tau_k by central
  // differences (S is quadratic in tau, so the difference is exact up to rounding)
  auto ts = res.traj;
  const int N = p.grid.N;
  for (int k = 0; k <= N; ++k) {
    ts.knots[k].tau = varint::tau_k_star(p.weights, p.plant.actuation, varint::lambda_bar(ts, k),
                                         ts.knots[k].u);
  }
  double taures = 0.0, tau_gap = 0.0;
  const double e = 1e-3;
  for (int k = 0; k <= N; ++k) {
    tau_gap = std::max(tau_gap, (ts.knots[k].tau - res.traj.knots[k].tau).cwiseAbs().maxCoeff());
    for (int j = 0; j < 4; ++j) {
      auto tp = ts, tm = ts;
      tp.knots[k].tau(j) += e;
      tm.knots[k].tau(j) -= e;
      const double d = (varint::extended_cost(p, tp) - varint::extended_cost(p, tm)) / (2 * e);
      taures = std::max(taures, std::abs(d) / p.grid.h);
    }
  }
  return {worst < tol && taures < 1e-10,
          "max |dS/dz| over free unknowns " + e3(worst) + " (< " + e3(tol) + "), N = 100, " +
              std::to_string(res.report.iterations) + " Newton iterations; closed-form tau: " +
              "max |dS/dtau|/h " + e3(taures) + " (< 1e-10), gap to Newton tau " + e3(tau_gap)};
}

Outcome c6_regularity() {
  const auto rows = harness::regularity_sweep(ocp::CostWeights{}, {0.04, 0.02, 0.01, 0.005});
  const double slope = harness::loglog_slope(rows);
  bool singular = false;
  auto cfg = harness::default_config(harness::ScenarioKind::Tracking);
  cfg.grid.N = 10;
  auto p = harness::make_problem(cfg);
  p.weights.c1 = 0.0;
  const auto bc = harness::make_boundary(cfg);
  try {
    solver::newton_solve(p, solver::initial_guess(p, bc), bc, cfg.solver);
  } catch (const SingularError&) {
    singular = true;
  } catch (const std::exception&) {
  }
  return {std::abs(slope + 1.0) <= 0.1 && singular,
          "log-log slope " + fmt("%.4f", slope) + " (-1 +- 0.1); c1 = 0 -> " +
              (singular ? "SingularError" : "no SingularError")};
}

Outcome c7_stabilization() {
  const auto cfg = harness::default_config(harness::ScenarioKind::Stabilization);
  const auto rep = harness::run_scenario(cfg);
  const bool ok = rep.solver.converged && rep.final_attitude_error < 0.05 && rep.arm_in_box;
  return {ok, "final attitude error " + e3(rep.final_attitude_error) + " (< 0.05), u in [" +
                  fmt("%.4f", rep.u_min) + ", " + fmt("%.4f", rep.u_max) + "] within box [" +
                  fmt("%.4f", rep.box.lo) + ", " + fmt("%.4f", rep.box.hi) + "], " +
                  std::to_string(rep.solver.iterations) + " iterations, T = 5 s"};
}

Outcome c8_shooting() {
  const double T = 0.3;
  std::vector<double> disc;
  std::string s;
  for (const double h : {0.02, 0.01, 0.005}) {
    varint::DiscreteProblem q;
    q.plant = plant::Plant::calibrated();
    q.grid = {h, static_cast<int>(std::lround(T / h))};
    solver::BoundaryConditions b;
    b.mode = solver::BoundaryMode::InitialCostate;
    b.initial.g = harness::compose(1.0821, 0.0, 0.0);
    b.p_Pi0 = Vec3(0.0752, 0.0091, 0.0049);
    b.p_xi0 = Vec3(0.0227, 0.0027, 0.0020);
    const auto ext = solver::shooting_extremal(q, b, 20);
    const auto [fixed, guess] = solver::shooting_matched(q, ext);
    try {
      const auto res = solver::newton_solve(q, guess, fixed, solver::SolverConfig{});
      double d = 0.0;
      for (int k = 0; k <= q.grid.N; ++k) {
        const auto& kn = res.traj.knots[k];
        d = std::max(d, (kn.g.matrix() - ext[k].g.matrix()).norm());
        d = std::max(d, (kn.Pi - ext[k].Pi).cwiseAbs().maxCoeff());
        d = std::max(d, std::abs(kn.u - ext[k].u));
      }
      disc.push_back(d);
      s += "h=" + fmt("%g", h) + " sup=" + e3(d) + "; ";
    } catch (const std::exception& e) {
      return {false, s + "h=" + fmt("%g", h) + " failed: " + e.what()};
    }
  }
  bool ok = true;
  for (std::size_t i = 1; i < disc.size(); ++i) {
    const double r = disc[i - 1] / disc[i];
    s += "ratio " + fmt("%.2f", r) + "; ";
    ok = ok && r >= 1.7;
  }
  return {ok, s + "(>= 1.7 per halving, T = 0.3 s)"};
}

Outcome c9_marching() {
  auto cfg = harness::default_config(harness::ScenarioKind::Tracking);
  cfg.solver.tol_residual = 1e-12;
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto ref = solver::newton_solve(p, solver::initial_guess(p, bc), bc, cfg.solver).traj;
  // Marching starts from the first block c_{0,1} and (lambda_0, mu_0).
  auto traj = ref;
  const int N = p.grid.N;
  double sup = 0.0, first = 0.0;
  int reached = 0;
  std::string failure;
  for (int k = 1; k < N; ++k) {
    const auto& a = traj.knots[k - 1];
    const auto& c = traj.knots[k];
    auto& n = traj.knots[k + 1];
    n.g = c.g * a.g.inverse() * c.g;
    n.Pi = 2 * c.Pi - a.Pi;
    n.u = 2 * c.u - a.u;
    n.tau = 2 * c.tau - a.tau;
    traj.multipliers[k] = traj.multipliers[k - 1];
    try {
      solver::step_map(p, traj, k, cfg.solver);
    } catch (const std::exception& e) {
      failure = e.what();
      break;
    }
    reached = k + 1;
    const auto& m = traj.knots[k + 1];
    const auto& r = ref.knots[k + 1];
    sup = std::max({sup, (m.g.matrix() - r.g.matrix()).cwiseAbs().maxCoeff(),
                    (m.Pi - r.Pi).cwiseAbs().maxCoeff(), std::abs(m.u - r.u)});
    if (k == 1) first = sup;
  }
  const bool ok = failure.empty() && sup < 1e-6;
  std::string s = "marched to knot " + std::to_string(reached) + " of " + std::to_string(N) +
                  ", sup discrepancy " + e3(sup) + " (< 1e-6), after the first step " + e3(first);
  if (!failure.empty()) s += "; marching stopped: " + failure;
  return {ok, s};
}

Outcome c10_determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "foldocp_acceptance_c10";
  fs::remove_all(root);
  const fs::path config = fs::path(FOLDOCP_SOURCE_DIR) / "configs" / "tracking.json";
  std::string bytes[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = root / ("run" + std::to_string(i));
    const std::string cmd = "\"" + cli + "\" solve --config \"" + config.string() + "\" --out \"" +
                            out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, "foldocp solve exited with status " + std::to_string(rc)};
    std::ifstream in(out / "trajectory.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes[i] = ss.str();
  }
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
  return {ok, std::to_string(bytes[0].size()) + " CSV bytes, " +
                  (ok ? "identical" : "different") + " across two runs of configs/tracking.json"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-foldocp> [criterion ...]\n");
    return 2;
  }
  const std::string cli = argv[1];
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"cayley_correctness", c1_cayley},
      {"trivialized_tangent", c2_dcay},
      {"discrete_casimir", c3_casimir},
      {"order_of_accuracy", c4_order},
      {"kkt_gradient_contract", c5_kkt},
      {"regularity_asymptotics", c6_regularity},
      {"stabilization_scenario", c7_stabilization},
      {"continuous_discrete_crosscheck", c8_shooting},
      {"cross_mode_agreement", c9_marching},
      {"determinism", [&] { return c10_determinism(cli); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] C%d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", n,
                criteria[i].first.c_str(), o.text.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
