#include "foldocp/harness/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "foldocp/kernels.hpp"

namespace foldocp::harness {

using liealg::Rotation;
using solver::BoundaryConditions;
using varint::DiscreteProblem;
using varint::DiscreteTrajectory;

ocp::Reference make_reference(const ScenarioConfig& cfg) {
  const ReferenceSpec r = cfg.reference;
  if (r.kind == ReferenceKind::Constant) {
    return ocp::Reference::constant(compose(r.roll, r.pitch, r.yaw));
  }
  const double rate = (r.yaw_end - r.yaw) / cfg.grid.T();
  const Vec3 I = plant::inertia_diag(cfg.plant.inertia, cfg.initial.u);
  ocp::Reference ref;
  ref.g_d = [r, rate](double t) { return compose(r.roll, r.pitch, r.yaw + rate * t); };
  ref.Pi_d = [r, rate, I](double t) {
    const Rotation g = compose(r.roll, r.pitch, r.yaw + rate * t);
    const Vec3 omega = g.matrix().transpose() * Vec3(0.0, 0.0, rate);
    return Vec3(I.cwiseProduct(omega));
  };
  return ref;
}

DiscreteProblem make_problem(const ScenarioConfig& cfg) {
  DiscreteProblem p;
  p.plant = cfg.plant;
  p.weights = cfg.weights;
  p.ref = make_reference(cfg);
  p.grid = cfg.grid;
  p.retraction = cfg.retraction;
  return p;
}

BoundaryConditions make_boundary(const ScenarioConfig& cfg) {
  const ocp::Reference ref = make_reference(cfg);
  BoundaryConditions bc;
  bc.mode = cfg.boundary;
  bc.initial.g = compose(cfg.initial.roll, cfg.initial.pitch, cfg.initial.yaw);
  bc.initial.Pi = cfg.initial.Pi;
  bc.initial.u = cfg.initial.u;
  const double T = cfg.grid.T();
  bc.terminal.g = ref.g_d(T);
  bc.terminal.Pi = ref.Pi_d(T);
  bc.terminal.u = cfg.initial.u;
  if (cfg.costate.given) {
    bc.p_Pi0 = cfg.costate.p_Pi;
    bc.p_xi0 = cfg.costate.p_xi;
    bc.u_dot0 = cfg.costate.u_dot;
  }
  return bc;
}

RunReport make_report(const ScenarioConfig& cfg, const DiscreteProblem& p,
                      const BoundaryConditions& bc, const DiscreteTrajectory& traj) {
  RunReport rep;
  rep.scenario = to_string(cfg.scenario);
  rep.box = cfg.box;
  const int N = traj.grid.N;
  const Eigen::VectorXd r = kernels::residual_serial(p, traj, bc);
  rep.u_min = rep.u_max = traj.knots[0].u;
  for (int k = 0; k <= N; ++k) {
    const auto& kn = traj.knots[k];
    KnotRecord rec;
    rec.t = traj.grid.t(k);
    const Rotation gd = p.ref.g_d(rec.t);
    rec.attitude = euler_angles(kn.g);
    rec.reference = euler_angles(gd);
    rec.error = Vec3(wrap_angle(rec.attitude.roll - rec.reference.roll),
                     wrap_angle(rec.attitude.pitch - rec.reference.pitch),
                     wrap_angle(rec.attitude.yaw - rec.reference.yaw));
    rec.u = kn.u;
    rec.tau = kn.tau;
    rec.Pi = kn.Pi;
    rec.Pi_norm = kn.Pi.norm();
    const int begin = k * solver::kSegment;
    const int len = k < N ? solver::kSegment : varint::kKnotDim;
    rec.kkt_residual = r.segment(begin, len).cwiseAbs().maxCoeff();
    rec.attitude_error = std::sqrt(ocp::attitude_error_sq(gd, kn.g));
    rep.max_kkt_residual = std::max(rep.max_kkt_residual, rec.kkt_residual);
    rep.u_min = std::min(rep.u_min, kn.u);
    rep.u_max = std::max(rep.u_max, kn.u);
    rep.arm_in_box = rep.arm_in_box && cfg.box.contains(kn.u);
    rep.records.push_back(rec);
  }
  rep.cost = varint::total_cost(p, traj);
  rep.final_attitude_error = rep.records.back().attitude_error;
  return rep;
}

namespace {

// Scales the initial attitude and momentum from the reference at t = 0 to the
// configured values and re-solves at each stage from the previous solution.
solver::SolveResult continuation_solve(const ScenarioConfig& cfg, const DiscreteProblem& p,
                                       const BoundaryConditions& bc, int& stages) {
  const Rotation g_ref = p.ref.g_d(0.0);
  const Vec3 Pi_ref = p.ref.Pi_d(0.0);
  const Vec3 delta = liealg::log_so3(g_ref.inverse() * bc.initial.g);
  const int n = cfg.continuation_steps;
  solver::SolverConfig sc = cfg.solver;
  sc.mode = solver::SolveMode::FullNewton;

  solver::SolveResult res;
  DiscreteTrajectory traj;
  for (int i = 1; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    BoundaryConditions b = bc;
    b.initial.g = g_ref * liealg::exp_so3(s * delta);
    b.initial.Pi = Pi_ref + s * (bc.initial.Pi - Pi_ref);
    if (i == 1) traj = solver::initial_guess(p, b);
    traj.knots[0].g = b.initial.g;
    traj.knots[0].Pi = b.initial.Pi;
    traj.knots[0].u = b.initial.u;
    const int prev = res.report.iterations;
    res = solver::newton_solve(p, traj, b, sc);
    res.report.iterations += prev;
    traj = res.traj;
  }
  stages = n;
  if (cfg.solver.mode == solver::SolveMode::Marching) res.traj = solver::march(p, res.traj, cfg.solver);
  return res;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario == ScenarioKind::FreeBody) return simulate(cfg, SimulateMode::Dlp);

  const DiscreteProblem p = make_problem(cfg);
  const BoundaryConditions bc = make_boundary(cfg);
  solver::SolveResult res;
  int stages = 0;
  const bool shooting = bc.mode == solver::BoundaryMode::InitialCostate ||
                        cfg.solver.mode == solver::SolveMode::Shooting;
  try {
    res = solver::solve(p, bc, cfg.solver);
  } catch (const NoConvergence&) {
    if (shooting || cfg.continuation_steps == 0) throw;
    res = continuation_solve(cfg, p, bc, stages);
  }
  // Shooting solves against boundary values matched to the extremal, so the
  // report uses the fixed-endpoint conditions it converged under.
  BoundaryConditions used = bc;
  if (shooting) {
    used.mode = solver::BoundaryMode::FixedEndpoints;
    used.initial = res.traj.knots.front();
    used.terminal = res.traj.knots.back();
  }
  RunReport rep = make_report(cfg, p, used, res.traj);
  rep.solver = res.report;
  rep.continuation_stages = stages;
  return rep;
}

RunReport simulate(const ScenarioConfig& cfg, SimulateMode mode) {
  cfg.validate();
  const DiscreteProblem p = make_problem(cfg);
  const int N = cfg.grid.N;
  const double h = cfg.grid.h;
  const double u = cfg.initial.u;

  std::vector<Rotation> g(N + 1);
  std::vector<Vec3> Pi(N + 1);
  g[0] = compose(cfg.initial.roll, cfg.initial.pitch, cfg.initial.yaw);
  Pi[0] = cfg.initial.Pi;
  int iterations = 0;
  if (mode == SimulateMode::Rk4) {
    plant::ControlInput in;
    in.u = u;
    plant::PlantState s{g[0], Pi[0]};
    for (int k = 0; k < N; ++k) {
      s = plant::rk4_step(cfg.plant, s, in, h);
      if ((k + 1) % plant::kReorthoInterval == 0) s.g = liealg::orthonormalize(s.g);
      g[k + 1] = s.g;
      Pi[k + 1] = s.Pi;
    }
  } else {
    const Vec3 I = plant::inertia_diag(cfg.plant.inertia, u);
    for (int k = 0; k < N; ++k) {
      const varint::DlpStep st = varint::free_dlp_step(I, h, g[k], Pi[k], cfg.retraction);
      g[k + 1] = (k + 1) % plant::kReorthoInterval == 0 ? liealg::orthonormalize(st.g) : st.g;
      Pi[k + 1] = st.m;
      iterations += st.iterations;
    }
  }

  RunReport rep;
  rep.scenario = to_string(cfg.scenario);
  rep.box = cfg.box;
  rep.u_min = rep.u_max = u;
  rep.arm_in_box = cfg.box.contains(u);
  for (int k = 0; k <= N; ++k) {
    KnotRecord rec;
    rec.t = cfg.grid.t(k);
    const Rotation gd = p.ref.g_d(rec.t);
    rec.attitude = euler_angles(g[k]);
    rec.reference = euler_angles(gd);
    rec.error = Vec3(wrap_angle(rec.attitude.roll - rec.reference.roll),
                     wrap_angle(rec.attitude.pitch - rec.reference.pitch),
                     wrap_angle(rec.attitude.yaw - rec.reference.yaw));
    rec.u = u;
    rec.Pi = Pi[k];
    rec.Pi_norm = Pi[k].norm();
    rec.attitude_error = std::sqrt(ocp::attitude_error_sq(gd, g[k]));
    rep.records.push_back(rec);
  }
  rep.final_attitude_error = rep.records.back().attitude_error;
  rep.solver.converged = true;
  rep.solver.iterations = iterations;
  return rep;
}

std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& param,
                            const std::vector<double>& values) {
  static const char* known[] = {"h_s", "h", "N", "c1", "c2", "c3", "c4"};
  if (std::find(std::begin(known), std::end(known), param) == std::end(known)) {
    throw ValidationError("sweep parameter must be one of h_s, N, c1, c2, c3, c4 (got '" + param +
                          "')");
  }
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  const double T = cfg.grid.T();
  for (double v : values) {
    ScenarioConfig c = cfg;
    SweepRow row;
    row.value = v;
    if (param == "h_s" || param == "h") {
      c.grid.h = v;
      c.grid.N = v > 0.0 ? static_cast<int>(std::lround(T / v)) : 0;
    } else if (param == "N") {
      c.grid.N = static_cast<int>(std::lround(v));
      c.grid.h = T / c.grid.N;
    } else if (param == "c1") {
      c.weights.c1 = v;
    } else if (param == "c2") {
      c.weights.c2 = v;
    } else if (param == "c3") {
      c.weights.c3 = v;
    } else {
      c.weights.c4 = v;
    }
    row.N = c.grid.N;
    try {
      const RunReport rep = run_scenario(c);
      row.converged = rep.solver.converged;
      row.iterations = rep.solver.iterations;
      row.final_residual = rep.solver.final_residual;
      row.final_attitude_error = rep.final_attitude_error;
      row.cost = rep.cost;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace foldocp::harness
