#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "foldocp/harness/config.hpp"

// Module-level checks reported with measured values. Failures are recorded,
// not thrown.
namespace foldocp::harness {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct DcayRow {
  double norm_x = 0.0;
  double vs_raw = 0.0;         // |dcay_printed - raw differential|, max over directions
  double vs_normalized = 0.0;  // |dcay_printed - dcay_matrix|
};

struct OrderRow {
  double h = 0.0;
  double error = 0.0;
  double ratio = 0.0;  // error(2h) / error(h), 0 for the first row
};

struct RegularityRow {
  double h = 0.0;
  double block = 0.0;
  double predicted = 0.0;  // c1 / h
};

struct CasimirStudy {
  double dlp_drift = 0.0;  // relative drift of the carried momentum norm
  double rk4_drift = 0.0;
  int steps = 0;
};

struct DiagnosticsSummary {
  std::vector<CheckResult> checks;
  std::vector<DcayRow> dcay_table;
  std::vector<OrderRow> order_table;
  std::vector<RegularityRow> regularity_table;
  std::vector<varint::DiscrepancyRow> discrepancy_table;
  double regularity_slope = 0.0;

  bool all_pass() const;
  std::string to_json() const;
  std::string to_text() const;
};

// suite: liealg, plant, ocp, varint, solver or all. Throws ValidationError
// for other names.
DiagnosticsSummary run_checks(const std::string& suite, std::uint64_t seed = 0);

std::vector<DcayRow> dcay_deviation_table(int samples, std::uint64_t seed);

// Trapezoidal discrete dynamics under a smooth forcing program against a
// fine RK4 reference, terminal-state error per h.
std::vector<OrderRow> trapezoidal_order_study(const plant::Plant& plant,
                                              const std::vector<double>& hs, double T);

// Regularity block at an interior knot of the initial guess for each h.
std::vector<RegularityRow> regularity_sweep(const ocp::CostWeights& w,
                                            const std::vector<double>& hs);
double loglog_slope(const std::vector<RegularityRow>& rows);

// Unforced body at fixed arm angle u: the discrete Lie-Poisson stepper
// against RK4 at the same step.
CasimirStudy casimir_study(const plant::Plant& plant, double u, const Vec3& Pi0, double h,
                           int steps);

// Gradient of the extended cost in the unknown layout of the solver, from the
// exact partial derivatives and from central differences in the chart at traj.
Eigen::VectorXd exact_gradient(const varint::DiscreteProblem& p,
                               const varint::DiscreteTrajectory& traj);
Eigen::VectorXd fd_gradient(const varint::DiscreteProblem& p,
                            const varint::DiscreteTrajectory& traj, double eps = 1e-6);

// max over unknowns of |FD of the extended cost - exact gradient| relative to
// 1 + |exact|, in the chart at traj.
double kkt_fd_error(const varint::DiscreteProblem& p, const varint::DiscreteTrajectory& traj,
                    double eps = 1e-6);

}  // namespace foldocp::harness
