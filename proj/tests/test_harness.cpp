#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "foldocp/harness/config.hpp"
#include "foldocp/harness/euler.hpp"
#include "foldocp/harness/export.hpp"
#include "foldocp/harness/scenario.hpp"
#include "test_util.hpp"

using namespace foldocp;
using namespace foldocp::harness;
using foldocp::testing::Rng;
using foldocp::testing::uniform;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("foldocp_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, SerializeParseRoundTrip) {
  for (const auto kind : {ScenarioKind::Stabilization, ScenarioKind::Tracking, ScenarioKind::FreeBody}) {
    const ScenarioConfig a = default_config(kind);
    const std::string text = serialize_config(a);
    const ScenarioConfig b = parse_config(text);
    EXPECT_EQ(serialize_config(b), text);
    EXPECT_EQ(b.grid.N, a.grid.N);
    EXPECT_EQ(b.weights.c4, a.weights.c4);
    EXPECT_EQ(b.initial.roll, a.initial.roll);
  }
}

TEST(Config, MinimalConfigTakesScenarioDefaults) {
  const ScenarioConfig c = parse_config(R"({"scenario": "stabilization"})");
  EXPECT_EQ(c.scenario, ScenarioKind::Stabilization);
  EXPECT_DOUBLE_EQ(c.initial.roll, 1.0821);
  EXPECT_DOUBLE_EQ(c.grid.h, 0.01);
  EXPECT_EQ(c.grid.N, 500);
  EXPECT_DOUBLE_EQ(c.weights.c1, 0.01);
  EXPECT_DOUBLE_EQ(c.weights.c4, 0.1);
}

TEST(Config, NegativeArmRateWeightIsRejected) {
  EXPECT_THROW(parse_config(R"({"weights": {"c1": -1.0}})"), ValidationError);
}

TEST(Config, ZeroArmRateWeightIsSingular) {
  EXPECT_THROW(parse_config(R"({"weights": {"c1": 0.0}})"), SingularError);
}

TEST(Config, RejectsUnknownFieldsAndBadValues) {
  EXPECT_THROW(parse_config(R"({"grid": {"h_s": 0.01, "steps": 10}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"grid": {"N": 0}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"grid": {"h_s": -0.01}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"scenario": "hover"})"), ParseError);
  EXPECT_THROW(parse_config("{\n\"grid\": {\n"), ParseError);
  EXPECT_THROW(parse_config(R"({"initial": {"u_rad": 1.6}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"boundary": "shooting", "costate": null})"), ValidationError);
}

TEST(Config, MissingFileIsAnIoError) {
  EXPECT_THROW(load_config("/nonexistent/foldocp.json"), IoError);
}

TEST(Config, BoundaryModeNames) {
  for (const auto m : {solver::BoundaryMode::FixedEndpoints, solver::BoundaryMode::InitialCostate,
                       solver::BoundaryMode::FreeTerminal}) {
    EXPECT_EQ(parse_boundary_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_boundary_mode("periodic"), ValidationError);
}

TEST(Euler, RoundTripAwayFromGimbalLock) {
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const EulerAngles a{uniform(rng, -3.1, 3.1), uniform(rng, -1.5, 1.5), uniform(rng, -3.1, 3.1)};
    const EulerAngles b = euler_angles(compose(a));
    EXPECT_NEAR(a.roll, b.roll, 1e-9);
    EXPECT_NEAR(a.pitch, b.pitch, 1e-9);
    EXPECT_NEAR(a.yaw, b.yaw, 1e-9);
  }
  EXPECT_THROW(euler_angles(compose(0.1, std::numbers::pi / 2, 0.2)), GimbalLock);
}

TEST(Euler, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.25), -0.25, 1e-15);
}

TEST(Export, CsvHasTwentyColumnsAndRoundTrips) {
  auto cfg = default_config(ScenarioKind::FreeBody);
  cfg.grid.N = 40;
  const RunReport rep = simulate(cfg, SimulateMode::Dlp);
  const fs::path dir = scratch_dir("csv");
  export_csv(rep, (dir / "t.csv").string());
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 19);
  EXPECT_EQ(line.substr(0, 7), "t,roll,");
  const auto rows = read_csv((dir / "t.csv").string());
  ASSERT_EQ(rows.size(), rep.records.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][0], rep.records[k].t);
    EXPECT_EQ(rows[k][10], rep.records[k].u);
    EXPECT_EQ(rows[k][18], rep.records[k].Pi_norm);
  }
}

TEST(Export, HeaderOnlyCsvForAnEmptyReport) {
  RunReport rep;
  const std::string text = csv_text(rep);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  const fs::path dir = scratch_dir("empty");
  write_text((dir / "e.csv").string(), text);
  EXPECT_TRUE(read_csv((dir / "e.csv").string()).empty());
}

TEST(Export, BadCellsAreParseErrors) {
  const fs::path dir = scratch_dir("bad");
  std::string text = csv_text(RunReport{});
  text += "1";
  for (int i = 1; i < 20; ++i) text += i == 5 ? ",abc" : ",0";
  text += "\n";
  write_text((dir / "b.csv").string(), text);
  EXPECT_THROW(read_csv((dir / "b.csv").string()), ParseError);
}

TEST(Export, SvgPlotsAreWritten) {
  auto cfg = default_config(ScenarioKind::FreeBody);
  cfg.grid.N = 20;
  const RunReport rep = simulate(cfg, SimulateMode::Rk4);
  const fs::path dir = scratch_dir("svg");
  export_svg_plots(rep, dir.string());
  for (const char* f : {"attitude.svg", "tracking_error.svg", "arm_angle.svg"}) {
    const std::string s = slurp(dir / f);
    EXPECT_NE(s.find("<svg"), std::string::npos) << f;
    EXPECT_NE(s.find("</svg>"), std::string::npos) << f;
  }
}

TEST(Scenario, FreeBodyKeepsMomentumNorm) {
  const auto cfg = default_config(ScenarioKind::FreeBody);
  const RunReport rep = simulate(cfg, SimulateMode::Dlp);
  const double n0 = rep.records.front().Pi_norm;
  for (const auto& r : rep.records) EXPECT_NEAR(r.Pi_norm, n0, 1e-13 * n0);
}

TEST(Scenario, TrackingSolveConvergesAndStaysInTheBox) {
  auto cfg = default_config(ScenarioKind::Tracking);
  cfg.grid.N = 40;
  const RunReport rep = run_scenario(cfg);
  EXPECT_TRUE(rep.solver.converged);
  EXPECT_TRUE(rep.arm_in_box);
  EXPECT_LT(rep.max_kkt_residual, 1e-8);
  EXPECT_EQ(rep.records.size(), 41u);
}

TEST(Scenario, SweepReportsOneRowPerValue) {
  auto cfg = default_config(ScenarioKind::Tracking);
  cfg.grid.N = 20;
  const auto rows = sweep(cfg, "h", {0.02, 0.01});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_TRUE(r.converged) << r.error;
  EXPECT_THROW(sweep(cfg, "mass", {1.0}), ValidationError);
}
