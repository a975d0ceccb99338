#pragma once

#include <array>
#include <string>
#include <vector>

#include "foldocp/harness/scenario.hpp"

namespace foldocp::harness {

inline constexpr std::array<const char*, 20> kCsvColumns = {
    "t",        "roll",     "pitch",    "yaw",  "roll_ref", "pitch_ref",   "yaw_ref",
    "err_roll", "err_pitch", "err_yaw", "u",    "tau1",     "tau2",        "tau3",
    "tau4",     "Pi1",      "Pi2",      "Pi3",  "Pi_norm",  "kkt_residual"};

// Values are written with %.17g.
std::string csv_text(const RunReport& report);
void export_csv(const RunReport& report, const std::string& path);

// Rows of a CSV produced by export_csv (header skipped).
std::vector<std::array<double, 20>> read_csv(const std::string& path);

// attitude.svg, tracking_error.svg and arm_angle.svg in dir.
void export_svg_plots(const RunReport& report, const std::string& dir);

void write_text(const std::string& path, const std::string& text);

}  // namespace foldocp::harness
