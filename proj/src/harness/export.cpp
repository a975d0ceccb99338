#include "foldocp/harness/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace foldocp::harness {

namespace {

void append_value(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Line chart with axes, five ticks per axis and a legend.
std::string line_chart(const std::string& title, const std::string& ylabel,
                       const std::vector<double>& x, const std::vector<Series>& series,
                       const std::vector<double>& hlines = {}) {
  const double W = 720, H = 400, L = 70, R = 150, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  double x0 = 0.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  if (!x.empty()) {
    x0 = x.front();
    x1 = x.back();
    y0 = std::numeric_limits<double>::infinity();
    y1 = -y0;
    for (const auto& s : series) {
      for (double v : s.y) {
        if (!std::isfinite(v)) continue;
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
    }
    for (double v : hlines) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
    if (!std::isfinite(y0)) y0 = -1.0, y1 = 1.0;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return T + (y1 - v) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << title << "</text>\n";
  o << "<rect x=\"" << fmt(L) << "\" y=\"" << fmt(T) << "\" width=\"" << fmt(pw) << "\" height=\""
    << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    o << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(T + ph) << "\" x2=\"" << fmt(px(xv))
      << "\" y2=\"" << fmt(T + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(T + ph + 18)
      << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    o << "<line x1=\"" << fmt(L - 5) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << fmt(L)
      << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(L - 8) << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">"
      << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"" << fmt(H - 10)
    << "\" text-anchor=\"middle\">t [s]</text>\n";
  o << "<text x=\"16\" y=\"" << fmt(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt(T + ph / 2) << ")\">" << ylabel << "</text>\n";
  for (double v : hlines) {
    o << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(L + pw)
      << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    o << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i) {
      if (i) o << ' ';
      o << fmt(px(x[i])) << ',' << fmt(py(series[s].y[i]));
    }
    o << "\"/>\n";
    const double ly = T + 15 + 18 * static_cast<double>(s);
    o << "<line x1=\"" << fmt(L + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(L + pw + 36)
      << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << series[s].color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt(L + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << series[s].label
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::string csv_text(const RunReport& report) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  out += '\n';
  for (const auto& r : report.records) {
    const double row[20] = {r.t,          r.attitude.roll,  r.attitude.pitch, r.attitude.yaw,
                            r.reference.roll, r.reference.pitch, r.reference.yaw, r.error(0),
                            r.error(1),   r.error(2),       r.u,              r.tau(0),
                            r.tau(1),     r.tau(2),         r.tau(3),         r.Pi(0),
                            r.Pi(1),      r.Pi(2),          r.Pi_norm,        r.kkt_residual};
    for (int i = 0; i < 20; ++i) {
      if (i) out += ',';
      append_value(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

void export_csv(const RunReport& report, const std::string& path) {
  write_text(path, csv_text(report));
}

std::vector<std::array<double, 20>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::array<double, 20>> rows;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": missing header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 20> row{};
    std::size_t pos = 0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t end = line.find(',', pos);
      const std::string cell = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      char* stop = nullptr;
      row[i] = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || *stop != '\0') {
        throw ParseError(path + ": line " + std::to_string(lineno) + ", column " +
                         kCsvColumns[i] + ": bad value '" + cell + "'");
      }
      if (end == std::string::npos) {
        if (i != 19) throw ParseError(path + ": line " + std::to_string(lineno) + ": too few columns");
        pos = std::string::npos;
      } else {
        pos = end + 1;
      }
    }
    if (pos != std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(lineno) + ": too many columns");
    }
    rows.push_back(row);
  }
  return rows;
}

void export_svg_plots(const RunReport& report, const std::string& dir) {
  std::vector<double> t;
  Series roll{"roll", "#1f77b4", {}}, pitch{"pitch", "#2ca02c", {}}, yaw{"yaw", "#d62728", {}};
  Series roll_ref{"roll ref", "#9ec5e8", {}}, pitch_ref{"pitch ref", "#a8d8a0", {}},
      yaw_ref{"yaw ref", "#f0a0a0", {}};
  Series err_r{"roll", "#1f77b4", {}}, err_p{"pitch", "#2ca02c", {}}, err_y{"yaw", "#d62728", {}};
  Series err_f{"|E|_F", "black", {}};
  Series u{"u", "#9467bd", {}};
  for (const auto& r : report.records) {
    t.push_back(r.t);
    roll.y.push_back(r.attitude.roll);
    pitch.y.push_back(r.attitude.pitch);
    yaw.y.push_back(r.attitude.yaw);
    roll_ref.y.push_back(r.reference.roll);
    pitch_ref.y.push_back(r.reference.pitch);
    yaw_ref.y.push_back(r.reference.yaw);
    err_r.y.push_back(r.error(0));
    err_p.y.push_back(r.error(1));
    err_y.y.push_back(r.error(2));
    err_f.y.push_back(r.attitude_error);
    u.y.push_back(r.u);
  }
  write_text(dir + "/attitude.svg",
             line_chart("Vehicle attitude", "angle [rad]", t,
                        {roll, pitch, yaw, roll_ref, pitch_ref, yaw_ref}));
  write_text(dir + "/tracking_error.svg",
             line_chart("Tracking error", "error [rad]", t, {err_r, err_p, err_y, err_f}));
  write_text(dir + "/arm_angle.svg",
             line_chart("Arm angle u", "u [rad]", t, {u}, {report.box.lo, report.box.hi}));
}

}  // namespace foldocp::harness
