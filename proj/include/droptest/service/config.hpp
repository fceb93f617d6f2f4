#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "droptest/error.hpp"
#include "droptest/mechanics.hpp"
#include "droptest/trace.hpp"

namespace droptest::service {

/// Rig settings read from a `key = value` file (TOML subset: comments with
/// '#', optional quotes, no tables).
struct RigConfig {
  mechanics::RigCalibration calibration;
  trace::AnalysisConfig analysis;
  double error_bound_pct = 25.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_number(const std::string& key, const std::string& value, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": '" + key + "' needs a number, got '" + value + "'");
}

}  // namespace detail

inline RigConfig parse_rig_config(std::istream& in) {
  RigConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    if (key == "volts_to_newtons" || key == "scale_n_per_v") {
      cfg.calibration.volts_to_newtons = detail::to_number(key, value, line_no);
    } else if (key == "error_bound_pct") {
      cfg.error_bound_pct = detail::to_number(key, value, line_no);
    } else if (key == "rest_window_s") {
      cfg.analysis.rest_window_s = detail::to_number(key, value, line_no);
    } else if (key == "rest_window") {
      if (value == "trailing") cfg.analysis.rest_window = trace::RestWindow::Trailing;
      else if (value == "leading") cfg.analysis.rest_window = trace::RestWindow::Leading;
      else fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": rest_window is 'trailing' or 'leading'");
    } else if (key == "baseline_window_s") {
      cfg.analysis.baseline_window_s = detail::to_number(key, value, line_no);
    } else {
      fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!(cfg.calibration.volts_to_newtons > 0.0)) fail(ErrorKind::InvalidInput, "volts_to_newtons must be positive");
  if (!(cfg.error_bound_pct >= 0.0)) fail(ErrorKind::InvalidInput, "error_bound_pct must be >= 0");
  if (!(cfg.analysis.rest_window_s > 0.0)) fail(ErrorKind::InvalidInput, "rest_window_s must be positive");
  return cfg;
}

inline RigConfig parse_rig_config(const std::string& text) {
  std::istringstream in(text);
  return parse_rig_config(in);
}

}  // namespace droptest::service
