#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "droptest/error.hpp"
#include "droptest/mechanics.hpp"
#include "droptest/units.hpp"

namespace droptest::trace {

// ----------------------------------------------------------------------------
// Samples and traces
// ----------------------------------------------------------------------------

struct ForceSample {
  double t_s = 0.0;
  double voltage_v = 0.0;
  friend bool operator==(const ForceSample&, const ForceSample&) = default;
};

struct KinSample {
  double t_s = 0.0;
  double z_mm = 0.0;
  friend bool operator==(const KinSample&, const KinSample&) = default;
};

inline constexpr double kForceRateHz = 2000.0;
inline constexpr double kKinRateHz = 200.0;
inline constexpr std::size_t kMinSamples = 10;

/// Load-cell voltage channel. `baseline_v` and `noise_v` are filled on
/// ingestion from the leading baseline window.
struct ForceTrace {
  std::vector<ForceSample> samples;
  double nominal_rate_hz = kForceRateHz;
  double measured_rate_hz = 0.0;
  bool irregular = false;
  double baseline_v = 0.0;
  double noise_v = 0.0;
};

/// Vertical marker position of the weight basket.
struct KinTrace {
  std::vector<KinSample> samples;
  double nominal_rate_hz = kKinRateHz;
  double measured_rate_hz = 0.0;
  bool irregular = false;
};

enum class RestWindow { Trailing, Leading };

/// Tunables for trace analysis. Defaults are the documented pipeline.
struct AnalysisConfig {
  double baseline_window_s = 0.1;
  double rest_window_s = 0.25;
  RestWindow rest_window = RestWindow::Trailing;
  std::size_t smoothing_samples = 5;
  std::size_t max_fit_samples = 10;
  double broke_ratio = 0.6;
  double uncertain_ratio = 0.9;
  double noise_multiplier = 5.0;
  double prominence_fraction = 0.05;
  double rate_tolerance = 0.01;
};

enum class Signature { Intact, Broke, Uncertain };

constexpr std::string_view to_string(Signature s) {
  switch (s) {
    case Signature::Intact: return "Intact";
    case Signature::Broke: return "Broke";
    case Signature::Uncertain: return "Uncertain";
  }
  return "Uncertain";
}

inline Signature signature_from_string(std::string_view s) {
  if (s == "Intact") return Signature::Intact;
  if (s == "Broke") return Signature::Broke;
  if (s == "Uncertain") return Signature::Uncertain;
  fail(ErrorKind::InvalidInput, "unknown signature '" + std::string(s) + "'");
}

struct KinSummary {
  double p_rest_mm = 0.0;
  double p_lowest_mm = 0.0;
  double d_stop_mm = 0.0;
  double v_max_mm_s = 0.0;
  double t_lowest_s = 0.0;
  friend bool operator==(const KinSummary&, const KinSummary&) = default;
};

struct TrialAnalysis {
  double peak_force_n = 0.0;
  double f_theoretical_n = 0.0;
  double error_pct = 0.0;
  Signature signature = Signature::Uncertain;
  KinSummary kin;
  friend bool operator==(const TrialAnalysis&, const TrialAnalysis&) = default;
};

// ----------------------------------------------------------------------------
// Small numeric helpers
// ----------------------------------------------------------------------------

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) {
    m = (m + *std::max_element(v.begin(), mid)) / 2.0;
  }
  return m;
}

template <typename Sample>
double time_of(const Sample& s) {
  return s.t_s;
}

template <typename Sample>
double measured_rate(std::span<const Sample> samples) {
  std::vector<double> dts;
  dts.reserve(samples.size());
  for (std::size_t i = 1; i < samples.size(); ++i) dts.push_back(samples[i].t_s - samples[i - 1].t_s);
  const double dt = median(std::move(dts));
  return dt > 0.0 ? 1.0 / dt : 0.0;
}

inline std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline double parse_field(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty() || !std::isfinite(value))
    fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
  return value;
}

/// Parses a two-column CSV with the exact header given.
inline std::vector<std::array<double, 2>> parse_two_column_csv(std::string_view text, std::string_view header) {
  if (text.empty()) fail(ErrorKind::Parse, "line 1: empty input, expected header '" + std::string(header) + "'");

  std::vector<std::array<double, 2>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim_cr(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;

    if (!saw_header) {
      if (line != header)
        fail(ErrorKind::Parse, "line 1: expected header '" + std::string(header) + "', got '" + std::string(line) + "'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected exactly two fields");
    rows.push_back({parse_field(line.substr(0, comma), line_no), parse_field(line.substr(comma + 1), line_no)});
  }
  return rows;
}

template <typename Sample>
void require_sequenced(std::span<const Sample> samples) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t_s > samples[i - 1].t_s))
      fail(ErrorKind::Sequencing, "sample " + std::to_string(i + 1) + " at t=" + std::to_string(samples[i].t_s) +
                                      " s does not follow t=" + std::to_string(samples[i - 1].t_s) + " s");
  }
  if (samples.size() < kMinSamples)
    fail(ErrorKind::TooShort,
         "trace has " + std::to_string(samples.size()) + " samples, need at least " + std::to_string(kMinSamples));
}

inline void append_number(std::string& out, double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

inline std::string read_stream(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return read_stream(in);
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Construction and CSV I/O
// ----------------------------------------------------------------------------

/// Validates samples and derives rate, baseline and baseline noise.
inline ForceTrace make_force_trace(std::vector<ForceSample> samples, const AnalysisConfig& cfg = {},
                                   double nominal_rate_hz = kForceRateHz) {
  detail::require_sequenced<ForceSample>(samples);
  ForceTrace trace;
  trace.nominal_rate_hz = nominal_rate_hz;
  trace.measured_rate_hz = detail::measured_rate<ForceSample>(samples);
  trace.irregular = std::abs(trace.measured_rate_hz - nominal_rate_hz) > cfg.rate_tolerance * nominal_rate_hz;

  const double window_end = samples.front().t_s + cfg.baseline_window_s;
  std::vector<double> window;
  for (const auto& s : samples) {
    if (s.t_s >= window_end && !window.empty()) break;
    window.push_back(s.voltage_v);
  }
  trace.baseline_v = detail::median(window);
  for (double& v : window) v = std::abs(v - trace.baseline_v);
  trace.noise_v = 1.4826 * detail::median(std::move(window));
  trace.samples = std::move(samples);
  return trace;
}

inline KinTrace make_kin_trace(std::vector<KinSample> samples, const AnalysisConfig& cfg = {},
                               double nominal_rate_hz = kKinRateHz) {
  detail::require_sequenced<KinSample>(samples);
  KinTrace trace;
  trace.nominal_rate_hz = nominal_rate_hz;
  trace.measured_rate_hz = detail::measured_rate<KinSample>(samples);
  trace.irregular = std::abs(trace.measured_rate_hz - nominal_rate_hz) > cfg.rate_tolerance * nominal_rate_hz;
  trace.samples = std::move(samples);
  return trace;
}

inline constexpr std::string_view kForceHeader = "t_s,voltage_v";
inline constexpr std::string_view kKinHeader = "t_s,z_mm";

inline ForceTrace ingest_force_trace(std::string_view csv, const AnalysisConfig& cfg = {}) {
  std::vector<ForceSample> samples;
  for (const auto& [t, v] : detail::parse_two_column_csv(csv, kForceHeader)) samples.push_back({t, v});
  return make_force_trace(std::move(samples), cfg);
}

inline ForceTrace ingest_force_trace(std::istream& in, const AnalysisConfig& cfg = {}) {
  return ingest_force_trace(detail::read_stream(in), cfg);
}

inline KinTrace ingest_kin_trace(std::string_view csv, const AnalysisConfig& cfg = {}) {
  std::vector<KinSample> samples;
  for (const auto& [t, z] : detail::parse_two_column_csv(csv, kKinHeader)) samples.push_back({t, z});
  return make_kin_trace(std::move(samples), cfg);
}

inline KinTrace ingest_kin_trace(std::istream& in, const AnalysisConfig& cfg = {}) {
  return ingest_kin_trace(detail::read_stream(in), cfg);
}

inline ForceTrace read_force_trace(const std::string& path, const AnalysisConfig& cfg = {}) {
  return ingest_force_trace(detail::read_file(path), cfg);
}

inline KinTrace read_kin_trace(const std::string& path, const AnalysisConfig& cfg = {}) {
  return ingest_kin_trace(detail::read_file(path), cfg);
}

/// Shortest round-trip decimal form, so write-then-read is bit exact.
inline std::string to_csv(const ForceTrace& trace) {
  std::string out(kForceHeader);
  out += '\n';
  for (const auto& s : trace.samples) {
    detail::append_number(out, s.t_s);
    out += ',';
    detail::append_number(out, s.voltage_v);
    out += '\n';
  }
  return out;
}

inline std::string to_csv(const KinTrace& trace) {
  std::string out(kKinHeader);
  out += '\n';
  for (const auto& s : trace.samples) {
    detail::append_number(out, s.t_s);
    out += ',';
    detail::append_number(out, s.z_mm);
    out += '\n';
  }
  return out;
}

// ----------------------------------------------------------------------------
// Kinematics
// ----------------------------------------------------------------------------

/// Centered moving average; the window shrinks symmetrically at the ends.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  const std::size_t half = window / 2;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t h = std::min({half, i, x.size() - 1 - i});
    double sum = 0.0;
    for (std::size_t j = i - h; j <= i + h; ++j) sum += x[j];
    out[i] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

/// Smoothed central-difference velocity, mm/s (signed, +z up).
inline std::vector<double> velocity_profile(const KinTrace& kin, const AnalysisConfig& cfg = {}) {
  const auto& s = kin.samples;
  std::vector<double> z(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) z[i] = s[i].z_mm;
  const auto zs = moving_average(z, cfg.smoothing_samples);

  std::vector<double> v(s.size(), 0.0);
  if (s.size() < 2) return v;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == s.size() ? i : i + 1;
    v[i] = (zs[hi] - zs[lo]) / (s[hi].t_s - s[lo].t_s);
  }
  return v;
}

namespace detail {

/// Least-squares quadratic z = a + b·u + c·u² on normalized time u.
struct Quadratic {
  double a, b, c;
};

inline std::optional<Quadratic> fit_quadratic(std::span<const double> u, std::span<const double> z) {
  double s[5] = {0, 0, 0, 0, 0};
  double r[3] = {0, 0, 0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) r[k] += p * z[i];
      p *= u[i];
    }
  }
  // Normal equations, Gaussian elimination with partial pivoting.
  double m[3][4] = {{s[0], s[1], s[2], r[0]}, {s[1], s[2], s[3], r[1]}, {s[2], s[3], s[4], r[2]}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
    if (std::abs(m[piv][col]) < 1e-300) return std::nullopt;
    std::swap(m[col], m[piv]);
    for (int row = 0; row < 3; ++row) {
      if (row == col) continue;
      const double f = m[row][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[row][k] -= f * m[col][k];
    }
  }
  return Quadratic{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

/// Speed at the contact instant from a quadratic fit to the descending
/// samples just before it. At 200 Hz the contact lasts only a couple of
/// samples, so smoothing across it underestimates the impact speed; the fit
/// stays on the free-fall side of the kink. Without a contact time from the
/// force channel, contact is taken where the descent reaches the rest level.
inline std::optional<double> impact_speed(const std::vector<KinSample>& s, std::size_t lowest, double p_rest,
                                          std::optional<double> contact_time_s, std::size_t max_fit) {
  std::size_t cross = lowest;
  if (contact_time_s) {
    cross = 0;
    while (cross < lowest && s[cross].t_s < *contact_time_s) ++cross;
  } else {
    while (cross > 0 && s[cross - 1].z_mm < p_rest) --cross;
  }
  if (cross == 0) return std::nullopt;

  const std::size_t end = cross - 1;
  std::size_t begin = end;
  while (begin > 0 && s[begin - 1].z_mm > s[begin].z_mm && end - begin + 1 < max_fit) --begin;
  const std::size_t n = end - begin + 1;
  if (n < 3) return std::nullopt;

  const double t_end = s[end].t_s;
  const double span_s = t_end - s[begin].t_s;
  std::vector<double> u(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (s[begin + i].t_s - t_end) / span_s;
    z[i] = s[begin + i].z_mm;
  }
  const auto q = fit_quadratic(u, z);
  if (!q) return std::nullopt;

  const double u_cross = (s[cross].t_s - t_end) / span_s;
  double root = u_cross / 2.0;
  if (contact_time_s) {
    root = (*contact_time_s - t_end) / span_s;
  } else {
    // Root of a + b·u + c·u² = p_rest past the last descending sample.
    const double a = q->a - p_rest;
    if (std::abs(q->c) < 1e-12 * (std::abs(q->b) + std::abs(a))) {
      if (q->b != 0.0) root = -a / q->b;
    } else {
      const double disc = q->b * q->b - 4.0 * q->c * a;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double lo = std::min((-q->b - sq) / (2.0 * q->c), (-q->b + sq) / (2.0 * q->c));
        const double hi = std::max((-q->b - sq) / (2.0 * q->c), (-q->b + sq) / (2.0 * q->c));
        root = lo >= -1e-9 ? lo : hi;
      }
    }
  }
  root = std::clamp(root, 0.0, u_cross);
  return std::abs(q->b + 2.0 * q->c * root) / span_s;
}

}  // namespace detail

/// Rest level, lowest point, stopping distance and peak pre-impact speed.
/// `contact_time_s`, when known from the force channel, pins the impact
/// instant on the shared clock.
inline KinSummary kinematic_summary(const KinTrace& kin, const AnalysisConfig& cfg = {},
                                    std::optional<double> contact_time_s = std::nullopt) {
  const auto& s = kin.samples;
  if (s.size() < kMinSamples) fail(ErrorKind::TooShort, "kinematic trace too short");

  std::size_t lowest = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].z_mm < s[lowest].z_mm) lowest = i;

  double sum = 0.0;
  std::size_t count = 0;
  if (cfg.rest_window == RestWindow::Trailing) {
    const double from = s.back().t_s - cfg.rest_window_s;
    for (auto it = s.rbegin(); it != s.rend() && (it->t_s >= from || count == 0); ++it, ++count) sum += it->z_mm;
  } else {
    const double to = s.front().t_s + cfg.rest_window_s;
    for (auto it = s.begin(); it != s.end() && (it->t_s <= to || count == 0); ++it, ++count) sum += it->z_mm;
  }

  KinSummary out;
  out.p_rest_mm = sum / static_cast<double>(count);
  out.p_lowest_mm = s[lowest].z_mm;
  out.t_lowest_s = s[lowest].t_s;
  out.d_stop_mm = out.p_rest_mm - out.p_lowest_mm;
  // Averaging a constant rest window can leave a few ulps of stopping distance.
  if (!(out.d_stop_mm > 1e-9 * std::max(1.0, std::abs(out.p_rest_mm))))
    fail(ErrorKind::DegenerateKinematics,
         "stopping distance " + std::to_string(out.d_stop_mm) + " mm: basket never dropped below its rest position");

  if (auto v = detail::impact_speed(s, lowest, out.p_rest_mm, contact_time_s, cfg.max_fit_samples)) {
    out.v_max_mm_s = *v;
  } else {
    const auto v_profile = velocity_profile(kin, cfg);
    for (std::size_t i = 0; i < lowest; ++i) out.v_max_mm_s = std::max(out.v_max_mm_s, std::abs(v_profile[i]));
  }
  return out;
}

// ----------------------------------------------------------------------------
// Force channel
// ----------------------------------------------------------------------------

struct Peak {
  std::size_t index = 0;
  double t_s = 0.0;
  double height_v = 0.0;  // above baseline
  double prominence_v = 0.0;
};

inline double noise_threshold(const ForceTrace& trace, const AnalysisConfig& cfg = {}) {
  return std::max(cfg.noise_multiplier * trace.noise_v, 1e-9);
}

/// Local maxima of the baseline-corrected signal that stand out from both
/// the noise floor and a fraction of the global maximum, in time order.
inline std::vector<Peak> prominent_peaks(const ForceTrace& trace, const AnalysisConfig& cfg = {}) {
  const auto& s = trace.samples;
  const std::size_t n = s.size();
  std::vector<double> y(n);
  double global = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = s[i].voltage_v - trace.baseline_v;
    global = std::max(global, y[i]);
  }
  const double floor = noise_threshold(trace, cfg);
  if (!(global > floor)) return {};
  const double min_prominence = std::max(floor, cfg.prominence_fraction * global);

  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const bool rises = i == 0 || y[i] > y[i - 1];
    if (!rises || y[i] <= floor) continue;
    // Walk across a flat top.
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] > y[i]) continue;

    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence >= min_prominence) peaks.push_back({i, s[i].t_s, y[i], prominence});
    i = j;
  }
  return peaks;
}

/// First crossing of the noise floor, interpolated between samples.
inline std::optional<double> impact_onset(const ForceTrace& trace, const AnalysisConfig& cfg = {}) {
  const double floor = noise_threshold(trace, cfg);
  const auto& s = trace.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s[i].voltage_v - trace.baseline_v;
    if (y <= floor) continue;
    if (i == 0) return s[0].t_s;
    const double y0 = s[i - 1].voltage_v - trace.baseline_v;
    const double w = (floor - y0) / (y - y0);
    return s[i - 1].t_s + std::clamp(w, 0.0, 1.0) * (s[i].t_s - s[i - 1].t_s);
  }
  return std::nullopt;
}

/// Impact force from the largest excursion above baseline.
inline double peak_force(const ForceTrace& trace, const mechanics::RigCalibration& cal = {},
                         const AnalysisConfig& cfg = {}) {
  double excursion = -std::numeric_limits<double>::infinity();
  for (const auto& s : trace.samples) excursion = std::max(excursion, s.voltage_v - trace.baseline_v);
  if (!(excursion > noise_threshold(trace, cfg)))
    fail(ErrorKind::NoImpact, "no excursion above the baseline noise floor");
  return mechanics::voltage_to_force(excursion, cal);
}

/// Broken parts transfer less load on first contact, so a later, larger
/// peak after a small first one marks a break.
inline Signature classify_signature(const ForceTrace& trace, const AnalysisConfig& cfg = {}) {
  const auto peaks = prominent_peaks(trace, cfg);
  if (peaks.empty()) fail(ErrorKind::NoImpact, "no peak above the noise floor");

  const double first = peaks.front().height_v;
  double later = 0.0;
  for (std::size_t i = 1; i < peaks.size(); ++i) later = std::max(later, peaks[i].height_v);

  if (later <= first) return later < cfg.uncertain_ratio * first ? Signature::Intact : Signature::Uncertain;
  return first < cfg.broke_ratio * later ? Signature::Broke : Signature::Uncertain;
}

// ----------------------------------------------------------------------------
// Whole trial
// ----------------------------------------------------------------------------

inline TrialAnalysis analyze_trial(const ForceTrace& force, const KinTrace& kin, double mass_kg,
                                   const mechanics::RigCalibration& cal = {}, const AnalysisConfig& cfg = {}) {
  if (force.samples.empty() || kin.samples.empty()) fail(ErrorKind::TooShort, "empty trace");
  const double f0 = force.samples.front().t_s, f1 = force.samples.back().t_s;
  const double k0 = kin.samples.front().t_s, k1 = kin.samples.back().t_s;
  if (f1 < k0 || k1 < f0)
    fail(ErrorKind::Synchronization, "force [" + std::to_string(f0) + ", " + std::to_string(f1) + "] s and kinematic [" +
                                         std::to_string(k0) + ", " + std::to_string(k1) + "] s clocks do not overlap");

  TrialAnalysis out;
  out.peak_force_n = peak_force(force, cal, cfg);
  out.kin = kinematic_summary(kin, cfg, impact_onset(force, cfg));

  const auto peak_it = std::max_element(force.samples.begin(), force.samples.end(),
                                        [](const auto& a, const auto& b) { return a.voltage_v < b.voltage_v; });
  if (peak_it->t_s < k0 || peak_it->t_s > k1)
    fail(ErrorKind::Synchronization, "force peak at t=" + std::to_string(peak_it->t_s) +
                                         " s lies outside the kinematic recording");

  if (!(out.kin.v_max_mm_s > 0.0))
    fail(ErrorKind::DegenerateKinematics, "zero impact velocity: theoretical force and error are undefined");

  out.f_theoretical_n = mechanics::theoretical_impact_force(
      {mass_kg, units::mm_to_m(out.kin.v_max_mm_s), units::mm_to_m(out.kin.d_stop_mm)});
  out.error_pct = mechanics::validation_error(out.f_theoretical_n, out.peak_force_n);
  out.signature = classify_signature(force, cfg);
  return out;
}

}  // namespace droptest::trace
