#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "droptest/campaign.hpp"
#include "droptest/error.hpp"

namespace droptest::advisor {

struct StrengthEntry {
  double slot_depth_mm = 0.0;
  int wall_loops = 0;
  double mean_breaking_force_n = 0.0;
  friend bool operator==(const StrengthEntry&, const StrengthEntry&) = default;
};

struct StrengthTable {
  std::vector<StrengthEntry> entries;
  double f_min_functional_n = 25.0;
  friend bool operator==(const StrengthTable&, const StrengthTable&) = default;
};

/// Two entries that share one parameter but order the wrong way.
struct Violation {
  enum class Axis { SlotDepth, WallLoops } axis = Axis::SlotDepth;
  StrengthEntry lower;   // smaller value of the varying parameter
  StrengthEntry higher;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct Recommendation {
  StrengthEntry entry;
  double margin_n = 0.0;  // target − chosen force; negative means overshoot
  std::string note;
};

struct MergeResult {
  StrengthTable table;
  std::vector<Violation> violations;
};

namespace detail {

inline bool same_key(const StrengthEntry& a, double d, int w) {
  return std::abs(a.slot_depth_mm - d) < 1e-9 && a.wall_loops == w;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string describe(const StrengthEntry& e) {
  return "(d=" + fmt(e.slot_depth_mm) + " mm, w=" + std::to_string(e.wall_loops) + ", " +
         fmt(e.mean_breaking_force_n) + " N)";
}

}  // namespace detail

inline void validate(const StrengthTable& table) {
  if (table.entries.empty()) fail(ErrorKind::InvalidInput, "strength table is empty");
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    if (!(e.slot_depth_mm > 0.0) || e.wall_loops < 1 || !(e.mean_breaking_force_n > 0.0))
      fail(ErrorKind::InvalidInput, "invalid strength entry " + detail::describe(e));
    for (std::size_t j = 0; j < i; ++j)
      if (detail::same_key(table.entries[j], e.slot_depth_mm, e.wall_loops))
        fail(ErrorKind::InvalidInput, "duplicate strength entry for " + detail::describe(e));
  }
}

/// Measured strengths of the four printed variants.
inline StrengthTable builtin_table() {
  return {{{1.0, 6, 75.6}, {1.0, 3, 65.0}, {2.0, 6, 53.1}, {2.0, 3, 45.0}}, 25.0};
}

inline std::optional<StrengthEntry> lookup(const StrengthTable& table, double slot_depth_mm, int wall_loops) {
  for (const auto& e : table.entries)
    if (detail::same_key(e, slot_depth_mm, wall_loops)) return e;
  return std::nullopt;
}

/// Deeper slots must be weaker and more wall loops stronger, pairwise among
/// entries sharing the other parameter.
inline std::vector<Violation> validate_monotonicity(const StrengthTable& table) {
  std::vector<Violation> out;
  const auto& es = table.entries;
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = 0; j < es.size(); ++j) {
      const auto& a = es[i];
      const auto& b = es[j];
      if (a.wall_loops == b.wall_loops && a.slot_depth_mm < b.slot_depth_mm &&
          !(a.mean_breaking_force_n > b.mean_breaking_force_n)) {
        out.push_back({Violation::Axis::SlotDepth, a, b,
                       "force does not decrease with slot depth: " + detail::describe(a) + " vs " + detail::describe(b)});
      }
      if (std::abs(a.slot_depth_mm - b.slot_depth_mm) < 1e-9 && a.wall_loops < b.wall_loops &&
          !(a.mean_breaking_force_n < b.mean_breaking_force_n)) {
        out.push_back({Violation::Axis::WallLoops, a, b,
                       "force does not increase with wall loops: " + detail::describe(a) + " vs " + detail::describe(b)});
      }
    }
  }
  return out;
}

/// Strongest configuration that still breaks at or below the target force.
inline Recommendation recommend(double target_f_max_n, const StrengthTable& table) {
  validate(table);
  if (!std::isfinite(target_f_max_n)) fail(ErrorKind::InvalidInput, "target force must be finite");
  if (target_f_max_n <= table.f_min_functional_n)
    fail(ErrorKind::InfeasibleTarget, "target " + detail::fmt(target_f_max_n) + " N is at or below the " +
                                          detail::fmt(table.f_min_functional_n) +
                                          " N functional floor; the part would break during normal feeding");

  const StrengthEntry* best = nullptr;
  const StrengthEntry* weakest = &table.entries.front();
  for (const auto& e : table.entries) {
    if (e.mean_breaking_force_n < weakest->mean_breaking_force_n) weakest = &e;
    if (e.mean_breaking_force_n <= target_f_max_n && (!best || e.mean_breaking_force_n > best->mean_breaking_force_n))
      best = &e;
  }

  if (!best) {
    Recommendation r{*weakest, target_f_max_n - weakest->mean_breaking_force_n, {}};
    r.note = "warning: no measured configuration breaks at or below " + detail::fmt(target_f_max_n) +
             " N; the weakest exceeds it by " + detail::fmt(-r.margin_n) +
             " N. Deepen the slot or print fewer wall loops and re-test.";
    return r;
  }
  Recommendation r{*best, target_f_max_n - best->mean_breaking_force_n, {}};
  if (r.margin_n > 0.0) {
    r.note = "breaks " + detail::fmt(r.margin_n) +
             " N below the target; a shallower slot or more wall loops would move closer to it.";
  }
  return r;
}

inline MergeResult merge_campaign_result(StrengthTable table, const campaign::PartSpec& part, double breaking_force_n) {
  campaign::validate(part);
  if (!(breaking_force_n > 0.0)) fail(ErrorKind::InvalidInput, "breaking force must be positive");
  bool replaced = false;
  for (auto& e : table.entries) {
    if (detail::same_key(e, part.slot_depth_mm, part.wall_loops)) {
      e.mean_breaking_force_n = breaking_force_n;
      replaced = true;
    }
  }
  if (!replaced) table.entries.push_back({part.slot_depth_mm, part.wall_loops, breaking_force_n});
  auto violations = validate_monotonicity(table);
  return {std::move(table), std::move(violations)};
}

inline constexpr const char* kTableHeader = "slot_depth_mm,wall_loops,mean_breaking_force_n";

inline std::string to_csv(const StrengthTable& table) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const auto& e : table.entries) {
    std::string row;
    trace::detail::append_number(row, e.slot_depth_mm);
    row += ',' + std::to_string(e.wall_loops) + ',';
    trace::detail::append_number(row, e.mean_breaking_force_n);
    out += row + '\n';
  }
  return out;
}

inline StrengthTable table_from_csv(std::istream& in, double f_min_functional_n = 25.0) {
  StrengthTable table;
  table.f_min_functional_n = f_min_functional_n;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kTableHeader)
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected header '" + kTableHeader + "'");
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string d, w, f, extra;
    if (!std::getline(row, d, ',') || !std::getline(row, w, ',') || !std::getline(row, f, ',') ||
        std::getline(row, extra, ','))
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected three columns");
    try {
      std::size_t pos = 0;
      StrengthEntry e;
      e.slot_depth_mm = std::stod(d, &pos);
      if (pos != d.size()) throw std::invalid_argument(d);
      e.wall_loops = std::stoi(w, &pos);
      if (pos != w.size()) throw std::invalid_argument(w);
      e.mean_breaking_force_n = std::stod(f, &pos);
      if (pos != f.size()) throw std::invalid_argument(f);
      table.entries.push_back(e);
    } catch (const std::logic_error&) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": malformed number");
    }
  }
  if (!header) fail(ErrorKind::Parse, "line 1: empty strength table");
  validate(table);
  return table;
}

}  // namespace droptest::advisor
