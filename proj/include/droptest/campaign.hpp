#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "droptest/error.hpp"
#include "droptest/trace.hpp"

namespace droptest::campaign {

// ----------------------------------------------------------------------------
// Domain types
// ----------------------------------------------------------------------------

enum class PrintOrientation { LayersParallelToBreakLine, LayersPerpendicular };

constexpr std::string_view to_string(PrintOrientation o) {
  return o == PrintOrientation::LayersParallelToBreakLine ? "LayersParallelToBreakLine" : "LayersPerpendicular";
}

inline PrintOrientation orientation_from_string(std::string_view s) {
  if (s == "LayersParallelToBreakLine") return PrintOrientation::LayersParallelToBreakLine;
  if (s == "LayersPerpendicular") return PrintOrientation::LayersPerpendicular;
  fail(ErrorKind::InvalidInput, "unknown print orientation '" + std::string(s) + "'");
}

/// A printed attachment variant.
struct PartSpec {
  double slot_depth_mm = 1.0;
  int wall_loops = 3;
  PrintOrientation orientation = PrintOrientation::LayersParallelToBreakLine;
  std::string infill = "15% grid";
  friend bool operator==(const PartSpec&, const PartSpec&) = default;
};

inline void validate(const PartSpec& part) {
  if (!(part.slot_depth_mm > 0.0)) fail(ErrorKind::InvalidInput, "slot depth must be positive");
  if (part.wall_loops < 1) fail(ErrorKind::InvalidInput, "wall loops must be >= 1");
}

/// Drop height on the 0.1 cm grid. Stored as integer tenths so repeated
/// ±0.2 steps never drift.
class Height {
 public:
  constexpr Height() = default;
  static constexpr Height from_tenths(int tenths) { return Height(tenths); }

  static Height from_cm(double cm) {
    const double scaled = cm * 10.0;
    const double rounded = std::round(scaled);
    if (!std::isfinite(cm) || std::abs(scaled - rounded) > 1e-6)
      fail(ErrorKind::InvalidInput, "height " + std::to_string(cm) + " cm is not on the 0.1 cm grid");
    return Height(static_cast<int>(rounded));
  }

  constexpr int tenths() const { return tenths_; }
  constexpr double cm() const { return tenths_ / 10.0; }

  friend constexpr auto operator<=>(Height, Height) = default;
  friend constexpr Height operator+(Height a, Height b) { return Height(a.tenths_ + b.tenths_); }
  friend constexpr Height operator-(Height a, Height b) { return Height(a.tenths_ - b.tenths_); }

  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%d", tenths_ / 10, std::abs(tenths_ % 10));
    return buf;
  }

 private:
  constexpr explicit Height(int tenths) : tenths_(tenths) {}
  int tenths_ = 0;
};

struct CampaignConfig {
  double start_height_cm = 4.0;
  double coarse_step_cm = 1.0;
  double fine_step_cm = 0.2;
  int trials_per_height = 3;
  double mass_kg = 0.735;
  double max_height_cm = 50.0;
  /// The coarse break height is itself refined (topped up to
  /// trials_per_height) before descending. Off: descent starts one fine
  /// step below it.
  bool confirm_break_height = true;
  friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

inline void validate(const CampaignConfig& c) {
  const auto start = Height::from_cm(c.start_height_cm);
  const auto coarse = Height::from_cm(c.coarse_step_cm);
  const auto fine = Height::from_cm(c.fine_step_cm);
  const auto top = Height::from_cm(c.max_height_cm);
  if (!(fine.tenths() > 0 && fine < coarse)) fail(ErrorKind::InvalidInput, "need 0 < fine_step < coarse_step");
  if (coarse.tenths() % fine.tenths() != 0)
    fail(ErrorKind::InvalidInput, "coarse step must be a whole number of fine steps");
  if (start < fine || start > top) fail(ErrorKind::InvalidInput, "start height must lie in [fine_step, max_height]");
  if (c.trials_per_height < 1) fail(ErrorKind::InvalidInput, "trials_per_height must be >= 1");
  if (!(c.mass_kg > 0.0)) fail(ErrorKind::InvalidInput, "mass must be positive");
}

enum class Outcome { Broke, Intact };

constexpr std::string_view to_string(Outcome o) { return o == Outcome::Broke ? "Broke" : "Intact"; }

inline Outcome outcome_from_string(std::string_view s) {
  if (s == "Broke") return Outcome::Broke;
  if (s == "Intact") return Outcome::Intact;
  fail(ErrorKind::InvalidInput, "outcome must be 'Broke' or 'Intact', got '" + std::string(s) + "'");
}

/// Exhausted: the search left the rig's height range without bracketing a
/// break (never broke below max_height, or broke at every height).
enum class Phase { Coarse, Refine, Complete, Exhausted };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Coarse: return "Coarse";
    case Phase::Refine: return "Refine";
    case Phase::Complete: return "Complete";
    case Phase::Exhausted: return "Exhausted";
  }
  return "Coarse";
}

inline Phase phase_from_string(std::string_view s) {
  if (s == "Coarse") return Phase::Coarse;
  if (s == "Refine") return Phase::Refine;
  if (s == "Complete") return Phase::Complete;
  if (s == "Exhausted") return Phase::Exhausted;
  fail(ErrorKind::InvalidInput, "unknown phase '" + std::string(s) + "'");
}

enum class AnalysisStatus { None, Pending, Done, Failed };

constexpr std::string_view to_string(AnalysisStatus s) {
  switch (s) {
    case AnalysisStatus::None: return "none";
    case AnalysisStatus::Pending: return "pending";
    case AnalysisStatus::Done: return "done";
    case AnalysisStatus::Failed: return "failed";
  }
  return "none";
}

inline AnalysisStatus analysis_status_from_string(std::string_view s) {
  if (s == "none") return AnalysisStatus::None;
  if (s == "pending") return AnalysisStatus::Pending;
  if (s == "done") return AnalysisStatus::Done;
  if (s == "failed") return AnalysisStatus::Failed;
  fail(ErrorKind::InvalidInput, "unknown analysis status '" + std::string(s) + "'");
}

/// One drop. Broken trials carry no peak force.
struct TrialRecord {
  std::size_t id = 0;     // position in the trial log
  Height height;
  std::size_t index = 0;  // repeat number at this height, across phases
  Phase phase = Phase::Coarse;
  Outcome outcome = Outcome::Intact;
  std::optional<double> peak_force_n;
  std::optional<std::string> trace_id;
  AnalysisStatus analysis_status = AnalysisStatus::None;
  std::optional<trace::TrialAnalysis> analysis;
  std::string analysis_error;
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct CampaignResult {
  Height breaking_height;
  double breaking_force_n = 0.0;
  friend bool operator==(const CampaignResult&, const CampaignResult&) = default;
};

struct CampaignState {
  PartSpec part;
  CampaignConfig config;
  Phase phase = Phase::Coarse;
  std::map<Height, std::vector<TrialRecord>> ledger;
  std::size_t trial_count = 0;
  std::optional<Height> coarse_break;
  std::optional<Height> pending;
  std::optional<CampaignResult> result;
  friend bool operator==(const CampaignState&, const CampaignState&) = default;
};

/// What the operator should do next.
struct Action {
  enum class Kind { Drop, Finished } kind = Kind::Finished;
  Height height;
  friend bool operator==(const Action&, const Action&) = default;
};

/// A trial as entered by the operator. `index`, when given, makes the call
/// idempotent on (height, index).
struct TrialInput {
  double height_cm = 0.0;
  Outcome outcome = Outcome::Intact;
  std::optional<double> peak_force_n;
  std::optional<std::string> trace_id;
  std::optional<std::size_t> index;
};

// ----------------------------------------------------------------------------
// Ledger queries
// ----------------------------------------------------------------------------

/// Trials that count toward a height's refinement quota.
inline std::vector<const TrialRecord*> refined_trials(const CampaignState& s, Height h) {
  std::vector<const TrialRecord*> out;
  const auto it = s.ledger.find(h);
  if (it == s.ledger.end()) return out;
  const bool includes_break = s.config.confirm_break_height && s.coarse_break && *s.coarse_break == h;
  for (const auto& t : it->second) {
    if (t.phase == Phase::Refine || (includes_break && t.phase == Phase::Coarse && t.outcome == Outcome::Broke))
      out.push_back(&t);
  }
  return out;
}

inline std::vector<Height> refined_heights(const CampaignState& s) {
  std::vector<Height> out;
  for (const auto& [h, trials] : s.ledger)
    if (!refined_trials(s, h).empty()) out.push_back(h);
  return out;
}

inline std::size_t intact_count(const std::vector<const TrialRecord*>& trials) {
  return static_cast<std::size_t>(
      std::count_if(trials.begin(), trials.end(), [](const TrialRecord* t) { return t->outcome == Outcome::Intact; }));
}

namespace detail {

inline CampaignResult derive_result(const CampaignState& s) {
  const auto heights = refined_heights(s);
  for (auto it = heights.rbegin(); it != heights.rend(); ++it) {
    std::vector<double> peaks;
    for (const auto* t : refined_trials(s, *it))
      if (t->outcome == Outcome::Intact) peaks.push_back(*t->peak_force_n);
    if (peaks.empty()) continue;
    // Sorted so the mean does not depend on the order trials were run.
    std::sort(peaks.begin(), peaks.end());
    double sum = 0.0;
    for (const double p : peaks) sum += p;
    return {*it, sum / static_cast<double>(peaks.size())};
  }
  fail(ErrorKind::StateCorruption, "complete campaign without an intact refined trial");
}

/// Moves the refinement cursor past every height whose quota is filled.
inline void settle_refinement(CampaignState& s, Height h) {
  const auto fine = Height::from_cm(s.config.fine_step_cm);
  const auto quota = static_cast<std::size_t>(s.config.trials_per_height);
  for (;;) {
    const auto trials = refined_trials(s, h);
    if (trials.size() < quota) {
      s.phase = Phase::Refine;
      s.pending = h;
      return;
    }
    if (intact_count(trials) == trials.size()) {
      s.phase = Phase::Complete;
      s.pending.reset();
      s.result = derive_result(s);
      return;
    }
    h = h - fine;
    if (h < fine) {
      s.phase = Phase::Exhausted;
      s.pending.reset();
      return;
    }
  }
}

inline std::size_t trials_at(const CampaignState& s, Height h) {
  const auto it = s.ledger.find(h);
  return it == s.ledger.end() ? 0 : it->second.size();
}

inline bool same_entry(const TrialRecord& r, const TrialInput& in) {
  return r.outcome == in.outcome && r.peak_force_n == in.peak_force_n && r.trace_id == in.trace_id;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// State machine
// ----------------------------------------------------------------------------

inline CampaignState new_campaign(const PartSpec& part, const CampaignConfig& config) {
  validate(part);
  validate(config);
  CampaignState s;
  s.part = part;
  s.config = config;
  s.pending = Height::from_cm(config.start_height_cm);
  return s;
}

/// Recomputes phase and cursor from the ledger alone by replaying trials in
/// log order. Throws StateCorruption on any trial the protocol would not
/// have asked for.
CampaignState replay(const PartSpec& part, const CampaignConfig& config, const std::vector<TrialRecord>& trials);

inline Action next_action(const CampaignState& s) {
  std::vector<TrialRecord> log;
  log.reserve(s.trial_count);
  for (const auto& [h, trials] : s.ledger) log.insert(log.end(), trials.begin(), trials.end());
  std::sort(log.begin(), log.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < log.size(); ++i)
    if (log[i].id != i) fail(ErrorKind::StateCorruption, "trial log has a gap at id " + std::to_string(i));

  const auto derived = replay(s.part, s.config, log);
  if (derived.phase != s.phase || derived.pending != s.pending || derived.result != s.result ||
      derived.trial_count != s.trial_count)
    fail(ErrorKind::StateCorruption, "ledger is inconsistent with phase " + std::string(to_string(s.phase)));

  if (!s.pending) return {Action::Kind::Finished, {}};
  return {Action::Kind::Drop, *s.pending};
}

inline CampaignState record_trial(CampaignState s, const TrialInput& in) {
  const auto h = Height::from_cm(in.height_cm);

  if (in.index) {
    const std::size_t existing = detail::trials_at(s, h);
    if (*in.index < existing) {
      const auto& prior = s.ledger.at(h)[*in.index];
      if (detail::same_entry(prior, in)) return s;
      fail(ErrorKind::ProtocolViolation, "trial " + std::to_string(*in.index) + " at " + h.str() +
                                             " cm was already recorded with a different result");
    }
    if (*in.index > existing)
      fail(ErrorKind::ProtocolViolation, "trial index " + std::to_string(*in.index) + " skips ahead at " + h.str() + " cm");
  }
  if (!s.pending)
    fail(ErrorKind::ProtocolViolation, "campaign is " + std::string(to_string(s.phase)) + "; no drop is pending");
  if (h != *s.pending)
    fail(ErrorKind::ProtocolViolation, "pending drop is at " + s.pending->str() + " cm, not " + h.str() + " cm");
  if (in.outcome == Outcome::Intact && !in.peak_force_n)
    fail(ErrorKind::MissingMeasurement, "an intact trial needs its peak force");
  if (in.outcome == Outcome::Broke && in.peak_force_n)
    fail(ErrorKind::InvalidInput, "a broken trial has no usable peak force");
  if (in.peak_force_n && !(*in.peak_force_n > 0.0 && std::isfinite(*in.peak_force_n)))
    fail(ErrorKind::InvalidInput, "peak force must be positive");

  TrialRecord rec;
  rec.id = s.trial_count++;
  rec.height = h;
  rec.index = detail::trials_at(s, h);
  rec.phase = s.phase;
  rec.outcome = in.outcome;
  rec.peak_force_n = in.peak_force_n;
  rec.trace_id = in.trace_id;
  if (in.trace_id) rec.analysis_status = AnalysisStatus::Pending;
  s.ledger[h].push_back(rec);

  const auto fine = Height::from_cm(s.config.fine_step_cm);
  if (s.phase == Phase::Coarse) {
    if (in.outcome == Outcome::Intact) {
      const auto next = h + Height::from_cm(s.config.coarse_step_cm);
      if (next > Height::from_cm(s.config.max_height_cm)) {
        s.phase = Phase::Exhausted;
        s.pending.reset();
      } else {
        s.pending = next;
      }
      return s;
    }
    s.coarse_break = h;
    const auto first = s.config.confirm_break_height ? h : h - fine;
    if (first < fine) {
      s.phase = Phase::Exhausted;
      s.pending.reset();
      return s;
    }
    detail::settle_refinement(s, first);
    return s;
  }
  detail::settle_refinement(s, h);
  return s;
}

inline CampaignState replay(const PartSpec& part, const CampaignConfig& config, const std::vector<TrialRecord>& trials) {
  auto s = new_campaign(part, config);
  for (const auto& t : trials) {
    try {
      s = record_trial(std::move(s), {t.height.cm(), t.outcome, t.peak_force_n, t.trace_id, std::nullopt});
    } catch (const Error& e) {
      fail(ErrorKind::StateCorruption, "trial " + std::to_string(t.id) + " does not replay: " + e.what());
    }
    auto& rec = s.ledger[t.height].back();
    rec.analysis_status = t.analysis_status;
    rec.analysis = t.analysis;
    rec.analysis_error = t.analysis_error;
  }
  return s;
}

/// Attaches an asynchronous trace analysis (or its failure) to a trial.
inline CampaignState attach_analysis(CampaignState s, std::size_t trial_id,
                                     const std::optional<trace::TrialAnalysis>& analysis, const std::string& error = {}) {
  for (auto& [h, trials] : s.ledger) {
    for (auto& t : trials) {
      if (t.id != trial_id) continue;
      t.analysis = analysis;
      t.analysis_status = analysis ? AnalysisStatus::Done : AnalysisStatus::Failed;
      t.analysis_error = analysis ? std::string() : error;
      return s;
    }
  }
  fail(ErrorKind::NotFound, "no trial with id " + std::to_string(trial_id));
}

// ----------------------------------------------------------------------------
// Results
// ----------------------------------------------------------------------------

/// Highest refined height at which at least one trial survived.
inline Height breaking_height(const CampaignState& s) {
  if (s.phase != Phase::Complete || !s.result)
    fail(ErrorKind::NotReady, "breaking height is defined once the campaign is Complete");
  return s.result->breaking_height;
}

/// Mean peak force of the surviving trials at the breaking height. A lower
/// bound on the force that breaks the part.
inline double breaking_force(const CampaignState& s) {
  if (s.phase != Phase::Complete || !s.result)
    fail(ErrorKind::NotReady, "breaking force is defined once the campaign is Complete");
  return s.result->breaking_force_n;
}

struct Disagreement {
  std::size_t trial_id = 0;
  Height height;
  Outcome operator_outcome = Outcome::Intact;
  trace::Signature classifier = trace::Signature::Uncertain;
};

inline std::vector<Disagreement> disagreements(const CampaignState& s) {
  std::vector<Disagreement> out;
  for (const auto& [h, trials] : s.ledger) {
    for (const auto& t : trials) {
      if (!t.analysis || t.analysis->signature == trace::Signature::Uncertain) continue;
      const bool classifier_broke = t.analysis->signature == trace::Signature::Broke;
      if (classifier_broke != (t.outcome == Outcome::Broke)) out.push_back({t.id, h, t.outcome, t.analysis->signature});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.trial_id < b.trial_id; });
  return out;
}

/// True when a fully broken refined height sits at or below a height where
/// a part survived.
inline bool non_monotone(const CampaignState& s) {
  const auto quota = static_cast<std::size_t>(s.config.trials_per_height);
  std::optional<Height> highest_intact;
  for (const auto& [h, trials] : s.ledger)
    for (const auto& t : trials)
      if (t.outcome == Outcome::Intact) highest_intact = h;
  if (!highest_intact) return false;
  for (const auto h : refined_heights(s)) {
    const auto trials = refined_trials(s, h);
    if (trials.size() >= quota && intact_count(trials) == 0 && h <= *highest_intact) return true;
  }
  return false;
}

/// Table-II style export: one row per refined height (ascending), one
/// column per trial, "N/A" for broken trials.
inline std::string ladder_csv(const CampaignState& s) {
  const auto heights = refined_heights(s);
  std::size_t columns = static_cast<std::size_t>(s.config.trials_per_height);
  for (const auto h : heights) columns = std::max(columns, refined_trials(s, h).size());

  auto fixed1 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return std::string(buf);
  };

  std::string out = "height_cm";
  for (std::size_t i = 1; i <= columns; ++i) out += ",t" + std::to_string(i) + "_n";
  out += ",average_n\n";
  for (const auto h : heights) {
    const auto trials = refined_trials(s, h);
    out += h.str();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < columns; ++i) {
      out += ',';
      if (i >= trials.size()) continue;
      if (trials[i]->outcome == Outcome::Broke) {
        out += "N/A";
      } else {
        out += fixed1(*trials[i]->peak_force_n);
        sum += *trials[i]->peak_force_n;
        ++n;
      }
    }
    out += ',';
    out += n > 0 ? fixed1(sum / static_cast<double>(n)) : "N/A";
    out += '\n';
  }
  return out;
}

}  // namespace droptest::campaign
