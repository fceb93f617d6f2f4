#pragma once

// JSON mapping for the library types. Field names carry units.

#include <json.hpp>

#include <optional>
#include <string>

#include "droptest/advisor.hpp"
#include "droptest/campaign.hpp"
#include "droptest/simrig.hpp"
#include "droptest/trace.hpp"

namespace droptest {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

}  // namespace detail

// ----------------------------------------------------------------------------
// trace
// ----------------------------------------------------------------------------

namespace trace {

inline void to_json(Json& j, const KinSummary& k) {
  j = {{"p_rest_mm", k.p_rest_mm},
       {"p_lowest_mm", k.p_lowest_mm},
       {"d_stop_mm", k.d_stop_mm},
       {"v_max_mm_s", k.v_max_mm_s},
       {"t_lowest_s", k.t_lowest_s}};
}

inline void from_json(const Json& j, KinSummary& k) {
  k.p_rest_mm = j.at("p_rest_mm").get<double>();
  k.p_lowest_mm = j.at("p_lowest_mm").get<double>();
  k.d_stop_mm = j.at("d_stop_mm").get<double>();
  k.v_max_mm_s = j.at("v_max_mm_s").get<double>();
  k.t_lowest_s = j.value("t_lowest_s", 0.0);
}

inline void to_json(Json& j, const TrialAnalysis& a) {
  j = {{"peak_force_n", a.peak_force_n},
       {"f_theoretical_n", a.f_theoretical_n},
       {"error_pct", a.error_pct},
       {"signature", std::string(to_string(a.signature))},
       {"kin_summary", a.kin}};
}

inline void from_json(const Json& j, TrialAnalysis& a) {
  a.peak_force_n = j.at("peak_force_n").get<double>();
  a.f_theoretical_n = j.at("f_theoretical_n").get<double>();
  a.error_pct = j.at("error_pct").get<double>();
  a.signature = signature_from_string(j.at("signature").get<std::string>());
  a.kin = j.at("kin_summary").get<KinSummary>();
}

}  // namespace trace

// ----------------------------------------------------------------------------
// campaign
// ----------------------------------------------------------------------------

namespace campaign {

inline void to_json(Json& j, const PartSpec& p) {
  j = {{"slot_depth_mm", p.slot_depth_mm},
       {"wall_loops", p.wall_loops},
       {"print_orientation", std::string(to_string(p.orientation))},
       {"infill", p.infill}};
}

inline void from_json(const Json& j, PartSpec& p) {
  const PartSpec d;
  p.slot_depth_mm = j.value("slot_depth_mm", d.slot_depth_mm);
  p.wall_loops = j.value("wall_loops", d.wall_loops);
  p.orientation = j.contains("print_orientation")
                      ? orientation_from_string(j.at("print_orientation").get<std::string>())
                      : d.orientation;
  p.infill = j.value("infill", d.infill);
}

inline void to_json(Json& j, const CampaignConfig& c) {
  j = {{"start_height_cm", c.start_height_cm},
       {"coarse_step_cm", c.coarse_step_cm},
       {"fine_step_cm", c.fine_step_cm},
       {"trials_per_height", c.trials_per_height},
       {"mass_kg", c.mass_kg},
       {"max_height_cm", c.max_height_cm},
       {"confirm_break_height", c.confirm_break_height}};
}

/// Missing fields keep their defaults, so clients may send only what they
/// change.
inline void from_json(const Json& j, CampaignConfig& c) {
  const CampaignConfig d;
  c.start_height_cm = j.value("start_height_cm", d.start_height_cm);
  c.coarse_step_cm = j.value("coarse_step_cm", d.coarse_step_cm);
  c.fine_step_cm = j.value("fine_step_cm", d.fine_step_cm);
  c.trials_per_height = j.value("trials_per_height", d.trials_per_height);
  c.mass_kg = j.value("mass_kg", d.mass_kg);
  c.max_height_cm = j.value("max_height_cm", d.max_height_cm);
  c.confirm_break_height = j.value("confirm_break_height", d.confirm_break_height);
}

inline void to_json(Json& j, const TrialRecord& t) {
  j = {{"trial_id", t.id},
       {"height_cm", t.height.cm()},
       {"index", t.index},
       {"phase", std::string(to_string(t.phase))},
       {"outcome", std::string(to_string(t.outcome))},
       {"peak_force_n", droptest::detail::optional_json(t.peak_force_n)},
       {"trace_id", droptest::detail::optional_json(t.trace_id)},
       {"analysis_status", std::string(to_string(t.analysis_status))},
       {"analysis", t.analysis ? Json(*t.analysis) : Json(nullptr)},
       {"analysis_error", t.analysis_error}};
}

inline void from_json(const Json& j, TrialRecord& t) {
  t.id = j.at("trial_id").get<std::size_t>();
  t.height = Height::from_cm(j.at("height_cm").get<double>());
  t.index = j.at("index").get<std::size_t>();
  t.phase = phase_from_string(j.at("phase").get<std::string>());
  t.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  t.peak_force_n = droptest::detail::optional_from<double>(j, "peak_force_n");
  t.trace_id = droptest::detail::optional_from<std::string>(j, "trace_id");
  t.analysis_status = analysis_status_from_string(j.value("analysis_status", std::string("none")));
  t.analysis = droptest::detail::optional_from<trace::TrialAnalysis>(j, "analysis");
  t.analysis_error = j.value("analysis_error", std::string());
}

inline Json result_json(const std::optional<CampaignResult>& r) {
  if (!r) return nullptr;
  return {{"breaking_height_cm", r->breaking_height.cm()}, {"breaking_force_n", r->breaking_force_n}};
}

inline Json ledger_json(const CampaignState& s) {
  Json rows = Json::array();
  for (const auto& [h, trials] : s.ledger) rows.push_back({{"height_cm", h.cm()}, {"trials", trials}});
  return rows;
}

inline Json action_json(const std::optional<Height>& pending) {
  if (!pending) return {{"kind", "finished"}};
  return {{"kind", "drop"}, {"height_cm", pending->cm()}};
}

inline Json action_json(const Action& a) {
  return action_json(a.kind == Action::Kind::Drop ? std::optional<Height>(a.height) : std::nullopt);
}

/// Versioned snapshot document. Everything needed to restore the value.
inline Json snapshot_json(const CampaignState& s) {
  auto opt_height = [](const std::optional<Height>& h) { return h ? Json(h->cm()) : Json(nullptr); };
  return {{"schema_version", kSchemaVersion},
          {"part", s.part},
          {"config", s.config},
          {"phase", std::string(to_string(s.phase))},
          {"trial_count", s.trial_count},
          {"coarse_break_cm", opt_height(s.coarse_break)},
          {"pending_cm", opt_height(s.pending)},
          {"result", result_json(s.result)},
          {"ledger", ledger_json(s)}};
}

inline CampaignState state_from_snapshot(const Json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion)
    fail(ErrorKind::Parse, "unsupported campaign schema_version " + std::to_string(version));
  CampaignState s;
  s.part = j.at("part").get<PartSpec>();
  s.config = j.at("config").get<CampaignConfig>();
  s.phase = phase_from_string(j.at("phase").get<std::string>());
  s.trial_count = j.at("trial_count").get<std::size_t>();
  if (const auto h = droptest::detail::optional_from<double>(j, "coarse_break_cm")) s.coarse_break = Height::from_cm(*h);
  if (const auto h = droptest::detail::optional_from<double>(j, "pending_cm")) s.pending = Height::from_cm(*h);
  if (const auto& r = j.at("result"); !r.is_null())
    s.result = CampaignResult{Height::from_cm(r.at("breaking_height_cm").get<double>()),
                              r.at("breaking_force_n").get<double>()};
  for (const auto& row : j.at("ledger")) {
    const auto h = Height::from_cm(row.at("height_cm").get<double>());
    s.ledger[h] = row.at("trials").get<std::vector<TrialRecord>>();
  }
  return s;
}

/// Operator-facing summary. Never throws on a well-formed state.
inline Json campaign_report(const CampaignState& s) {
  Json dis = Json::array();
  for (const auto& d : disagreements(s))
    dis.push_back({{"trial_id", d.trial_id},
                   {"height_cm", d.height.cm()},
                   {"operator_outcome", std::string(to_string(d.operator_outcome))},
                   {"classifier_signature", std::string(trace::to_string(d.classifier))}});
  return {{"schema_version", kSchemaVersion},
          {"part", s.part},
          {"config", s.config},
          {"phase", std::string(to_string(s.phase))},
          {"next_action", action_json(s.pending)},
          {"ledger", ledger_json(s)},
          {"result", result_json(s.result)},
          {"disagreements", dis},
          {"non_monotone", non_monotone(s)},
          {"ladder_csv", ladder_csv(s)}};
}

}  // namespace campaign

// ----------------------------------------------------------------------------
// advisor
// ----------------------------------------------------------------------------

namespace advisor {

inline void to_json(Json& j, const StrengthEntry& e) {
  j = {{"slot_depth_mm", e.slot_depth_mm}, {"wall_loops", e.wall_loops}, {"mean_breaking_force_n", e.mean_breaking_force_n}};
}

inline void from_json(const Json& j, StrengthEntry& e) {
  e.slot_depth_mm = j.at("slot_depth_mm").get<double>();
  e.wall_loops = j.at("wall_loops").get<int>();
  e.mean_breaking_force_n = j.at("mean_breaking_force_n").get<double>();
}

inline void to_json(Json& j, const StrengthTable& t) {
  j = {{"entries", t.entries}, {"f_min_functional_n", t.f_min_functional_n}};
}

inline void from_json(const Json& j, StrengthTable& t) {
  t.entries = j.at("entries").get<std::vector<StrengthEntry>>();
  t.f_min_functional_n = j.value("f_min_functional_n", 25.0);
}

inline void to_json(Json& j, const Recommendation& r) {
  j = {{"slot_depth_mm", r.entry.slot_depth_mm},
       {"wall_loops", r.entry.wall_loops},
       {"mean_breaking_force_n", r.entry.mean_breaking_force_n},
       {"margin_n", r.margin_n},
       {"note", r.note}};
}

inline void to_json(Json& j, const Violation& v) {
  j = {{"axis", v.axis == Violation::Axis::SlotDepth ? "slot_depth" : "wall_loops"},
       {"lower", v.lower},
       {"higher", v.higher},
       {"message", v.message}};
}

}  // namespace advisor

// ----------------------------------------------------------------------------
// simrig
// ----------------------------------------------------------------------------

namespace simrig {

inline void to_json(Json& j, const SimTruth& t) {
  j = {{"drop_height_cm", t.drop_height_cm},
       {"v_impact_m_s", t.v_impact_m_s},
       {"peak_force_n", t.peak_force_n},
       {"broke", t.broke},
       {"d_stop_m", t.d_stop_m},
       {"t_impact_s", t.t_impact_s},
       {"t_max_compression_s", t.t_max_compression_s},
       {"kinetic_energy_j", t.kinetic_energy_j},
       {"peak_elastic_energy_j", t.peak_elastic_energy_j},
       {"gravity_work_j", t.gravity_work_j}};
}

inline void from_json(const Json& j, SimTruth& t) {
  t.drop_height_cm = j.at("drop_height_cm").get<double>();
  t.v_impact_m_s = j.at("v_impact_m_s").get<double>();
  t.peak_force_n = j.at("peak_force_n").get<double>();
  t.broke = j.at("broke").get<bool>();
  t.d_stop_m = j.at("d_stop_m").get<double>();
  t.t_impact_s = j.value("t_impact_s", 0.0);
  t.t_max_compression_s = j.value("t_max_compression_s", 0.0);
  t.kinetic_energy_j = j.value("kinetic_energy_j", 0.0);
  t.peak_elastic_energy_j = j.value("peak_elastic_energy_j", 0.0);
  t.gravity_work_j = j.value("gravity_work_j", 0.0);
}

}  // namespace simrig

}  // namespace droptest
