#pragma once

// Runs one random campaign script twice, through CampaignService directly
// and through the HTTP API, retrying every mutation, and compares the
// resulting reports.

#include <optional>
#include <string>

#include "droptest/serialize.hpp"
#include "droptest/simrig.hpp"
#include "droptest/trace.hpp"
#include "support/campaign_scripts.hpp"
#include "support/http_harness.hpp"
#include "support/oracles.hpp"

namespace differential {

using droptest::Json;
namespace svc = droptest::service;

struct Result {
  bool ok = true;
  std::string failure;
  Json report;
  std::size_t mutations = 0;
};

inline Json trial_identity(const Json& trial) {
  return {{"trial_id", trial.at("trial_id")}, {"height_cm", trial.at("height_cm")}, {"index", trial.at("index")},
          {"outcome", trial.at("outcome")},   {"peak_force_n", trial.at("peak_force_n")},
          {"trace_id", trial.at("trace_id")}};
}

struct TracePair {
  std::string force_csv, kin_csv;
};

inline TracePair simulated_pair(const scripts::Script& script, const scripts::Step& step, std::uint64_t seed) {
  droptest::simrig::SimConfig cfg;
  cfg.mass_kg = script.config.mass_kg;
  cfg.drop_height_cm = step.input.height_cm;
  cfg.seed = seed;
  if (step.input.outcome == droptest::campaign::Outcome::Broke) {
    const double v = oracle::impact_speed(cfg.drop_height_cm / 100.0, cfg.rail_efficiency);
    cfg.part_break_threshold_n = 0.3 * oracle::undamped_peak_force(cfg.mass_kg, cfg.contact_stiffness_n_m, v);
  }
  const auto sim = droptest::simrig::simulate_drop(cfg);
  return {droptest::trace::to_csv(sim.force), droptest::trace::to_csv(sim.kin)};
}

inline Result run(std::uint64_t seed, bool with_traces) {
  Result r;
  auto fail = [&r](const std::string& why) {
    if (r.ok) {
      r.ok = false;
      r.failure = why;
    }
  };

  const auto script = scripts::random_script(seed);
  harness::TempDir dir_local("diff-local"), dir_http("diff-http");
  svc::CampaignService local(dir_local.path());
  harness::LiveServer server(dir_http.path());
  auto client = server.client();

  auto http_report = [&](const std::string& id) {
    auto res = client.Get("/campaigns/" + id + "/report");
    return res && res->status == 200 ? Json::parse(res->body) : Json();
  };
  auto settle = [&] {
    local.drain();
    server.service().drain();
  };

  // Create, then retry the create.
  const std::string create_key = "create-" + std::to_string(seed);
  const auto created = local.create_campaign(script.part, script.config, create_key);
  const Json create_body = {{"part", script.part}, {"config", script.config}, {"idempotency_key", create_key}};
  auto res = client.Post("/campaigns", create_body.dump(), "application/json");
  if (!res || res->status != 201) return fail("POST /campaigns failed"), r;
  const auto id = Json::parse(res->body).at("campaign_id").get<std::string>();
  if (id != created.id) fail("campaign ids differ");
  ++r.mutations;
  {
    const auto before = http_report(id);
    auto again = client.Post("/campaigns", create_body.dump(), "application/json");
    if (!again || again->status != 200 || Json::parse(again->body).at("campaign_id") != id)
      fail("create retry did not return the original campaign");
    if (local.create_campaign(script.part, script.config, create_key).id != created.id)
      fail("in-process create retry produced a new campaign");
    if (http_report(id) != before) fail("create retry changed state");
  }

  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    auto step = script.steps[i];

    if (with_traces && i % 3 == 0) {
      const auto pair = simulated_pair(script, step, seed * 1000 + i);
      const auto info = local.upload_trace(pair.force_csv, pair.kin_csv);
      const Json body = {{"force_csv", pair.force_csv}, {"kin_csv", pair.kin_csv}};
      auto up = client.Post("/traces", body.dump(), "application/json");
      if (!up || up->status != 201) return fail("POST /traces failed"), r;
      const auto trace_id = Json::parse(up->body).at("trace_id").get<std::string>();
      if (trace_id != info.id) fail("trace ids differ");
      auto up_again = client.Post("/traces", body.dump(), "application/json");
      if (!up_again || Json::parse(up_again->body).at("trace_id") != trace_id) fail("trace upload retry differs");
      step.input.trace_id = trace_id;
      ++r.mutations;
    }

    // An out-of-protocol record must be rejected the same way on both paths.
    if (i % 5 == 2) {
      Json bad = {{"height_cm", step.input.height_cm + 7.7}, {"outcome", "Intact"}, {"peak_force_n", 50.0}};
      auto rej = client.Post("/campaigns/" + id + "/trials", bad.dump(), "application/json");
      if (!rej || rej->status != 409) fail("non-pending height was not rejected with 409");
      try {
        local.record_trial(id, {step.input.height_cm + 7.7, droptest::campaign::Outcome::Intact, 50.0, {}, {}});
        fail("in-process accepted a non-pending height");
      } catch (const droptest::Error& e) {
        if (e.kind() != droptest::ErrorKind::ProtocolViolation) fail("in-process rejected with the wrong kind");
      }
    }

    const auto receipt = local.record_trial(id, step.input, step.key);
    Json body = {{"height_cm", step.input.height_cm},
                 {"outcome", std::string(droptest::campaign::to_string(step.input.outcome))},
                 {"idempotency_key", step.key}};
    if (step.input.peak_force_n) body["peak_force_n"] = *step.input.peak_force_n;
    if (step.input.trace_id) body["trace_id"] = *step.input.trace_id;
    auto rec = client.Post("/campaigns/" + id + "/trials", body.dump(), "application/json");
    if (!rec || rec->status != 201) return fail("POST trial " + std::to_string(i) + " failed"), r;
    const auto first = Json::parse(rec->body);
    if (trial_identity(first.at("trial")) != trial_identity(Json(receipt.trial)))
      fail("trial " + std::to_string(i) + " differs between paths");
    ++r.mutations;

    settle();
    const auto before = http_report(id);
    auto again = client.Post("/campaigns/" + id + "/trials", body.dump(), "application/json");
    if (!again || again->status != 200) fail("trial retry was not acknowledged as a replay");
    else if (trial_identity(Json::parse(again->body).at("trial")) != trial_identity(first.at("trial")))
      fail("trial retry returned a different trial");
    const auto replay = local.record_trial(id, step.input, step.key);
    if (!replay.replayed || replay.trial.id != receipt.trial.id) fail("in-process retry was not a replay");
    if (http_report(id) != before) fail("trial retry changed state");
  }

  settle();
  r.report = local.report(id);
  if (http_report(id) != r.report) fail("final reports differ");
  return r;
}

}  // namespace differential
