#pragma once

#include <httplib.h>

#include <exception>
#include <functional>
#include <optional>
#include <string>

#include "droptest/advisor.hpp"
#include "droptest/campaign.hpp"
#include "droptest/error.hpp"
#include "droptest/serialize.hpp"
#include "droptest/service/campaign_service.hpp"

namespace droptest::service {

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ProtocolViolation:
    case ErrorKind::NotReady: return 409;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::StateCorruption:
    case ErrorKind::Io: return 500;
    default: return 422;
  }
}

/// RFC 7807 problem document.
inline Json problem(int status, const std::string& kind, const std::string& title, const std::string& detail) {
  return {{"type", "urn:droptest:problem:" + kind}, {"title", title}, {"status", status}, {"detail", detail}};
}

inline Json campaign_json(const std::string& id, const campaign::CampaignState& s) {
  auto j = campaign::snapshot_json(s);
  j["campaign_id"] = id;
  j["next_action"] = campaign::action_json(s.pending);
  return j;
}

inline Json receipt_json(const CampaignService::Receipt& r) {
  return {{"trial", r.trial}, {"next_action", campaign::action_json(r.next)}, {"replayed", r.replayed}};
}

namespace detail {

class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Json parse_body(const httplib::Request& req) {
  auto j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw BadRequest("request body is not valid JSON");
  if (!j.is_object()) throw BadRequest("request body must be a JSON object");
  return j;
}

inline campaign::TrialInput trial_input(const Json& body) {
  if (!body.contains("height_cm") || !body.at("height_cm").is_number())
    fail(ErrorKind::InvalidInput, "height_cm (number) is required");
  if (!body.contains("outcome") || !body.at("outcome").is_string())
    fail(ErrorKind::InvalidInput, "outcome ('Broke' or 'Intact') is required");
  campaign::TrialInput in;
  in.height_cm = body.at("height_cm").get<double>();
  in.outcome = campaign::outcome_from_string(body.at("outcome").get<std::string>());
  in.peak_force_n = droptest::detail::optional_from<double>(body, "peak_force_n");
  in.trace_id = droptest::detail::optional_from<std::string>(body, "trace_id");
  in.index = droptest::detail::optional_from<std::size_t>(body, "index");
  return in;
}

}  // namespace detail

/// Mounts the JSON API on `server`. Handlers are thin: every mutation is
/// one call into CampaignService.
inline void mount_api(httplib::Server& server, CampaignService& service) {
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  auto guarded = [](Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      auto send_problem = [&res](int status, const std::string& kind, const std::string& title, const std::string& msg) {
        res.status = status;
        res.set_content(problem(status, kind, title, msg).dump(), "application/problem+json");
      };
      try {
        h(req, res);
      } catch (const Error& e) {
        const auto kind = std::string(to_string(e.kind()));
        send_problem(http_status(e.kind()), kind, kind, e.what());
      } catch (const detail::BadRequest& e) {
        send_problem(400, "bad-request", "bad-request", e.what());
      } catch (const Json::exception& e) {
        send_problem(422, "invalid-input", "invalid-input", e.what());
      } catch (const std::exception& e) {
        send_problem(500, "internal", "internal", e.what());
      }
    };
  };

  auto send = [](httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  server.Get("/campaigns", guarded([&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"campaign_ids", service.campaign_ids()}});
  }));

  server.Post("/campaigns", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    const auto body = detail::parse_body(req);
    if (!body.contains("part")) fail(ErrorKind::InvalidInput, "part is required");
    const auto part = body.at("part").get<campaign::PartSpec>();
    const auto config = body.value("config", Json::object()).get<campaign::CampaignConfig>();
    const auto created =
        service.create_campaign(part, config, droptest::detail::optional_from<std::string>(body, "idempotency_key"));
    auto out = campaign_json(created.id, created.state);
    out["replayed"] = created.replayed;
    send(res, created.replayed ? 200 : 201, out);
  }));

  server.Get(R"(/campaigns/(\d+))", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    send(res, 200, campaign_json(id, service.state(id)));
  }));

  server.Get(R"(/campaigns/(\d+)/next)", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, campaign::action_json(service.next(req.matches[1])));
  }));

  server.Post(R"(/campaigns/(\d+)/trials)",
              guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
                const auto body = detail::parse_body(req);
                const auto receipt = service.record_trial(
                    req.matches[1], detail::trial_input(body),
                    droptest::detail::optional_from<std::string>(body, "idempotency_key"));
                send(res, receipt.replayed ? 200 : 201, receipt_json(receipt));
              }));

  server.Get(R"(/campaigns/(\d+)/report)", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, service.report(req.matches[1]));
  }));

  server.Get(R"(/campaigns/(\d+)/ladder\.csv)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               res.set_content(campaign::ladder_csv(service.state(req.matches[1])), "text/csv");
             }));

  // Accepts either JSON {force_csv, kin_csv} or multipart files "force" and "kin".
  server.Post("/traces", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    std::string force_csv, kin_csv;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("force") || !req.has_file("kin"))
        fail(ErrorKind::InvalidInput, "multipart upload needs 'force' and 'kin' parts");
      force_csv = req.get_file_value("force").content;
      kin_csv = req.get_file_value("kin").content;
    } else {
      const auto body = detail::parse_body(req);
      if (!body.contains("force_csv") || !body.contains("kin_csv"))
        fail(ErrorKind::InvalidInput, "force_csv and kin_csv are required");
      force_csv = body.at("force_csv").get<std::string>();
      kin_csv = body.at("kin_csv").get<std::string>();
    }
    const auto info = service.upload_trace(force_csv, kin_csv);
    send(res, 201, {{"trace_id", info.id}, {"force_samples", info.force_samples}, {"kin_samples", info.kin_samples}});
  }));

  // With ?mass_kg= the response also carries the trial analysis.
  server.Get(R"(/traces/([0-9a-f]{64}))", guarded([&service, send](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto [force_csv, kin_csv] = service.trace_files(id);
    Json out = {{"trace_id", id}, {"force_csv", force_csv}, {"kin_csv", kin_csv}};
    if (req.has_param("mass_kg")) {
      double mass = 0.0;
      try {
        mass = std::stod(req.get_param_value("mass_kg"));
      } catch (const std::logic_error&) {
        fail(ErrorKind::InvalidInput, "mass_kg must be a number");
      }
      out["analysis"] = service.analyze_trace(id, mass);
      const auto force = trace::ingest_force_trace(force_csv, service.options().analysis);
      Json peaks = Json::array();
      for (const auto& p : trace::prominent_peaks(force, service.options().analysis))
        peaks.push_back({{"t_s", p.t_s}, {"force_n", p.height_v * service.options().calibration.volts_to_newtons}});
      out["peaks"] = peaks;
      out["baseline_v"] = force.baseline_v;
    }
    send(res, 200, out);
  }));

  server.Post("/advise", guarded([send](const httplib::Request& req, httplib::Response& res) {
    const auto body = detail::parse_body(req);
    if (!body.contains("target_f_max_n") || !body.at("target_f_max_n").is_number())
      fail(ErrorKind::InvalidInput, "target_f_max_n (number) is required");
    const auto table = body.contains("table") ? body.at("table").get<advisor::StrengthTable>() : advisor::builtin_table();
    send(res, 200, advisor::recommend(body.at("target_f_max_n").get<double>(), table));
  }));
}

}  // namespace droptest::service
