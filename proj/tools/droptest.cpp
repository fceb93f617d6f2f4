// droptest: command-line front end for rig validation, campaigns, the
// simulator, the advisor, and the HTTP service.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "droptest/advisor.hpp"
#include "droptest/campaign.hpp"
#include "droptest/mechanics.hpp"
#include "droptest/serialize.hpp"
#include "droptest/service/campaign_service.hpp"
#include "droptest/service/config.hpp"
#include "droptest/service/http_api.hpp"
#include "droptest/simrig.hpp"
#include "droptest/trace.hpp"

namespace fs = std::filesystem;
using namespace droptest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOutOfBound = 1;
constexpr int kExitError = 2;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

// The CLI is one process per command, so analyses run inline.
service::ServiceOptions sync_options() {
  service::ServiceOptions o;
  o.async_analysis = false;
  return o;
}

service::RigConfig load_rig_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path);
  return service::parse_rig_config(in);
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string force, kin, config;
  double mass_kg = 0.0;
  std::optional<double> error_bound;
  bool json = false;
};

int validate_rig(const ValidateArgs& a) {
  auto rig = load_rig_config(a.config);
  if (a.error_bound) rig.error_bound_pct = *a.error_bound;
  const auto force = trace::read_force_trace(a.force, rig.analysis);
  const auto kin = trace::read_kin_trace(a.kin, rig.analysis);
  const auto r = trace::analyze_trial(force, kin, a.mass_kg, rig.calibration, rig.analysis);
  const bool pass = std::abs(r.error_pct) <= rig.error_bound_pct;

  if (a.json) {
    Json j = r;
    j["error_bound_pct"] = rig.error_bound_pct;
    j["pass"] = pass;
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("%-22s %10.3f mm\n", "Resting position", r.kin.p_rest_mm);
    std::printf("%-22s %10.3f mm\n", "Lowest position", r.kin.p_lowest_mm);
    std::printf("%-22s %10.3f mm\n", "Stopping distance", r.kin.d_stop_mm);
    std::printf("%-22s %10.3f mm/s\n", "Max velocity", r.kin.v_max_mm_s);
    std::printf("%-22s %10.1f N\n", "Theoretical force", r.f_theoretical_n);
    std::printf("%-22s %10.1f N\n", "Actual force", r.peak_force_n);
    std::printf("%-22s %10.1f %%\n", "Percentage error", r.error_pct);
    std::printf("%-22s %10s\n", "Signature", std::string(trace::to_string(r.signature)).c_str());
    std::printf("%-22s %10s (bound %.1f %%)\n", "Result", pass ? "PASS" : "FAIL", rig.error_bound_pct);
  }
  return pass ? kExitOk : kExitOutOfBound;
}

// ---------------------------------------------------------------------------

struct CampaignArgs {
  std::string store = "droptest-store";
  std::string id;
  // new
  double slot_depth_mm = 1.0;
  int wall_loops = 3;
  std::string orientation = "LayersParallelToBreakLine";
  std::string infill = "15% grid";
  campaign::CampaignConfig config;
  bool descend_below_break = false;
  // record
  double height_cm = 0.0;
  std::string outcome;
  std::optional<double> peak_force_n;
  std::optional<std::size_t> index;
  std::string key, trace_force, trace_kin;
  // report
  bool csv = false;
};

campaign::Outcome parse_outcome(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "broke" || s == "b") return campaign::Outcome::Broke;
  if (s == "intact" || s == "i") return campaign::Outcome::Intact;
  fail(ErrorKind::InvalidInput, "outcome must be 'broke' or 'intact'");
}

void print_action(const campaign::Action& a) {
  if (a.kind == campaign::Action::Kind::Finished) std::cout << "finished\n";
  else std::cout << "drop " << a.height.str() << " cm\n";
}

int campaign_new(const CampaignArgs& a) {
  service::CampaignService svc(a.store, sync_options());
  auto config = a.config;
  config.confirm_break_height = !a.descend_below_break;
  const campaign::PartSpec part{a.slot_depth_mm, a.wall_loops, campaign::orientation_from_string(a.orientation), a.infill};
  const auto created = svc.create_campaign(part, config);
  std::cout << created.id << '\n';
  return kExitOk;
}

int campaign_next(const CampaignArgs& a) {
  service::CampaignService svc(a.store, sync_options());
  print_action(svc.next(a.id));
  return kExitOk;
}

int campaign_record(const CampaignArgs& a) {
  service::CampaignService svc(a.store, sync_options());
  campaign::TrialInput in{a.height_cm, parse_outcome(a.outcome), a.peak_force_n, std::nullopt, a.index};
  if (!a.trace_force.empty() || !a.trace_kin.empty()) {
    if (a.trace_force.empty() || a.trace_kin.empty())
      fail(ErrorKind::InvalidInput, "--trace-force and --trace-kin go together");
    in.trace_id = svc.upload_trace(trace::detail::read_file(a.trace_force), trace::detail::read_file(a.trace_kin)).id;
  }
  const auto receipt = svc.record_trial(a.id, in, a.key.empty() ? std::nullopt : std::optional(a.key));
  std::cout << service::receipt_json(receipt).dump(2) << '\n';
  return kExitOk;
}

int campaign_report(const CampaignArgs& a) {
  service::CampaignService svc(a.store, sync_options());
  if (a.csv) std::cout << campaign::ladder_csv(svc.state(a.id));
  else std::cout << svc.report(a.id).dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  simrig::SimConfig cfg;
  std::optional<double> break_at;
  std::string out;
};

int simulate(SimulateArgs a) {
  a.cfg.part_break_threshold_n = a.break_at;
  const auto result = simrig::simulate_drop(a.cfg);
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "force.csv", trace::to_csv(result.force));
  write_text(fs::path(a.out) / "kin.csv", trace::to_csv(result.kin));
  write_text(fs::path(a.out) / "truth.json", Json(result.truth).dump(2) + "\n");
  std::printf("peak %.3f N, v_impact %.4f m/s, %s -> %s\n", result.truth.peak_force_n, result.truth.v_impact_m_s,
              result.truth.broke ? "broke" : "intact", a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------

int advise(double target_n, const std::string& table_path, bool json) {
  auto table = advisor::builtin_table();
  if (!table_path.empty()) {
    std::ifstream in(table_path);
    if (!in) fail(ErrorKind::Io, "cannot open " + table_path);
    table = advisor::table_from_csv(in);
  }
  const auto r = advisor::recommend(target_n, table);
  if (json) {
    std::cout << Json(r).dump(2) << '\n';
  } else {
    std::printf("slot depth %.1f mm, %d wall loops: %.1f N (margin %.1f N)\n", r.entry.slot_depth_mm,
                r.entry.wall_loops, r.entry.mean_breaking_force_n, r.margin_n);
    if (!r.note.empty()) std::printf("%s\n", r.note.c_str());
  }
  for (const auto& v : advisor::validate_monotonicity(table)) std::fprintf(stderr, "table: %s\n", v.message.c_str());
  return kExitOk;
}

int serve(const std::string& store, const std::string& host, int port, unsigned workers) {
  service::ServiceOptions options;
  options.workers = workers;
  service::CampaignService svc(store, options);
  httplib::Server server;
  service::mount_api(server, svc);
  std::fprintf(stderr, "listening on %s:%d (store %s)\n", host.c_str(), port, store.c_str());
  if (!server.listen(host, port)) fail(ErrorKind::Io, "cannot listen on " + host + ":" + std::to_string(port));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drop-test campaign toolkit"};
  app.require_subcommand(1);
  int code = kExitOk;

  ValidateArgs va;
  auto* v = app.add_subcommand("validate-rig", "Compare theoretical and measured impact force for one trial");
  v->add_option("--force", va.force, "Force trace CSV (t_s,voltage_v)")->required()->check(CLI::ExistingFile);
  v->add_option("--kin", va.kin, "Kinematic trace CSV (t_s,z_mm)")->required()->check(CLI::ExistingFile);
  v->add_option("--mass", va.mass_kg, "Dropped mass, kg")->required();
  v->add_option("--config", va.config, "key = value rig configuration")->check(CLI::ExistingFile);
  v->add_option("--error-bound", va.error_bound, "Accepted |error|, percent");
  v->add_flag("--json", va.json, "Print JSON");
  v->callback([&] { code = validate_rig(va); });

  CampaignArgs ca;
  auto* c = app.add_subcommand("campaign", "Breaking-height search");
  c->require_subcommand(1);
  c->add_option("--store", ca.store, "Store directory");

  auto* cn = c->add_subcommand("new", "Start a campaign; prints its id");
  cn->add_option("--slot-depth", ca.slot_depth_mm, "Slot depth, mm");
  cn->add_option("--wall-loops", ca.wall_loops, "Wall loops");
  cn->add_option("--orientation", ca.orientation, "LayersParallelToBreakLine | LayersPerpendicular");
  cn->add_option("--infill", ca.infill, "Infill description");
  cn->add_option("--start", ca.config.start_height_cm, "Start height, cm");
  cn->add_option("--coarse-step", ca.config.coarse_step_cm, "Coarse step, cm");
  cn->add_option("--fine-step", ca.config.fine_step_cm, "Fine step, cm");
  cn->add_option("--trials", ca.config.trials_per_height, "Trials per refined height");
  cn->add_option("--mass", ca.config.mass_kg, "Dropped mass, kg");
  cn->add_option("--max-height", ca.config.max_height_cm, "Rig maximum height, cm");
  cn->add_flag("--descend-below-break", ca.descend_below_break, "Start refinement one fine step below the coarse break");
  cn->callback([&] { code = campaign_new(ca); });

  auto* cx = c->add_subcommand("next", "Print the pending action");
  cx->add_option("--id", ca.id, "Campaign id")->required();
  cx->callback([&] { code = campaign_next(ca); });

  auto* cr = c->add_subcommand("record", "Record a trial outcome");
  cr->add_option("--id", ca.id, "Campaign id")->required();
  cr->add_option("--height", ca.height_cm, "Drop height, cm")->required();
  cr->add_option("--outcome", ca.outcome, "broke | intact")->required();
  cr->add_option("--peak", ca.peak_force_n, "Peak force, N (intact trials)");
  cr->add_option("--index", ca.index, "Trial index at this height (idempotent retry)");
  cr->add_option("--key", ca.key, "Idempotency key");
  cr->add_option("--trace-force", ca.trace_force, "Force trace CSV")->check(CLI::ExistingFile);
  cr->add_option("--trace-kin", ca.trace_kin, "Kinematic trace CSV")->check(CLI::ExistingFile);
  cr->callback([&] { code = campaign_record(ca); });

  auto* cp = c->add_subcommand("report", "Print the campaign report");
  cp->add_option("--id", ca.id, "Campaign id")->required();
  cp->add_flag("--csv", ca.csv, "Print the per-height ladder as CSV");
  cp->callback([&] { code = campaign_report(ca); });

  SimulateArgs sa;
  auto* s = app.add_subcommand("simulate", "Synthesize one drop");
  s->add_option("--height", sa.cfg.drop_height_cm, "Drop height, cm")->required();
  s->add_option("--mass", sa.cfg.mass_kg, "Dropped mass, kg")->required();
  s->add_option("--break-at", sa.break_at, "Part strength, N");
  s->add_option("--out", sa.out, "Output directory")->required();
  s->add_option("--seed", sa.cfg.seed, "Noise seed");
  s->add_option("--efficiency", sa.cfg.rail_efficiency, "Rail velocity efficiency (0, 1]");
  s->add_option("--stiffness", sa.cfg.contact_stiffness_n_m, "Contact stiffness, N/m");
  s->add_option("--damping", sa.cfg.contact_damping_n_s_m, "Contact damping, N*s/m");
  s->add_option("--noise", sa.cfg.noise_sigma_v, "Voltage noise sigma, V");
  s->callback([&] { code = simulate(sa); });

  double target = 0.0;
  std::string table_path;
  bool advise_json = false;
  auto* a = app.add_subcommand("advise", "Recommend slot depth and wall loops for a force limit");
  a->add_option("--target", target, "Maximum permissible force, N")->required();
  a->add_option("--table", table_path, "Strength table CSV")->check(CLI::ExistingFile);
  a->add_flag("--json", advise_json, "Print JSON");
  a->callback([&] { code = advise(target, table_path, advise_json); });

  std::string store = "droptest-store", host = "127.0.0.1";
  int port = 8080;
  unsigned workers = 2;
  auto* sv = app.add_subcommand("serve", "Run the HTTP API");
  sv->add_option("--store", store, "Store directory");
  sv->add_option("--host", host, "Bind address");
  sv->add_option("--port", port, "Port");
  sv->add_option("--workers", workers, "Analysis worker threads");
  sv->callback([&] { code = serve(store, host, port, workers); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return code;
}
