#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "droptest/campaign.hpp"
#include "droptest/error.hpp"
#include "droptest/mechanics.hpp"
#include "droptest/serialize.hpp"
#include "droptest/service/store.hpp"
#include "droptest/trace.hpp"

namespace droptest::service {

// ----------------------------------------------------------------------------
// Event log
// ----------------------------------------------------------------------------

inline Json created_event(const campaign::PartSpec& part, const campaign::CampaignConfig& config,
                          const std::optional<std::string>& key = std::nullopt) {
  return {{"event", "created"},
          {"schema_version", kSchemaVersion},
          {"part", part},
          {"config", config},
          {"idempotency_key", droptest::detail::optional_json(key)}};
}

inline Json trial_event(const campaign::TrialRecord& t, const std::optional<std::string>& key = std::nullopt) {
  return {{"event", "trial"},
          {"trial_id", t.id},
          {"height_cm", t.height.cm()},
          {"index", t.index},
          {"outcome", std::string(campaign::to_string(t.outcome))},
          {"peak_force_n", droptest::detail::optional_json(t.peak_force_n)},
          {"trace_id", droptest::detail::optional_json(t.trace_id)},
          {"idempotency_key", droptest::detail::optional_json(key)}};
}

inline Json analysis_event(std::size_t trial_id, const std::optional<trace::TrialAnalysis>& analysis,
                           const std::string& error) {
  return {{"event", "analysis"},
          {"trial_id", trial_id},
          {"analysis", analysis ? Json(*analysis) : Json(nullptr)},
          {"error", error}};
}

struct ReplayedLog {
  campaign::CampaignState state;
  std::map<std::string, std::size_t> trial_keys;  // idempotency key → trial id
  std::optional<std::string> create_key;
};

/// Folds a campaign's event log into its state.
inline ReplayedLog replay_log(const std::vector<Json>& events) {
  if (events.empty() || events.front().value("event", "") != "created")
    fail(ErrorKind::StateCorruption, "log does not start with a created event");
  ReplayedLog out;
  try {
    const auto& first = events.front();
    if (first.at("schema_version").get<int>() != kSchemaVersion)
      fail(ErrorKind::StateCorruption, "unsupported log schema_version");
    out.state = campaign::new_campaign(first.at("part").get<campaign::PartSpec>(),
                                       first.at("config").get<campaign::CampaignConfig>());
    out.create_key = droptest::detail::optional_from<std::string>(first, "idempotency_key");

    for (std::size_t i = 1; i < events.size(); ++i) {
      const auto& e = events[i];
      const auto kind = e.at("event").get<std::string>();
      if (kind == "trial") {
        const auto before = out.state.trial_count;
        out.state = campaign::record_trial(std::move(out.state),
                                           {e.at("height_cm").get<double>(),
                                            campaign::outcome_from_string(e.at("outcome").get<std::string>()),
                                            droptest::detail::optional_from<double>(e, "peak_force_n"),
                                            droptest::detail::optional_from<std::string>(e, "trace_id"),
                                            e.at("index").get<std::size_t>()});
        const auto id = e.at("trial_id").get<std::size_t>();
        if (out.state.trial_count != before + 1 || id != before)
          fail(ErrorKind::StateCorruption, "log event " + std::to_string(i) + " repeats or skips a trial");
        if (const auto key = droptest::detail::optional_from<std::string>(e, "idempotency_key"))
          out.trial_keys[*key] = id;
      } else if (kind == "analysis") {
        out.state = campaign::attach_analysis(std::move(out.state), e.at("trial_id").get<std::size_t>(),
                                              droptest::detail::optional_from<trace::TrialAnalysis>(e, "analysis"),
                                              e.value("error", std::string()));
      } else {
        fail(ErrorKind::StateCorruption, "unknown log event '" + kind + "'");
      }
    }
  } catch (const Json::exception& ex) {
    fail(ErrorKind::StateCorruption, std::string("malformed log event: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::StateCorruption) throw;
    fail(ErrorKind::StateCorruption, std::string("log does not replay: ") + ex.what());
  }
  return out;
}

// ----------------------------------------------------------------------------
// Service
// ----------------------------------------------------------------------------

struct ServiceOptions {
  mechanics::RigCalibration calibration;
  trace::AnalysisConfig analysis;
  bool async_analysis = true;
  unsigned workers = 1;
};

/// Process-wide owner of a store. Writes to one campaign are serialized;
/// trace analyses run on background workers and merge back through the
/// same write path.
class CampaignService {
 public:
  struct Created {
    std::string id;
    campaign::CampaignState state;
    bool replayed = false;
  };

  struct Receipt {
    campaign::TrialRecord trial;
    campaign::Action next;
    bool replayed = false;
  };

  struct TraceInfo {
    std::string id;
    std::size_t force_samples = 0;
    std::size_t kin_samples = 0;
  };

  explicit CampaignService(fs::path root, ServiceOptions options = {})
      : store_(std::move(root)), options_(std::move(options)) {
    for (const auto& id : store_.campaign_ids()) {
      // A damaged log surfaces as StateCorruption when that campaign is used.
      try {
        const auto log = store_.read_log(id);
        if (log.empty()) continue;
        if (const auto key = droptest::detail::optional_from<std::string>(log.front(), "idempotency_key"))
          create_keys_[*key] = id;
      } catch (const Error&) {
      }
    }
    const unsigned n = options_.async_analysis ? std::max(1u, options_.workers) : 0u;
    for (unsigned i = 0; i < n; ++i) workers_.emplace_back([this] { work(); });
  }

  ~CampaignService() {
    {
      std::lock_guard lock(jobs_mutex_);
      stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  CampaignService(const CampaignService&) = delete;
  CampaignService& operator=(const CampaignService&) = delete;

  CampaignStore& store() { return store_; }
  const ServiceOptions& options() const { return options_; }

  std::vector<std::string> campaign_ids() const { return store_.campaign_ids(); }

  Created create_campaign(const campaign::PartSpec& part, const campaign::CampaignConfig& config,
                          const std::optional<std::string>& key = std::nullopt) {
    std::lock_guard lock(registry_mutex_);
    if (key) {
      if (const auto it = create_keys_.find(*key); it != create_keys_.end()) {
        auto agg = load_locked(it->second);
        std::lock_guard agg_lock(agg->mutex);
        if (agg->state.part != part || agg->state.config != config)
          fail(ErrorKind::ProtocolViolation, "idempotency key '" + *key + "' was used for a different campaign");
        return {it->second, agg->state, true};
      }
    }
    auto state = campaign::new_campaign(part, config);
    const auto id = store_.create(created_event(part, config, key));
    store_.write_snapshot(id, campaign::snapshot_json(state));
    auto agg = std::make_shared<Aggregate>();
    agg->state = state;
    aggregates_[id] = agg;
    if (key) create_keys_[*key] = id;
    return {id, std::move(state), false};
  }

  campaign::CampaignState state(const std::string& id) {
    auto agg = load(id);
    std::lock_guard lock(agg->mutex);
    return agg->state;
  }

  campaign::Action next(const std::string& id) { return campaign::next_action(state(id)); }

  Json report(const std::string& id) { return campaign::campaign_report(state(id)); }

  Receipt record_trial(const std::string& id, const campaign::TrialInput& input,
                       const std::optional<std::string>& key = std::nullopt) {
    auto agg = load(id);
    std::optional<Job> job;
    Receipt receipt;
    {
      std::lock_guard lock(agg->mutex);
      if (key) {
        if (const auto it = agg->keys.find(*key); it != agg->keys.end()) {
          const auto& prior = find_trial(agg->state, it->second);
          if (!same_trial(prior, input))
            fail(ErrorKind::ProtocolViolation, "idempotency key '" + *key + "' was used for a different trial");
          return {prior, campaign::next_action(agg->state), true};
        }
      }
      if (input.trace_id && !store_.has_trace(*input.trace_id))
        fail(ErrorKind::InvalidInput, "trial references unknown trace " + *input.trace_id);

      auto next_state = campaign::record_trial(agg->state, input);
      if (next_state.trial_count == agg->state.trial_count) {
        const auto h = campaign::Height::from_cm(input.height_cm);
        return {agg->state.ledger.at(h).at(*input.index), campaign::next_action(agg->state), true};
      }
      const auto& trial = next_state.ledger.at(campaign::Height::from_cm(input.height_cm)).back();
      store_.append(id, trial_event(trial, key));
      agg->state = std::move(next_state);
      if (key) agg->keys[*key] = trial.id;
      store_.write_snapshot(id, campaign::snapshot_json(agg->state));
      receipt = {trial, campaign::next_action(agg->state), false};
      if (trial.trace_id) job = Job{id, trial.id, *trial.trace_id, agg->state.config.mass_kg};
    }
    if (job) {
      if (options_.async_analysis) {
        enqueue(std::move(*job));
      } else {
        run(*job);
        receipt.trial = find_trial(state(id), receipt.trial.id);
      }
    }
    return receipt;
  }

  TraceInfo upload_trace(const std::string& force_csv, const std::string& kin_csv) {
    const auto force = trace::ingest_force_trace(force_csv, options_.analysis);
    const auto kin = trace::ingest_kin_trace(kin_csv, options_.analysis);
    return {store_.put_trace(force_csv, kin_csv), force.samples.size(), kin.samples.size()};
  }

  std::pair<std::string, std::string> trace_files(const std::string& trace_id) const {
    return store_.get_trace(trace_id);
  }

  trace::TrialAnalysis analyze_trace(const std::string& trace_id, double mass_kg) const {
    const auto [force_csv, kin_csv] = store_.get_trace(trace_id);
    return trace::analyze_trial(trace::ingest_force_trace(force_csv, options_.analysis),
                                trace::ingest_kin_trace(kin_csv, options_.analysis), mass_kg, options_.calibration,
                                options_.analysis);
  }

  /// Blocks until every queued analysis has been merged.
  void drain() {
    std::unique_lock lock(jobs_mutex_);
    idle_cv_.wait(lock, [this] { return jobs_.empty() && running_ == 0; });
  }

 private:
  struct Aggregate {
    std::mutex mutex;
    campaign::CampaignState state;
    std::map<std::string, std::size_t> keys;
  };

  struct Job {
    std::string campaign_id;
    std::size_t trial_id = 0;
    std::string trace_id;
    double mass_kg = 0.0;
  };

  static const campaign::TrialRecord& find_trial(const campaign::CampaignState& s, std::size_t trial_id) {
    for (const auto& [h, trials] : s.ledger)
      for (const auto& t : trials)
        if (t.id == trial_id) return t;
    fail(ErrorKind::StateCorruption, "idempotency key points at missing trial " + std::to_string(trial_id));
  }

  static bool same_trial(const campaign::TrialRecord& t, const campaign::TrialInput& in) {
    return t.height == campaign::Height::from_cm(in.height_cm) && t.outcome == in.outcome &&
           t.peak_force_n == in.peak_force_n && t.trace_id == in.trace_id && (!in.index || *in.index == t.index);
  }

  std::shared_ptr<Aggregate> load(const std::string& id) {
    std::lock_guard lock(registry_mutex_);
    return load_locked(id);
  }

  // Rebuilds from the log, which is written before the snapshot; a stale or
  // missing snapshot (crash between the two writes) is repaired here.
  std::shared_ptr<Aggregate> load_locked(const std::string& id) {
    if (const auto it = aggregates_.find(id); it != aggregates_.end()) return it->second;
    store_.recover_log(id);
    auto replayed = replay_log(store_.read_log(id));
    const auto expected = campaign::snapshot_json(replayed.state);
    if (store_.read_snapshot(id) != expected) store_.write_snapshot(id, expected);
    auto agg = std::make_shared<Aggregate>();
    agg->state = std::move(replayed.state);
    agg->keys = std::move(replayed.trial_keys);
    aggregates_[id] = agg;
    if (options_.async_analysis) {
      for (const auto& [h, trials] : agg->state.ledger)
        for (const auto& t : trials)
          if (t.analysis_status == campaign::AnalysisStatus::Pending && t.trace_id)
            enqueue({id, t.id, *t.trace_id, agg->state.config.mass_kg});
    }
    return agg;
  }

  void enqueue(Job job) {
    {
      std::lock_guard lock(jobs_mutex_);
      jobs_.push_back(std::move(job));
    }
    jobs_cv_.notify_one();
  }

  void run(const Job& job) {
    std::optional<trace::TrialAnalysis> analysis;
    std::string error;
    try {
      analysis = analyze_trace(job.trace_id, job.mass_kg);
    } catch (const std::exception& e) {
      error = e.what();
    }
    auto agg = load(job.campaign_id);
    std::lock_guard lock(agg->mutex);
    store_.append(job.campaign_id, analysis_event(job.trial_id, analysis, error));
    agg->state = campaign::attach_analysis(std::move(agg->state), job.trial_id, analysis, error);
    store_.write_snapshot(job.campaign_id, campaign::snapshot_json(agg->state));
  }

  void work() {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(jobs_mutex_);
        jobs_cv_.wait(lock, [this] { return stopping_ || !jobs_.empty(); });
        if (jobs_.empty()) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
        ++running_;
      }
      try {
        run(job);
      } catch (const std::exception&) {
        // Store failure: the trial stays pending and is retried on next load.
      }
      {
        std::lock_guard lock(jobs_mutex_);
        --running_;
      }
      idle_cv_.notify_all();
    }
  }

  CampaignStore store_;
  ServiceOptions options_;

  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Aggregate>> aggregates_;
  std::map<std::string, std::string> create_keys_;

  std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::condition_variable idle_cv_;
  std::deque<Job> jobs_;
  unsigned running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace droptest::service
