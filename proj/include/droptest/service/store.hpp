#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "droptest/error.hpp"
#include "droptest/serialize.hpp"
#include "droptest/service/sha256.hpp"
#include "droptest/trace.hpp"

namespace droptest::service {

namespace fs = std::filesystem;

/// On-disk layout:
///   campaigns/{id}/snapshot.json   latest state, replaced atomically
///   campaigns/{id}/log.ndjson      append-only event log (source of truth)
///   traces/{sha}/force.csv|kin.csv content-addressed trace pairs
class CampaignStore {
 public:
  explicit CampaignStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "campaigns", ec);
    fs::create_directories(root_ / "traces", ec);
    if (ec) fail(ErrorKind::Io, "cannot create store at " + root_.string() + ": " + ec.message());
  }

  const fs::path& root() const { return root_; }

  /// Reserves the next sequential id and writes its first log event.
  std::string create(const Json& created_event) {
    std::lock_guard lock(ids_mutex_);
    unsigned long next = 1;
    for (const auto& id : campaign_ids()) {
      unsigned long n = 0;
      const auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), n);
      if (ec == std::errc() && p == id.data() + id.size()) next = std::max(next, n + 1);
    }
    const std::string id = std::to_string(next);
    fs::create_directories(campaign_dir(id));
    append(id, created_event);
    return id;
  }

  bool exists(const std::string& id) const {
    return valid_id(id) && fs::exists(campaign_dir(id) / "log.ndjson");
  }

  std::vector<std::string> campaign_ids() const {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root_ / "campaigns"))
      if (entry.is_directory() && fs::exists(entry.path() / "log.ndjson")) ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return ids;
  }

  void append(const std::string& id, const Json& event) {
    std::ofstream out(campaign_dir(id) / "log.ndjson", std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) fail(ErrorKind::Io, "cannot append to log of campaign " + id);
  }

  std::vector<Json> read_log(const std::string& id) const {
    require(id);
    std::ifstream in(campaign_dir(id) / "log.ndjson", std::ios::binary);
    std::vector<Json> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto event = Json::parse(line, nullptr, false);
      if (event.is_discarded()) {
        // A torn final line is an unacknowledged write; anything earlier is damage.
        if (in.peek() == std::char_traits<char>::eof()) break;
        fail(ErrorKind::StateCorruption, "campaign " + id + " log line " + std::to_string(line_no) + " is not JSON");
      }
      events.push_back(std::move(event));
    }
    return events;
  }

  /// Cuts an unterminated or unparsable final line off the log so later
  /// appends start on a fresh line.
  void recover_log(const std::string& id) {
    require(id);
    const auto path = campaign_dir(id) / "log.ndjson";
    const auto text = trace::detail::read_file(path.string());
    std::size_t keep = text.size();
    if (!text.empty() && text.back() != '\n') {
      keep = text.rfind('\n');
      keep = keep == std::string::npos ? 0 : keep + 1;
    } else if (!text.empty()) {
      const auto start = text.rfind('\n', text.size() - 2);
      const auto from = start == std::string::npos ? 0 : start + 1;
      if (Json::parse(text.substr(from, text.size() - 1 - from), nullptr, false).is_discarded()) keep = from;
    }
    if (keep < text.size()) fs::resize_file(path, keep);
  }

  void write_snapshot(const std::string& id, const Json& snapshot) {
    const auto dir = campaign_dir(id);
    const auto tmp = dir / "snapshot.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      out << snapshot.dump(2) << '\n';
      out.flush();
      if (!out) fail(ErrorKind::Io, "cannot write snapshot of campaign " + id);
    }
    fs::rename(tmp, dir / "snapshot.json");
  }

  std::optional<Json> read_snapshot(const std::string& id) const {
    require(id);
    const auto path = campaign_dir(id) / "snapshot.json";
    if (!fs::exists(path)) return std::nullopt;
    auto j = Json::parse(trace::detail::read_file(path.string()), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  }

  /// Stores a validated trace pair; the id is the SHA-256 of both files.
  std::string put_trace(const std::string& force_csv, const std::string& kin_csv) {
    const auto id = sha256_hex({force_csv, std::string_view("\0", 1), kin_csv});
    const auto dir = root_ / "traces" / id;
    if (fs::exists(dir / "kin.csv")) return id;
    fs::create_directories(dir);
    write_file(dir / "force.csv", force_csv);
    write_file(dir / "kin.csv", kin_csv);
    return id;
  }

  bool has_trace(const std::string& id) const {
    return valid_id(id) && fs::exists(root_ / "traces" / id / "force.csv") && fs::exists(root_ / "traces" / id / "kin.csv");
  }

  std::pair<std::string, std::string> get_trace(const std::string& id) const {
    if (!has_trace(id)) fail(ErrorKind::NotFound, "no trace with id " + id);
    const auto dir = root_ / "traces" / id;
    return {trace::detail::read_file((dir / "force.csv").string()), trace::detail::read_file((dir / "kin.csv").string())};
  }

 private:
  static bool valid_id(const std::string& id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
      return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
  }

  void require(const std::string& id) const {
    if (!exists(id)) fail(ErrorKind::NotFound, "no campaign with id " + id);
  }

  fs::path campaign_dir(const std::string& id) const { return root_ / "campaigns" / id; }

  static void write_file(const fs::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      out << content;
      if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    }
    fs::rename(tmp, path);
  }

  fs::path root_;
  std::mutex ids_mutex_;
};

}  // namespace droptest::service
