#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "droptest/serialize.hpp"
#include "droptest/trace.hpp"
#include "support/http_harness.hpp"
#include "support/oracles.hpp"

using droptest::Json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DROPTEST_CLI + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return std::string(DROPTEST_TEST_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(CliValidateRig, ReferenceFixturePasses) {
  const auto r = cli("validate-rig --force " + data("reference_force.csv") + " --kin " + data("reference_kin.csv") +
                     " --mass 0.735");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("89.0 N"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("75.6 N"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("17.7 %"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("3.060 mm"), std::string::npos) << r.out;
}

TEST(CliValidateRig, JsonAndBound) {
  const auto base = "validate-rig --force " + data("reference_force.csv") + " --kin " + data("reference_kin.csv") + " --mass 0.735";
  const auto r = cli(base + " --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j.at("error_pct").get<double>(), 17.7, 0.1);
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(cli(base + " --error-bound 10").code, 1);
}

TEST(CliValidateRig, ConfigFileSetsBound) {
  harness::TempDir dir("cli-config");
  std::ofstream(dir.path() / "rig.toml") << "error_bound_pct = 15\n";
  const auto r = cli("validate-rig --force " + data("reference_force.csv") + " --kin " + data("reference_kin.csv") +
                     " --mass 0.735 --config " + q(dir.path() / "rig.toml"));
  EXPECT_EQ(r.code, 1) << r.out;
  std::ofstream(dir.path() / "bad.toml") << "volts_to_newtons = lots\n";
  EXPECT_EQ(cli("validate-rig --force " + data("reference_force.csv") + " --kin " + data("reference_kin.csv") +
                " --mass 0.735 --config " + q(dir.path() / "bad.toml"))
                .code,
            2);
}

TEST(CliValidateRig, EmptyForceFileIsError) {
  harness::TempDir dir("cli-empty");
  std::ofstream(dir.path() / "force.csv").close();
  const auto r = cli("validate-rig --force " + q(dir.path() / "force.csv") + " --kin " + data("reference_kin.csv") +
                     " --mass 0.735");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("parse"), std::string::npos) << r.out;
}

TEST(CliValidateRig, LosslessSpringFailsTheBound) {
  // A linear spring without losses stops the basket over a longer distance
  // than the impulse-averaged estimate assumes; the analytic gap is about
  // -52 %, not zero.
  harness::TempDir dir("cli-lossless");
  const auto sim = cli("simulate --height 5 --mass 0.735 --efficiency 1 --damping 0 --noise 0 --out " + q(dir.path()));
  ASSERT_EQ(sim.code, 0) << sim.out;
  const auto truth = Json::parse(slurp(dir.path() / "truth.json"));
  const double expected = oracle::undamped_validation_error(0.735, 5.8e4, truth.at("v_impact_m_s").get<double>());
  const auto r = cli("validate-rig --json --force " + q(dir.path() / "force.csv") + " --kin " +
                     q(dir.path() / "kin.csv") + " --mass 0.735");
  EXPECT_EQ(r.code, 1) << r.out;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j.at("error_pct").get<double>(), expected, 6.0);
}

TEST(CliSimulate, NoFallPeakIsWeight) {
  harness::TempDir dir("cli-h0");
  ASSERT_EQ(cli("simulate --height 0 --mass 0.735 --out " + q(dir.path())).code, 0);
  const auto truth = Json::parse(slurp(dir.path() / "truth.json"));
  EXPECT_NEAR(truth.at("peak_force_n").get<double>(), 0.735 * oracle::kG, 1e-9);
  EXPECT_FALSE(truth.at("broke").get<bool>());
}

TEST(CliSimulate, FixedSeedIsReproducible) {
  harness::TempDir a("cli-seed-a"), b("cli-seed-b");
  ASSERT_EQ(cli("simulate --height 6 --mass 0.9 --seed 42 --out " + q(a.path())).code, 0);
  ASSERT_EQ(cli("simulate --height 6 --mass 0.9 --seed 42 --out " + q(b.path())).code, 0);
  for (const char* f : {"force.csv", "kin.csv", "truth.json"}) EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
}

TEST(CliSimulate, BreakIsSeenByClassifier) {
  harness::TempDir dir("cli-break");
  ASSERT_EQ(cli("simulate --height 10 --mass 0.735 --break-at 40 --out " + q(dir.path())).code, 0);
  const auto truth = Json::parse(slurp(dir.path() / "truth.json"));
  EXPECT_TRUE(truth.at("broke").get<bool>());
  const auto force = droptest::trace::read_force_trace((dir.path() / "force.csv").string());
  EXPECT_EQ(droptest::trace::classify_signature(force), droptest::trace::Signature::Broke);
  const auto r = cli("validate-rig --json --force " + q(dir.path() / "force.csv") + " --kin " +
                     q(dir.path() / "kin.csv") + " --mass 0.735");
  EXPECT_EQ(Json::parse(r.out.substr(r.out.find('{'))).at("signature"), "Broke");
}

TEST(CliSimulate, InvalidConfigIsError) {
  harness::TempDir dir("cli-invalid");
  EXPECT_EQ(cli("simulate --height 4 --mass 0.735 --efficiency 1.5 --out " + q(dir.path())).code, 2);
  EXPECT_EQ(cli("simulate --height 4 --mass -1 --out " + q(dir.path())).code, 2);
}

TEST(CliCampaign, WorkedLedger) {
  harness::TempDir dir("cli-campaign");
  const auto store = " --store " + q(dir.path());
  const auto created = cli("campaign" + store + " new --start 3.0 --slot-depth 1.0 --wall-loops 3");
  ASSERT_EQ(created.code, 0) << created.out;
  const auto id = created.out.substr(0, created.out.find('\n'));
  EXPECT_EQ(id, "1");

  for (const auto& row : oracle::worked_ledger()) {
    char height[16];
    std::snprintf(height, sizeof height, "%.1f", row.height_cm);
    const auto next = cli("campaign" + store + " next --id " + id);
    ASSERT_EQ(next.out, std::string("drop ") + height + " cm\n");
    std::string args = "campaign" + store + " record --id " + id + " --height " + height;
    if (row.broke) {
      args += " --outcome broke";
    } else {
      args += " --outcome intact --peak " + std::to_string(row.peak_n);
    }
    const auto rec = cli(args);
    ASSERT_EQ(rec.code, 0) << rec.out;
  }
  EXPECT_EQ(cli("campaign" + store + " next --id " + id).out, "finished\n");
  const auto report = Json::parse(cli("campaign" + store + " report --id " + id).out);
  EXPECT_EQ(report.at("result").at("breaking_height_cm"), 4.4);
  EXPECT_EQ(report.at("result").at("breaking_force_n"), 65.0);
  EXPECT_EQ(report.at("part").at("slot_depth_mm"), 1.0);
  const auto csv = cli("campaign" + store + " report --csv --id " + id);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "height_cm,t1_n,t2_n,t3_n,average_n");
}

TEST(CliCampaign, ProtocolViolationAndRetry) {
  harness::TempDir dir("cli-campaign-err");
  const auto store = " --store " + q(dir.path());
  ASSERT_EQ(cli("campaign" + store + " new --start 4.0").code, 0);
  const auto bad = cli("campaign" + store + " record --id 1 --height 7.7 --outcome intact --peak 50");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("protocol-violation"), std::string::npos) << bad.out;
  const auto rec = "campaign" + store + " record --id 1 --height 4.0 --outcome intact --peak 50 --key k1";
  EXPECT_EQ(cli(rec).code, 0);
  const auto again = cli(rec);
  EXPECT_EQ(again.code, 0);
  EXPECT_TRUE(Json::parse(again.out).at("replayed").get<bool>());
  EXPECT_EQ(cli("campaign" + store + " next --id 1").out, "drop 5.0 cm\n");
  EXPECT_EQ(cli("campaign" + store + " next --id 9").code, 2);
}

TEST(CliCampaign, RecordWithTraceAttachesAnalysis) {
  harness::TempDir dir("cli-campaign-trace");
  const auto store = " --store " + q(dir.path() / "store");
  ASSERT_EQ(cli("simulate --height 4 --mass 0.735 --out " + q(dir.path() / "drop")).code, 0);
  ASSERT_EQ(cli("campaign" + store + " new --start 4.0").code, 0);
  const auto rec = cli("campaign" + store + " record --id 1 --height 4.0 --outcome intact --peak 150 --trace-force " +
                       q(dir.path() / "drop" / "force.csv") + " --trace-kin " + q(dir.path() / "drop" / "kin.csv"));
  ASSERT_EQ(rec.code, 0) << rec.out;
  const auto trial = Json::parse(rec.out).at("trial");
  EXPECT_EQ(trial.at("analysis_status"), "done");
  EXPECT_EQ(trial.at("analysis").at("signature"), "Intact");
}

TEST(CliAdvise, Recommendations) {
  const auto r = cli("advise --target 65");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("slot depth 1.0 mm, 3 wall loops: 65.0 N"), std::string::npos) << r.out;
  const auto j = Json::parse(cli("advise --target 50 --json").out);
  EXPECT_EQ(j.at("slot_depth_mm"), 2.0);
  EXPECT_EQ(j.at("wall_loops"), 3);
  const auto infeasible = cli("advise --target 20");
  EXPECT_EQ(infeasible.code, 2);
  EXPECT_NE(infeasible.out.find("infeasible-target"), std::string::npos) << infeasible.out;
}

TEST(CliAdvise, CustomTable) {
  harness::TempDir dir("cli-table");
  std::ofstream(dir.path() / "t.csv") << "slot_depth_mm,wall_loops,mean_breaking_force_n\n1.5,4,48.0\n2.5,4,30.0\n";
  const auto j = Json::parse(cli("advise --json --target 50 --table " + q(dir.path() / "t.csv")).out);
  EXPECT_EQ(j.at("slot_depth_mm"), 1.5);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("validate-rig --force nope.csv --kin nope.csv --mass 1").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}
