#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "agentlab/cli/cli.hpp"
#include "agentlab/core/event_log.hpp"
#include "agentlab/core/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kConfigs = std::string(AGENTLAB_SOURCE_DIR) + "/configs/";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = agentlab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("agentlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesACompleteBundle) {
  auto r = cli({"run", "--config", kConfigs + "minimal.json", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"events.jsonl", "metrics.csv", "summary.txt", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const json manifest = json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(manifest["runner"], "run");
  EXPECT_EQ(manifest["seed"], 0);
  EXPECT_EQ(manifest["config_sha256"], agentlab::sha256_hex(slurp(kConfigs + "minimal.json")));
  ASSERT_EQ(manifest["files"].size(), 3u);
  for (const auto& f : manifest["files"]) {
    const std::string body = slurp(dir_ / f["path"].get<std::string>());
    EXPECT_EQ(f["sha256"], agentlab::sha256_hex(body));
    EXPECT_EQ(f["bytes"], body.size());
  }
  EXPECT_EQ(r.out.rfind(slurp(dir_ / "summary.txt"), 0), 0u);
  EXPECT_NE(r.out.find("bundle written to"), std::string::npos);
}

TEST_F(CliTest, RunIsReproducible) {
  ASSERT_EQ(cli({"run", "--config", kConfigs + "minimal.json", "--out", (dir_ / "a").string()}).code, 0);
  ASSERT_EQ(cli({"run", "--config", kConfigs + "minimal.json", "--out", (dir_ / "b").string()}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a/events.jsonl"), slurp(dir_ / "b/events.jsonl"));
  EXPECT_EQ(slurp(dir_ / "a/metrics.csv"), slurp(dir_ / "b/metrics.csv"));
}

TEST_F(CliTest, ScoreReadsTheBundle) {
  ASSERT_EQ(cli({"run", "--config", kConfigs + "minimal.json", "--out", dir_.string()}).code, 0);
  auto r = cli({"score", "--config", kConfigs + "minimal.json", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("metric,value\n", 0), 0u);
  EXPECT_NE(r.out.find("trades,"), std::string::npos);
  EXPECT_EQ(cli({"score", "--config", kConfigs + "minimal.json", "--events", (dir_ / "none.jsonl").string()}).code, 2);
}

TEST_F(CliTest, TrialsTagEventsAndOverrideCount) {
  auto r = cli({"trials", "--config", kConfigs + "market_noise.json", "--trials", "2", "--seed", "9", "--out",
                dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "events.jsonl");
  std::set<int> trials;
  for (const auto& rec : agentlab::read_events_jsonl(in)) trials.insert(rec.info.at("trial").get<int>());
  EXPECT_EQ(trials, (std::set<int>{0, 1}));
  EXPECT_NE(r.out.find("seeds 9..10"), std::string::npos);
}

TEST_F(CliTest, UsageAndConfigErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"explode"}).code, 1);
  EXPECT_EQ(cli({"run"}).code, 1);
  EXPECT_EQ(cli({"run", "--config", kConfigs + "minimal.json", "--backend", "magic"}).code, 1);
  EXPECT_EQ(cli({"run", "--config", kConfigs + "minimal.json", "--trials", "0"}).code, 1);
  auto missing = cli({"run", "--config", kConfigs + "nope.json"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("config error in"), std::string::npos);
  auto replay = cli({"run", "--config", kConfigs + "minimal.json", "--backend", "replay"});
  EXPECT_EQ(replay.code, 1);
  EXPECT_NE(replay.err.find("backend"), std::string::npos);

  fs::create_directories(dir_);
  std::ofstream(dir_ / "bad.json") << R"({"environment": {"kind": "market"}, "agents": [{"count": 1}], "foo": 1})";
  auto bad = cli({"run", "--config", (dir_ / "bad.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("foo: unknown key 'foo'"), std::string::npos);
}

TEST_F(CliTest, MissingSectionIsAConfigError) {
  auto r = cli({"transfer", "--config", kConfigs + "minimal.json", "--out", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("transfer"), std::string::npos);
}

TEST_F(CliTest, HelpAndVersion) {
  auto h = cli({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("trials"), std::string::npos);
  auto v = cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(AGENTLAB_VERSION) + "\n");
}
