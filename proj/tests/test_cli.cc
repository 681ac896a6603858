// Drives the built `thematic` binary end to end on the sample corpus.

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "fixtures.h"
#include "thematic/api.h"
#include "thematic/config.h"
#include "thematic/hash.h"

using namespace thematic;
using namespace testing_support;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun thematic_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(THEMATIC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = temp_dir("cli");
    // Same settings as config/sample.yaml, artifacts in the temp dir.
    config = dir / "sample.yaml";
    std::ofstream(config) << "corpus: {source: " << THEMATIC_SOURCE_DIR << "/data/sample/manifest.jsonl}\n"
                          << "ingest: {chunks: 10}\n"
                          << "train: {topics: 8, iterations: 300, seed: 7, alpha: 0.2}\n"
                          << "serve: {bundle: out/corpus.tmcb, model: out/model.tmlm, layout: out/layout.json, "
                             "sessions: out/sessions.json}\n";
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string cfg() const { return "--config " + config.string(); }
  fs::path dir, config;
};

}  // namespace

TEST_F(CliTest, StagesMatchTheOneShotRun) {
  fs::create_directories(dir / "out");
  ASSERT_EQ(thematic_cli(cfg() + " ingest", dir).code, 0);
  ASSERT_EQ(thematic_cli(cfg() + " train", dir).code, 0);
  CliRun map = thematic_cli(cfg() + " --json map", dir);
  ASSERT_EQ(map.code, 0) << map.err;
  json done = json::parse(map.out.substr(0, map.out.find('\n')));
  EXPECT_EQ(done["event"], "done");
  EXPECT_EQ(done["stage"], "map");

  ASSERT_EQ(thematic_cli(cfg() + " run --out-dir " + (dir / "oneshot").string(), dir).code, 0);
  EXPECT_EQ(slurp(dir / "out/corpus.tmcb"), slurp(dir / "oneshot/corpus.tmcb"));
  EXPECT_EQ(slurp(dir / "out/model.tmlm"), slurp(dir / "oneshot/model.tmlm"));
  EXPECT_EQ(slurp(dir / "out/layout.json"), slurp(dir / "oneshot/layout.json"));
  json layout = json::parse(slurp(dir / "out/layout.json"));
  EXPECT_EQ(layout["themes"].size(), 8u);
  EXPECT_GE(layout["cluster_count"].get<int>(), 2);
}

TEST_F(CliTest, FlagsOverrideTheConfig) {
  CliRun r = thematic_cli(cfg() + " --json ingest --chunks 5 --out " + (dir / "c.tmcb").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  json done = json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(done["documents"], 50);
  EXPECT_EQ(done["chunks"], 250);
}

TEST_F(CliTest, ExportWritesTheSessionReport) {
  ASSERT_EQ(thematic_cli(cfg() + " run", dir).code, 0);
  PipelineConfig pc = load_config(config);
  std::string sid;
  json expected;
  {
    ExplorerService service(pc.serve);
    sid = service.sessions().create().session_id;
    service.sessions().update_selection(sid, {"S003", "S017", "S042"});
    expected = service.session_report(sid);
  }
  CliRun r = thematic_cli(cfg() + " export --session " + sid, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out), expected);
  EXPECT_EQ(expected["papers"].size(), 3u);

  CliRun missing = thematic_cli(cfg() + " export --session nope", dir);
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope"), std::string::npos);
}

TEST_F(CliTest, ErrorsAndExitCodes) {
  CliRun no_bundle = thematic_cli("train --corpus /nonexistent/c.tmcb --out " + (dir / "m").string(), dir);
  EXPECT_EQ(no_bundle.code, 2);
  EXPECT_NE(no_bundle.err.find("/nonexistent/c.tmcb"), std::string::npos);

  CliRun json_err = thematic_cli("--json train --corpus /nonexistent/c.tmcb --out " + (dir / "m").string(), dir);
  json ev = json::parse(json_err.out);
  EXPECT_EQ(ev["event"], "error");
  EXPECT_EQ(ev["code"], "io_error");

  EXPECT_EQ(thematic_cli("train --topics", dir).code, 1);
  EXPECT_EQ(thematic_cli("frobnicate", dir).code, 1);
  EXPECT_EQ(thematic_cli("--config /nonexistent.yaml ingest", dir).code, 1);
  EXPECT_EQ(thematic_cli("ingest", dir).code, 1);  // no manifest anywhere
  EXPECT_EQ(thematic_cli("--help", dir).code, 0);

  std::ofstream(dir / "bad.yaml") << "train: {topics: 1}\n";
  CliRun bad = thematic_cli("--config " + (dir / "bad.yaml").string() + " ingest", dir);
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("train.topics"), std::string::npos);

  std::ofstream(dir / "garbage.tmcb") << "not a bundle";
  CliRun corrupt = thematic_cli("train --corpus " + (dir / "garbage.tmcb").string() + " --out " + (dir / "m").string(), dir);
  EXPECT_EQ(corrupt.code, 2);
}
