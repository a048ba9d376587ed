// Copyright 2026 The personaact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "personaact/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace personaact {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  Json summary;
  Json error;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "personaact");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  if (r.code == 0) {
    r.summary = Json::parse(r.out);
  } else {
    std::string last = r.err;
    while (!last.empty() && last.back() == '\n') last.pop_back();
    if (auto nl = last.rfind('\n'); nl != std::string::npos) last = last.substr(nl + 1);
    r.error = Json::parse(last);
  }
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { setenv("PERSONAACT_HOME", (dir_ / "home").c_str(), 1); }
  void TearDown() override { unsetenv("PERSONAACT_HOME"); }
  fs::path path(const std::string& name) { return dir_ / name; }
  fixtures::TempDir dir_;
};

TEST_F(CliTest, PipelineFromCatalogToEvaluation) {
  const auto cat = run_cli({"gen-catalog", "--tops", "5", "--subs", "2", "--videos-per-top", "10",
                            "--out", path("cat").string()});
  ASSERT_EQ(cat.code, 0) << cat.err;
  EXPECT_EQ(cat.summary["videos"], 50);
  EXPECT_TRUE(fs::exists(path("cat") / "catalog.json"));
  EXPECT_TRUE(fs::exists(path("cat") / "config.json"));

  const std::string catalog = (path("cat") / "catalog.json").string();
  const auto tr = run_cli({"gen-traces", "--catalog", catalog, "--favourites", "Gaming,Music",
                           "--sessions", "10", "--records-per-session", "20", "--out",
                           path("tr").string()});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_EQ(tr.summary["sessions"], 10);
  EXPECT_EQ(tr.summary["records"], 200);

  const std::string traces = (path("tr") / "traces.jsonl").string();
  const auto sp = run_cli({"split", "--traces", traces, "--out", path("sp").string()});
  ASSERT_EQ(sp.code, 0) << sp.err;
  EXPECT_EQ(sp.summary["train"], 8);
  EXPECT_EQ(sp.summary["validation"], 1);
  EXPECT_EQ(sp.summary["test"], 1);

  const std::string split = (path("sp") / "split.json").string();
  const auto fit = run_cli({"fit-policy", "--traces", traces, "--split-file", split, "--out",
                            path("fit").string()});
  ASSERT_EQ(fit.code, 0) << fit.err;
  EXPECT_EQ(fit.summary["train_records"], 160);

  const auto ev = run_cli({"evaluate", "--traces", traces, "--split-file", split, "--policy-file",
                           (path("fit") / "policy.json").string(), "--out", path("ev").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.summary["n"], 20);
  EXPECT_GT(ev.summary["smape"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(path("ev") / "eval.csv"));

  const auto replay = run_cli({"evaluate", "--traces", traces, "--split-file", split, "--policy",
                               "replay", "--out", path("rp").string()});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(replay.summary["smape"].get<double>(), 0.0);
  EXPECT_EQ(replay.summary["mean_reward"].get<double>(), 3.0);

  const auto an = run_cli({"analyze", "--traces", traces, "--split-file", split, "--out",
                           path("an").string()});
  ASSERT_EQ(an.code, 0) << an.err;
  EXPECT_TRUE(fs::exists(path("an") / "features-concentrated.json"));
}

TEST_F(CliTest, IngestReportsRejections) {
  std::vector<fixtures::Row> rows = fixtures::daily_sessions("p", 3);
  std::string text = fixtures::trace_text(rows) + "{not json\n";
  spit(path("t.jsonl"), text);
  const auto r = run_cli({"ingest", "--traces", path("t.jsonl").string(), "--out",
                          path("in").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.summary["records"], 3);
  EXPECT_EQ(r.summary["rejected"], 1);
}

TEST_F(CliTest, StepsBelowWindowIsConfigError) {
  const auto r = run_cli({"audit-breadth", "--steps", "49", "--window", "50"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.error["error_code"], "cli.ConfigInvalid");
  EXPECT_EQ(r.error["cause"], "audit.StepsBelowWindow");
}

TEST_F(CliTest, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(run_cli({"split", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  const auto r = run_cli({"split", "--traces", path("missing.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.error["error_code"], "trace.FileNotFound");
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  spit(path("c.json"), R"({"tops": 4, "subs": 2, "videos_per_top": 5})");
  const auto r = run_cli({"gen-catalog", "--config", path("c.json").string(), "--tops", "3",
                          "--out", path("o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.summary["videos"], 15);
  const Json cfg = Json::parse(slurp(path("o") / "config.json"));
  EXPECT_EQ(cfg["command"], "gen-catalog");
  EXPECT_EQ(cfg["params"]["tops"], 3);
  EXPECT_EQ(cfg["params"]["subs"], 2);

  spit(path("bad.json"), R"({"no_such_param": 1})");
  EXPECT_EQ(run_cli({"gen-catalog", "--config", path("bad.json").string()}).code, 2);
}

TEST_F(CliTest, DefaultOutputDirIsUnderHome) {
  const auto r = run_cli({"gen-catalog", "--tops", "2", "--subs", "1", "--videos-per-top", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path out = r.summary["out"].get<std::string>();
  EXPECT_EQ(out.parent_path(), fs::absolute(path("home") / "runs").lexically_normal());
  EXPECT_EQ(out.filename().string().rfind("gen-catalog-", 0), 0u);
}

TEST_F(CliTest, ReplayReproducesAuditReport) {
  const auto r = run_cli({"audit-depth", "--phase-steps", "100", "--seed", "4", "--catalog-tops",
                          "6", "--catalog-subs", "2", "--catalog-videos-per-top", "10",
                          "--reverse-discrete", "--favourites", "Gaming,Music", "--out", path("d").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json cfg = Json::parse(slurp(path("d") / "config.json"));
  EXPECT_EQ(cfg["params"]["reverse_discrete"], true);
  const auto again = run_cli({"--replay", path("d").string(), "--replay-out", path("d2").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(path("d") / "report.json"), slurp(path("d2") / "report.json"));
  EXPECT_EQ(slurp(path("d") / "config.json"), slurp(path("d2") / "config.json"));
}

TEST_F(CliTest, SweepWritesCells) {
  const auto r = run_cli({"audit-breadth", "--steps", "120", "--window", "50", "--seeds", "0-1",
                          "--sweep-eta", "0,0.2", "--catalog-tops", "5", "--catalog-subs", "1",
                          "--catalog-videos-per-top", "5", "--favourites", "Gaming", "--out", path("sw").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(r.summary["cells"].size(), 4u);
  EXPECT_TRUE(fs::exists(path("sw") / "sweep.json"));
  EXPECT_TRUE(fs::exists(path("sw") / "eta-0.2" / "seed-1" / "breadth.csv"));
  // A cell replays on its own.
  const auto cell = run_cli({"--replay", (path("sw") / "eta-0.2" / "seed-1").string(),
                             "--replay-out", path("cell").string()});
  ASSERT_EQ(cell.code, 0) << cell.err;
  EXPECT_EQ(slurp(path("sw") / "eta-0.2" / "seed-1" / "report.json"),
            slurp(path("cell") / "report.json"));
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = PERSONAACT_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(status(std::system((bin + " --help" + quiet).c_str())), 0);
  EXPECT_EQ(status(std::system((bin + " audit-breadth --steps 10" + quiet).c_str())), 2);
  EXPECT_EQ(status(std::system((bin + " ingest --traces /nonexistent/x.jsonl --out " +
                                path("x").string() + quiet)
                                   .c_str())),
            1);
}

}  // namespace
}  // namespace personaact
