#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rcx/graph.hpp"
#include "rcx/json_util.hpp"
#include "test_support.hpp"

namespace rcx {
namespace {

using testing::TempDir;

struct RunResult {
  int status = -1;
  std::string output;  // stdout and stderr
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + RCX_CLI_PATH + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string path_arg(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

TEST(Cli, HelpListsSubcommandsAndExitsZero) {
  const RunResult r = run("--help");
  EXPECT_EQ(r.status, 0);
  for (const char* sub : {"gen-data", "train-target", "train-explainer", "explain", "evaluate",
                          "sanity-check", "export-dot", "bench"}) {
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
  }
  const RunResult sub = run("evaluate --help");
  EXPECT_EQ(sub.status, 0);
  EXPECT_NE(sub.output.find("--metrics"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("gen-data --bogus 1 --out x.json").status, 1);
  EXPECT_EQ(run("no-such-command").status, 1);
}

TEST(Cli, GenDataIsByteReproducibleAndWritesAManifest) {
  TempDir dir("cli-gen");
  ASSERT_EQ(run("gen-data --n 30 --seed 7 --out " + path_arg(dir / "a.json")).status, 0);
  ASSERT_EQ(run("gen-data --n 30 --seed 7 --out " + path_arg(dir / "b.json")).status, 0);
  EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json"));
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "a.json.manifest.json"));
  EXPECT_EQ(manifest.at("command"), "gen-data");
  EXPECT_EQ(manifest.at("seeds").at("seed"), 7);
  ASSERT_EQ(run("gen-data --n 30 --seed 8 --out " + path_arg(dir / "c.json")).status, 0);
  EXPECT_NE(read_text_file(dir / "a.json"), read_text_file(dir / "c.json"));
}

TEST(Cli, EnvironmentSeedIsTheDefaultAndFlagsWin) {
  TempDir dir("cli-env");
  ASSERT_EQ(run("gen-data --n 30 --seed 5 --out " + path_arg(dir / "flag.json")).status, 0);
  ASSERT_EQ(run("gen-data --n 30 --out " + path_arg(dir / "env.json"), "RCX_SEED=5").status, 0);
  ASSERT_EQ(run("gen-data --n 30 --seed 5 --out " + path_arg(dir / "both.json"), "RCX_SEED=9").status,
            0);
  EXPECT_EQ(read_text_file(dir / "flag.json"), read_text_file(dir / "env.json"));
  EXPECT_EQ(read_text_file(dir / "flag.json"), read_text_file(dir / "both.json"));
  EXPECT_EQ(run("gen-data --n 30 --out x.json", "RCX_SEED=abc").status, 1);
}

TEST(Cli, ConfigFileIsReadAndFlagsWin) {
  TempDir dir("cli-config");
  write_text_file(dir / "c.ini", "[gen-data]\nn = 33\nseed = 4\n");
  ASSERT_EQ(run("--config " + path_arg(dir / "c.ini") + " gen-data --out " + path_arg(dir / "a.json"))
                .status,
            0);
  EXPECT_EQ(read_dataset(dir / "a.json").graphs.size(), 33u);
  ASSERT_EQ(run("--config " + path_arg(dir / "c.ini") + " gen-data --n 36 --out " +
                path_arg(dir / "b.json"))
                .status,
            0);
  EXPECT_EQ(read_dataset(dir / "b.json").graphs.size(), 36u);
}

TEST(Cli, MissingModelIsAnErrorWithMessage) {
  TempDir dir("cli-missing");
  ASSERT_EQ(run("gen-data --n 30 --out " + path_arg(dir / "d.json")).status, 0);
  const RunResult r = run("evaluate --data " + path_arg(dir / "d.json") + " --out " +
                          path_arg(dir / "r.csv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("--model"), std::string::npos) << r.output;
  const RunResult bad = run("evaluate --data " + path_arg(dir / "d.json") + " --model " +
                            path_arg(dir / "nope.json") + " --out " + path_arg(dir / "r.csv"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("nope.json"), std::string::npos) << bad.output;
}

TEST(Cli, SmallPipelineRunsEndToEnd) {
  TempDir dir("cli-pipe");
  const auto p = [&](const char* name) { return path_arg(dir / name); };
  ASSERT_EQ(run("gen-data --n 30 --seed 2 --out " + p("d.json")).status, 0);
  ASSERT_EQ(run("train-target --data " + p("d.json") + " --epochs 5 --out " + p("m.json")).status, 0);
  ASSERT_EQ(run("train-explainer --data " + p("d.json") + " --model " + p("m.json") +
                " --epochs 1 --width 8 --out " + p("pol.json"))
                .status,
            0);
  ASSERT_EQ(run("explain --data " + p("d.json") + " --model " + p("m.json") + " --policy " +
                p("pol.json") + " --beam 2 --out " + p("e.json"))
                .status,
            0);
  const RunResult ev = run("evaluate --data " + p("d.json") + " --model " + p("m.json") +
                           " --policy " + p("pol.json") + " --out " + p("r.csv"));
  ASSERT_EQ(ev.status, 0) << ev.output;
  const std::string results = read_text_file(dir / "r.csv");
  EXPECT_EQ(results.rfind("method,metric,value\n", 0), 0u);
  EXPECT_NE(results.find("rc,acc_auc,"), std::string::npos) << results;
  EXPECT_TRUE(std::filesystem::exists(dir / "r.csv.curve.csv"));
  ASSERT_EQ(run("sanity-check --data " + p("d.json") + " --model " + p("m.json") + " --policy " +
                p("pol.json") + " --out " + p("sc.csv"))
                .status,
            0);
  const Dataset d = read_dataset(dir / "d.json");
  const std::string id = d.graphs[d.split(Split::kTest).front()].id();
  ASSERT_EQ(run("export-dot --data " + p("d.json") + " --graph " + id + " --explanations " +
                p("e.json") + " --out " + p("g.dot"))
                .status,
            0);
  EXPECT_EQ(read_text_file(dir / "g.dot").rfind("graph", 0), 0u);
  for (const char* artifact : {"d.json", "m.json", "pol.json", "e.json", "r.csv", "sc.csv", "g.dot"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string(artifact) + ".manifest.json"))) << artifact;
  }
}

}  // namespace
}  // namespace rcx
