#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  std::string cmd = std::string(VSERVO_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& rel) { return std::string(VSERVO_DATA_DIR) + "/" + rel; }

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("vservo_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, ForwardKinematicsAtHome) {
  CliRun r = run("fk 0 0 0 0 0 0");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["d"][0].get<double>(), 1.27, 1e-12);
  EXPECT_NEAR(j["d"][1].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(j["d"][2].get<double>(), 1.57, 1e-12);
}

TEST(Cli, InverseKinematicsListsCandidates) {
  CliRun r = run("ik 1.285 0 1.57 --R 0 0 1 0 1 0 -1 0 0");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.contains("candidates"));
  EXPECT_GE(j["candidates"].size(), 1u);
  int selected = 0;
  for (const auto& c : j["candidates"]) selected += c["selected"].get<bool>();
  EXPECT_EQ(selected, 1);
  EXPECT_EQ(j["selected_q_deg"].size(), 6u);
}

TEST(Cli, UnreachableTargetExitCode) { EXPECT_EQ(run("ik 5 5 5").code, 3); }

TEST(Cli, MalformedArgumentsExitCode) {
  EXPECT_EQ(run("fk 1 2").code, 2);
  EXPECT_EQ(run("fk a b c d e f").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
}

TEST(Cli, MissingFileExitCode) {
  EXPECT_EQ(run("simulate /nonexistent/scenario.json").code, 2);
  EXPECT_EQ(run("noise-estimate /nonexistent/image.pgm").code, 2);
}

TEST(Cli, MalformedConfigExitCode) {
  fs::path d = scratch("bad");
  {
    std::ofstream o(d / "bad.json");
    o << "{ \"system\": \"tool\", \"dt\": -1 }";
  }
  {
    std::ofstream o(d / "broken.json");
    o << "{ not json";
  }
  EXPECT_EQ(run("simulate " + (d / "bad.json").string()).code, 2);
  EXPECT_EQ(run("simulate " + (d / "broken.json").string()).code, 2);
}

TEST(Cli, NoiseEstimateFixtures) {
  CliRun r = run("noise-estimate " + data("fixtures/textured_sigma5.pgm"));
  ASSERT_EQ(r.code, 0);
  double s = std::stod(r.out);
  EXPECT_GT(s, 4.5);
  EXPECT_LT(s, 5.5);
  r = run("noise-estimate " + data("fixtures/constant.pgm"));
  ASSERT_EQ(r.code, 0);
  EXPECT_LT(std::stod(r.out), 1e-6);
  EXPECT_EQ(run("noise-estimate " + data("fixtures/truncated.pgm")).code, 2);
}

TEST(Cli, SimulateWritesTraceAndMetrics) {
  fs::path d = scratch("sim");
  CliRun r = run("--out-dir " + d.string() + " simulate " + data("siso_visual_ff_fb.json"));
  EXPECT_EQ(r.code, 0);
  ASSERT_TRUE(fs::exists(d / "siso_visual_ff_fb.trace.csv"));
  ASSERT_TRUE(fs::exists(d / "siso_visual_ff_fb.metrics.json"));
  auto m = nlohmann::json::parse(slurp(d / "siso_visual_ff_fb.metrics.json"));
  EXPECT_FALSE(m["diverged"].get<bool>());
  std::string head = slurp(d / "siso_visual_ff_fb.trace.csv").substr(0, 4);
  EXPECT_EQ(head, "t,q1");
}

TEST(Cli, SearchIsReproducible) {
  fs::path a = scratch("search_a"), b = scratch("search_b");
  ASSERT_EQ(run("--out-dir " + a.string() + " search " + data("search_et2.json")).code, 0);
  ASSERT_EQ(run("--out-dir " + b.string() + " search " + data("search_et2.json")).code, 0);
  std::string ta = slurp(a / "search_et2.trajectory.csv"), tb = slurp(b / "search_et2.trajectory.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, tb);
  auto s = nlohmann::json::parse(slurp(a / "search_et2.summary.json"));
  EXPECT_EQ(s["safety_violations"].get<int>(), 0);
}

TEST(Cli, SweepPrintsTable) {
  fs::path d = scratch("sweep");
  CliRun r = run("--out-dir " + d.string() + " sweep " + data("sweeps/reduced_visual_zeta.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("value,settling,overshoot", 0), 0u);
  EXPECT_TRUE(fs::exists(d / "reduced_visual_zeta.sweep.csv"));
}
