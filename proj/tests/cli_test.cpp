#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <sys/wait.h>

using namespace bitfrag::testing;
namespace fs = std::filesystem;

namespace {

std::string design(const std::string &name) {
  return std::string(BITFRAG_DESIGNS_DIR) + "/" + name + ".dfg";
}

int run(const std::string &args) {
  std::string cmd = std::string(BITFRAG_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("bitfrag-cli-" + name);
  fs::remove_all(dir);
  return dir;
}

} // namespace

TEST(Cli, WritesEveryEmission) {
  auto dir = scratch("emit");
  ASSERT_EQ(run(design("chain") +
                " --latency 3 --emit transformed --emit schedule --emit report --emit dot"
                " --emit arrivals --check-equiv --out " + dir.string()),
            0);
  for (const char *suffix : {".transformed.dfg", ".schedule.txt", ".report.json", ".dot",
                             ".arrivals.txt"})
    EXPECT_TRUE(fs::exists(dir / (std::string("chain") + suffix))) << suffix;

  auto report = nlohmann::json::parse(read_text((dir / "chain.report.json").string()));
  EXPECT_EQ(report["lambda"], 3);
  EXPECT_EQ(report["n_bits"], 6);
  EXPECT_EQ(report["critical_path"]["time"], 18);
  EXPECT_EQ(report["costs"]["registers"]["max"], 5);
  EXPECT_EQ(report["equiv"]["result"], "pass");
  ASSERT_EQ(report["arrivals"].size(), 48u);
  EXPECT_EQ(report["arrivals"].back()["op"], "G");
  EXPECT_EQ(report["arrivals"].back()["arrival"], 18);
  EXPECT_NE(read_text((dir / "chain.schedule.txt").string()).find("3 x 6-bit adder"), std::string::npos);

  auto transformed = parse_ok(read_text((dir / "chain.transformed.dfg").string()));
  auto eq = bitfrag::check_equiv(load_design("chain"), transformed);
  EXPECT_TRUE(eq.ok());
}

TEST(Cli, Deterministic) {
  auto a = scratch("det-a"), b = scratch("det-b");
  ASSERT_EQ(run(design("eight") + " -l 3 --emit report --emit schedule --out " + a.string()), 0);
  ASSERT_EQ(run(design("eight") + " -l 3 --emit report --emit schedule --out " + b.string()), 0);
  EXPECT_EQ(read_text((a / "eight.report.json").string()), read_text((b / "eight.report.json").string()));
  EXPECT_EQ(read_text((a / "eight.schedule.txt").string()), read_text((b / "eight.schedule.txt").string()));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(design("chain") + " --latency 0"), 2);
  EXPECT_EQ(run(design("chain")), 2);
  EXPECT_EQ(run(design("chain") + " -l 3 --emit nonsense"), 2);
}

TEST(Cli, BadInput) {
  EXPECT_EQ(run("/nonexistent/design.dfg -l 3"), 3);
  auto dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.dfg") << "design d; input a: u4; b: add u4 = a + c; output b;";
  EXPECT_EQ(run((dir / "bad.dfg").string() + " -l 2"), 3);
}

TEST(Cli, LatencyThatCannotBeMet) {
  EXPECT_EQ(run(design("chain") + " -l 3 --nbits 5"), 4);
}

TEST(Cli, BucketFill) {
  EXPECT_EQ(run(design("saturation") + " -l 3 --bucket-fill --check-equiv"), 0);
  // Per-op buckets ignore chaining offsets between ops, so a tight chain has
  // no legal placement.
  EXPECT_EQ(run(design("chain") + " -l 3 --bucket-fill"), 4);
}

TEST(Cli, BenchmarksWithSeeds) {
  EXPECT_EQ(run(design("ewf") + " -l 6 --check-equiv --seed 7"), 0);
  EXPECT_EQ(run(design("diffeq") + " -l 4 --check-equiv --seed 3"), 0);
}
