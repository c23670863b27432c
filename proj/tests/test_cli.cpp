#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd =
      std::string(BWK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bwk_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, HelpAndPresets) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("presets"), 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("run"), 2);
  EXPECT_EQ(run("run --preset nope"), 2);
  EXPECT_EQ(run("sweep --preset paper-bwk-d1 --axis q=1"), 2);
  EXPECT_EQ(run("run --config /definitely/missing.json"), 2);
}

TEST(Cli, BadConfigExitsTwo) {
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "c.json") << R"({"schema": 1, "unknown_key": 3})";
  EXPECT_EQ(run("run --config " + (dir / "c.json").string()), 2);
}

TEST(Cli, RunWritesCsvAndTableReadsIt) {
  const auto dir = scratch("run");
  EXPECT_EQ(run("sweep --preset paper-bwk-d1 --axis T=100 --reps 2 --out " +
                dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "aggregates.csv"));
  EXPECT_EQ(run("table " + dir.string()), 0);
}

TEST(Cli, RuntimeFailureExitsOne) {
  // Output path is an existing regular file, so the directory cannot be made.
  const auto dir = scratch("blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("sweep --preset lower-bound-i2 --axis T=10 --out " +
                (dir / "file" / "sub").string()),
            1);
}

TEST(Cli, TraceOracle) {
  const auto dir = scratch("trace");
  EXPECT_EQ(run("trace-oracle --preset paper-ar1 --reps 2 --out " +
                dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "estimation_error.csv"));
}
