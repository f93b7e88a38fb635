#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kCli = BOMAI_CLI_PATH;
const fs::path kSourceDir = BOMAI_SOURCE_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bomai_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of the CLI; stdout and stderr go to files in the temp dir.
  int run(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " >\"" + (dir_ / "stdout").string() +
                            "\" 2>\"" + (dir_ / "stderr").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string out() const { return slurp(dir_ / "stdout"); }
  std::string err() const { return slurp(dir_ / "stderr"); }

  fs::path dir_;
};

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(out().find("sweep-beta"), std::string::npos);
}

TEST_F(Cli, MissingSubcommandIsAUsageError) { EXPECT_EQ(run(""), 1); }

TEST_F(Cli, UnknownFlagIsAUsageError) { EXPECT_EQ(run("run --frobnicate"), 1); }

TEST_F(Cli, BadConfigExitsOne) {
  std::ofstream(dir_ / "bad.conf") << "beta=2\n";
  EXPECT_EQ(run("run --config \"" + (dir_ / "bad.conf").string() + "\""), 1);
  EXPECT_NE(err().find("config error"), std::string::npos);
  EXPECT_EQ(run("run --config \"" + (dir_ / "absent.conf").string() + "\""), 1);
}

TEST_F(Cli, RuntimeFailureExitsTwo) {
  EXPECT_EQ(run("plot-data --input \"" + (dir_ / "absent.csv").string() + "\""), 2);
}

TEST_F(Cli, RunWritesMetricsAndPlotDataReshapesThem) {
  const std::string out_dir = (dir_ / "out").string();
  ASSERT_EQ(run("run --episodes 25 --seed 3 --out \"" + out_dir + "\""), 0);
  EXPECT_NE(out().find("metrics written to"), std::string::npos);
  const std::string csv = slurp(dir_ / "out" / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);

  ASSERT_EQ(run("run --episodes 25 --seed 3 --quiet --out \"" + (dir_ / "again").string() + "\""),
            0);
  EXPECT_TRUE(out().empty());
  EXPECT_EQ(slurp(dir_ / "again" / "metrics.csv"), csv);

  ASSERT_EQ(run("plot-data --quiet --input \"" + (dir_ / "out" / "metrics.csv").string() +
                "\" --out \"" + out_dir + "\""),
            0);
  EXPECT_EQ(slurp(dir_ / "out" / "plot_data.csv").rfind("episode,series,value\n", 0), 0u);
}

TEST_F(Cli, SweepWritesOneFilePerBeta) {
  const std::string out_dir = (dir_ / "sweep").string();
  ASSERT_EQ(run("sweep-beta --episodes 10 --quiet --out \"" + out_dir + "\""), 0);
  for (const char* name : {"metrics_beta_1-2_seed42.csv", "metrics_beta_1-10_seed42.csv",
                           "metrics_beta_1-100_seed42.csv", "sweep_summary.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / name)) << name;
  const std::string summary = slurp(dir_ / "sweep" / "sweep_summary.csv");
  EXPECT_EQ(summary.rfind("beta,seed,space_violation_freq,nonbenign_freq\n", 0), 0u);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 4);
}

TEST_F(Cli, EnumerateListsTheFrozenCount) {
  ASSERT_EQ(run("enumerate-tms"), 0);
  const std::string listing = out();
  EXPECT_EQ(std::count(listing.begin(), listing.end(), '\n'), 256);
  EXPECT_EQ(listing.rfind("0 benign tm1 ", 0), 0u);
  EXPECT_EQ(run("enumerate-tms --vocabulary fancy"), 1);
  ASSERT_EQ(run("enumerate-tms --vocabulary standard --max-states 2 --cap 10 --file \"" +
                (dir_ / "tms.txt").string() + "\""),
            0);
  const std::string file = slurp(dir_ / "tms.txt");
  EXPECT_EQ(std::count(file.begin(), file.end(), '\n'), 10);
  EXPECT_NE(out().find("10 machines"), std::string::npos);
}

TEST_F(Cli, ShippedMachineConfigRuns) {
  ASSERT_EQ(run("run --quiet --episodes 20 --config \"" +
                (kSourceDir / "configs" / "mixed.conf").string() + "\" --out \"" +
                dir_.string() + "\""),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "metrics.csv"));
}

}  // namespace
