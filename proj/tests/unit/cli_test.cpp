#include <gtest/gtest.h>

#include <filesystem>

#include "run_cli.hpp"

namespace {

namespace fs = std::filesystem;
using cmx::testing::read_file;
using cmx::testing::run_cli;

const std::string kCli = CMX_CLI_PATH;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cmx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  int run(std::initializer_list<std::string> args) { return run_cli(kCli, args, dir_); }

  fs::path dir_;
};

TEST_F(Cli, HelpSucceeds) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(read_file(dir_ / "stdout.txt").find("synth"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"synth"}), 2);
  EXPECT_EQ(run({"synth", "--preset", "four_blobs"}), 2);
  EXPECT_EQ(run({"--split", "1.5", "synth", "--preset", "two_equal"}), 2);
}

TEST_F(Cli, MissingFileExitsWithFour) {
  EXPECT_EQ(run({"stats", "--data", path("absent.csv")}), 4);
  EXPECT_NE(read_file(dir_ / "stderr.txt").find("absent.csv"), std::string::npos);
}

TEST_F(Cli, ParseErrorExitsWithTwo) {
  {
    std::ofstream out(path("bad.csv"));
    out << "id,label,e0\nu1,a,1\nu2,b,NaN\n";
  }
  EXPECT_EQ(run({"stats", "--data", path("bad.csv")}), 2);
  EXPECT_NE(read_file(dir_ / "stderr.txt").find("line 3"), std::string::npos);
}

TEST_F(Cli, PipelineProducesExpectedFiles) {
  ASSERT_EQ(run({"--seed", "7", "-o", path("d.csv"), "synth", "--preset", "two_equal"}), 0);
  ASSERT_EQ(run({"-o", path("m.json"), "fit", "--data", path("d.csv")}), 0);
  ASSERT_EQ(run({"-o", path("r.csv"), "score", "--data", path("d.csv"), "--model", path("m.json")}), 0);
  ASSERT_EQ(run({"-o", path("s.csv"), "slices", "--records", path("r.csv"), "--data", path("d.csv")}), 0);
  ASSERT_EQ(run({"--format", "json", "-o", path("stats.json"), "stats", "--data", path("d.csv")}), 0);
  ASSERT_EQ(run({"-o", path("h.csv"), "heatmap", "--preset", "two_equal", "--resolution", "5", "5"}), 0);
  ASSERT_EQ(run({"--format", "csv_bundle", "-o", path("bundle"), "report", "--data", path("d.csv")}), 0);

  EXPECT_EQ(read_file(dir_ / "d.csv").rfind("id,label,e0,e1\n", 0), 0u);
  EXPECT_EQ(read_file(dir_ / "s.csv").rfind("features,slice,accuracy,size,rank,errors", 0), 0u);
  EXPECT_EQ(read_file(dir_ / "h.csv").rfind("x,y,value\n", 0), 0u);
  EXPECT_NE(read_file(dir_ / "stats.json").find("\"normalized_entropy\""), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "bundle" / "records.csv"));
}

TEST_F(Cli, BinaryDatasetsAreAccepted) {
  ASSERT_EQ(run({"--seed", "3", "--format", "bin", "-o", path("d.bin"), "synth", "--preset", "circle_ellipse"}), 0);
  EXPECT_EQ(read_file(dir_ / "d.bin").substr(0, 5), "CPLX1");
  EXPECT_EQ(run({"stats", "--data", path("d.bin")}), 0);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* tag : {"a", "b"}) {
    const std::string t = tag;
    ASSERT_EQ(run({"--seed", "11", "-o", path("d" + t + ".csv"), "synth", "--preset", "three_single_overlap"}), 0);
    ASSERT_EQ(run({"--seed", "11", "--split", "0.8", "-o", path("r" + t + ".json"), "report", "--data",
                   path("d" + t + ".csv")}),
              0);
  }
  EXPECT_EQ(read_file(dir_ / "da.csv"), read_file(dir_ / "db.csv"));
  const auto a = read_file(dir_ / "ra.json");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, read_file(dir_ / "rb.json"));
}

TEST_F(Cli, ExternalPredictionsWithUnknownIdFailToJoin) {
  ASSERT_EQ(run({"--seed", "1", "-o", path("d.csv"), "synth", "--preset", "two_equal"}), 0);
  ASSERT_EQ(run({"-o", path("r.csv"), "score", "--data", path("d.csv")}), 0);
  {
    std::ofstream out(path("p.csv"));
    out << "id,predicted_label,confidence\nnobody,c0,0.5\n";
  }
  EXPECT_EQ(run({"--predictions", path("p.csv"), "slices", "--records", path("r.csv")}), 2);
  EXPECT_NE(read_file(dir_ / "stderr.txt").find("c0_0"), std::string::npos);
}

}  // namespace
