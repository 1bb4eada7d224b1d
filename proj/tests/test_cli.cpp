#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "csperf/csv.hpp"
#include "csperf/iosim.hpp"

namespace fs = std::filesystem;

namespace {

struct cli_result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("csperf_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  cli_result cli(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + CSPERF_CLI + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    cli_result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string config(const std::string& name) {
    return std::string(CSPERF_CONFIG_DIR) + "/" + name;
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, MinimalRunWritesOneRow) {
  const auto r = cli("run --config " + config("minimal.json") + " --out " + out("m"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = csperf::read_csv(out("m") + "/dyncore.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.number(0, "ranks"), 1);
  EXPECT_GT(t.number(0, "total_s"), 0);
  EXPECT_TRUE(fs::exists(out("m") + "/summary.txt"));
  EXPECT_TRUE(fs::exists(out("m") + "/breakdown.txt"));
}

TEST_F(Cli, BadLayoutExitsTwoNamingConstraint) {
  const auto p = write("bad.json",
                       R"({"mesh": {"panel_size": 8}, "layout": {"nodes": 1, "ranks_per_node": 100, "threads_per_rank": 2}})");
  const auto r = cli("run --config " + p.string() + " --out " + out("b"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/layout"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("128"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out("b") + "/dyncore.csv"));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli("run --config " + write("u.json", R"({"colour": 1})").string()).code, 2);
  const auto r = cli("run --config " + write("p.json", "{\n  \"mesh\": ,\n}").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2, column"), std::string::npos) << r.err;
  EXPECT_EQ(cli("run --config /nonexistent.json").code, 2);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("run --config " + config("minimal.json") + " --repeat 0").code, 2);
}

TEST_F(Cli, WeakScalingConfigHasFifteenRows) {
  const auto r = cli("run --config " + config("weak-256.json") + " --out " + out("w"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = csperf::read_csv(out("w") + "/dyncore.csv");
  EXPECT_EQ(t.rows.size(), 15u);
}

TEST_F(Cli, SweepAxes) {
  auto r = cli("sweep --config " + config("weak-256.json") + " --axis threads --out " +
               out("s"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csperf::read_csv(out("s") + "/threads.csv").rows.size(), 15u);

  r = cli("sweep --config " + config("c192-tuned.json") + " --axis pools --out " + out("s"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pools = csperf::read_csv(out("s") + "/pools.csv");
  ASSERT_EQ(pools.rows.size(), 4u);
  EXPECT_EQ(pools.number(0, "pools"), 1);

  EXPECT_EQ(cli("sweep --config " + config("c192-tuned.json") + " --axis colour").code, 2);
  EXPECT_EQ(cli("sweep --config " + config("c192-tuned.json") + " --axis threads").code, 2);
  EXPECT_EQ(cli("sweep --config " + config("minimal.json")).code, 2);
}

TEST_F(Cli, ReportAgainstItselfGivesUnitRatios) {
  ASSERT_EQ(cli("run --config " + config("weak-breakdown.json") + " --out " + out("a")).code, 0);
  const std::string csv = out("a") + "/dyncore.csv";
  const auto r = cli("report " + csv + " " + csv + " --out " + out("r"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ratios = csperf::read_csv(out("r") + "/ratio_1.csv");
  ASSERT_EQ(ratios.rows.size(), 3u);
  for (std::size_t k = 0; k < ratios.rows.size(); ++k)
    for (const char* col : {"user_s_ratio", "total_s_ratio"}) EXPECT_EQ(ratios.number(k, col), 1.0);
}

TEST_F(Cli, ReportSchemaMismatchExitsTwo) {
  ASSERT_EQ(cli("run --config " + config("minimal.json") + " --out " + out("a")).code, 0);
  ASSERT_EQ(cli("run --config " + config("iodev-buffer.json") + " --out " + out("b")).code, 0);
  const auto r = cli("report " + out("a") + "/dyncore.csv " + out("b") + "/io.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("schema"), std::string::npos) << r.err;
  EXPECT_EQ(cli("report " + write("x.csv", "a,b\n1,2\n").string()).code, 2);
}

TEST_F(Cli, RepeatPopulatesDeviation) {
  const auto r = cli("run --config " + config("c896-striped.json") + " --repeat 3 --out " +
                     out("c"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csperf::read_csv(out("c") + "/io.csv").rows.size(), 3u);
  const auto summary = csperf::read_csv(out("c") + "/io_summary.csv");
  EXPECT_EQ(summary.number(0, "runs"), 3);
  EXPECT_GT(summary.number(0, "wall_clock_s_sd"), 0);
  EXPECT_GT(summary.number(0, "write_rate_mib_s_sd"), 0);
}

TEST_F(Cli, OutOfMemoryExitsThree) {
  const auto p = write("oom.json", R"({
    "cost_model": {"preset": "archer2-cray", "words_per_cell_level": 200},
    "mesh": {"panel_size": 1024, "levels": 120},
    "layout": {"nodes": 3, "threads_per_rank": 4}})");
  const auto r = cli("run --config " + p.string() + " --out " + out("o"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("OUT_OF_MEMORY"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out("o") + "/summary.txt"));
}

TEST_F(Cli, UnwritableFieldExitsThree) {
  const auto p = write("uf.json", R"({
    "io_scenario": {"clients": 2, "servers_level1": 1, "buffer_bytes": 10,
                    "base_write_rate_mib_s": 1, "compute_rate": 1},
    "schedule": {"run_hours": 1, "entries": [{"field_count": 1, "period_hours": 1,
                                               "bytes_per_field": 1000}]}})");
  const auto r = cli("run --config " + p.string() + " --out " + out("u"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("UNWRITABLE_FIELD"), std::string::npos) << r.err;
}

TEST_F(Cli, RunsAreByteIdentical) {
  for (const char* name : {"weak-breakdown.json", "c192-tuned.json"}) {
    ASSERT_EQ(cli("run --config " + config(name) + " --out " + out("x")).code, 0);
    ASSERT_EQ(cli("run --config " + config(name) + " --out " + out("y")).code, 0);
    for (const auto& entry : fs::directory_iterator(out("x")))
      EXPECT_EQ(slurp(entry.path()), slurp(fs::path(out("y")) / entry.path().filename()))
          << name << " " << entry.path().filename();
  }
}
