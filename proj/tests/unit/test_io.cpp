#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gibbsmix/io.hpp"
#include "gibbsmix/version.hpp"

using namespace gibbsmix;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gibbsmix_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(IoTest, TvCurveCsv) {
  const std::vector<std::pair<std::size_t, double>> curve = {{0, 1.0}, {1, 0.5}};
  io::write_tv_curve_csv(dir_ / "c.csv", curve);
  EXPECT_EQ(slurp(dir_ / "c.csv"), "t,tv\n0,1\n1,0.5\n");
}

TEST_F(IoTest, DoublesRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_double(x)), x);
}

TEST_F(IoTest, TrajectoryCsvColumns) {
  const ModelParams p(10.0);
  io::write_trajectory_csv(dir_ / "x.csv", run_x({0.5, 0.5}, 3, p, 1));
  io::write_trajectory_csv(dir_ / "z.csv", run_z(0.5, 3, p, 1));
  io::write_trajectory_csv(dir_ / "w.csv", run_w(0.5, 3, p, 1));
  EXPECT_EQ(slurp(dir_ / "x.csv").substr(0, 9), "step,u,v\n");
  EXPECT_EQ(slurp(dir_ / "z.csv").substr(0, 23), "step,value,unreflected\n");
  const std::string w = slurp(dir_ / "w.csv");
  EXPECT_EQ(w.substr(0, 11), "step,value\n");
  EXPECT_EQ(std::count(w.begin(), w.end(), '\n'), 5);
}

TEST_F(IoTest, HistogramCountsNever) {
  const std::vector<std::optional<std::size_t>> times = {3, std::nullopt, 3, 1};
  io::write_time_histogram_csv(dir_ / "h.csv", times);
  EXPECT_EQ(slurp(dir_ / "h.csv"), "time,count\n1,1\n3,2\nnever,1\n");
}

TEST_F(IoTest, SidecarCarriesVersion) {
  io::write_text(dir_ / "a.csv", "x\n");
  io::write_sidecar(dir_ / "a.csv", "tv_curve", 10.0, 500);
  const auto j = nlohmann::json::parse(slurp(dir_ / "a.csv.meta.json"));
  EXPECT_EQ(j.at("version"), kVersion);
  EXPECT_EQ(j.at("n"), 500);
  EXPECT_EQ(j.at("a"), 10.0);
  EXPECT_FALSE(j.contains("seed"));
}

TEST_F(IoTest, WriteFailureNamesPath) {
  try {
    io::write_text(dir_ / "no" / "such" / "file.txt", "x");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("file.txt"), std::string::npos);
  }
}

TEST_F(IoTest, MixingResultJson) {
  MixingResult r;
  r.a = 10.0;
  r.n = 500;
  r.epsilon = 0.25;
  r.converged = true;
  r.t_mix = 71;
  r.tv_curve = {{0, 1.0}, {71, 0.2}};
  const auto j = io::to_json(r);
  EXPECT_EQ(j.at("t_mix"), 71);
  EXPECT_DOUBLE_EQ(j.at("t_mix_over_a2").get<double>(), 0.71);
  EXPECT_EQ(j.at("tv_curve").size(), 2u);
  r.converged = false;
  EXPECT_TRUE(io::to_json(r).at("t_mix").is_null());
}

TEST_F(IoTest, TrajectoryJson) {
  const auto j = io::to_json(run_w(0.5, 10, ModelParams(10.0), 4));
  EXPECT_EQ(j.at("process"), "W");
  EXPECT_TRUE(j.at("stopping").contains("nu_c2"));
}
