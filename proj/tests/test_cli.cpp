#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "biota/cli.hpp"
#include "biota/config_io.hpp"
#include "support.hpp"

using biota::testing::data_path;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "biota");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = biota::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("biota_cli_" + name)).string();
}

}  // namespace

TEST(Cli, SimulateWritesCostCsv) {
  const auto r = run({"simulate", "--config", data_path("kth.json"), "--trace", data_path("kth_synth.csv"), "--weather",
                      data_path("kth_weather.csv"), "--out", "-", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("timeslot,zone,coil_kW,chiller_kW,kWh,currency"), std::string::npos);
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(run({"simulate", "--trace", data_path("kth_synth.csv")}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
}

TEST(Cli, BadGoalIsUserError) {
  const auto r = run({"attack", "--config", data_path("kth.json"), "--frame", data_path("kth_frame.json"), "--goal",
                      "energy:lots", "--access", "all"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, AttackOnCodFrame) {
  const auto r = run({"attack", "--config", data_path("cod.json"), "--frame", data_path("cod_frame.json"), "--goal",
                      "energy:5%", "--access", "entrance,warhol", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("sat\n", 0), 0u);
  EXPECT_NE(r.out.find("\"entrance\": 17"), std::string::npos);
  EXPECT_NE(r.out.find("\"warhol\": -17"), std::string::npos);
  // No SMT file unless asked for.
  EXPECT_FALSE(std::filesystem::exists("-"));
}

TEST(Cli, OutputIsDeterministic) {
  std::vector<std::string> args{"attack", "--config", data_path("kth.json"), "--trace", data_path("kth_synth.csv"),
                                "--weather", data_path("kth_weather.csv"), "--goal", "energy:10%", "--access", "all",
                                "--seed", "9", "--out", "-"};
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  args.push_back("--workers");
  args.push_back("1");
  EXPECT_EQ(run(args).out, a.out);
}

TEST(Cli, EmitSmtToFile) {
  const auto path = temp_file("kth.smt2");
  const auto r = run({"emit-smt", "--config", data_path("kth.json"), "--frame", data_path("kth_frame.json"), "--goal",
                      "energy:10%", "--access", "all", "--smt-out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = biota::read_text_file(path);
  EXPECT_NE(text.find("(check-sat)"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, GenerateMatchesFixture) {
  const auto path = temp_file("kth.csv");
  const auto r = run({"generate", "--profile", "kth", "--seed", "2022", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(biota::read_text_file(path), biota::read_text_file(data_path("kth_synth.csv")));
  std::filesystem::remove(path);
}

TEST(Cli, SweepListsSubsets) {
  const auto r = run({"sweep", "--config", data_path("kth.json"), "--trace", data_path("kth_synth.csv"), "--weather",
                      data_path("kth_weather.csv"), "--max-size", "2", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("living_room;bathroom"), std::string::npos);
}
