#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>

#include "apxne/cli.hpp"
#include "apxne/instance_io.hpp"
#include "fixtures.hpp"

using namespace apxne;
namespace fx = apxne::testing;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("apxne_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_file(path("t1.json"), serialize_instance(fx::t1()));
    write_file(path("gmp2.json"), serialize_instance(fx::gmp2()));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, SolveExitCodes) {
  EXPECT_EQ(run({"solve", "--instance", path("t1.json"), "--alpha", "1", "--beta", "0"}), 0);
  const Json doc = Json::parse(out_.str());
  EXPECT_EQ(doc["witness"], Json::array({0.0}));
  EXPECT_EQ(run({"solve", "--instance", path("gmp2.json"), "--alpha", "1"}), 1);
  EXPECT_EQ(run({"solve", "--instance", path("nope.json")}), 3);
  EXPECT_EQ(run({"solve", "--instance", path("gmp2.json"), "--node-limit", "1"}), 2);
  EXPECT_EQ(run({"solve", "--instance", path("gmp2.json"), "--alpha", "2,2.5"}), 0);
  EXPECT_EQ(run({"solve", "--instance", path("gmp2.json"), "--alpha", "0.5"}), 4);
  EXPECT_EQ(run({"solve"}), 4);
  EXPECT_EQ(run({"frobnicate"}), 4);
}

TEST_F(Cli, SolveWritesOutFile) {
  EXPECT_EQ(run({"solve", "--instance", path("t1.json"), "--out", path("r.json"), "--no-timing"}), 0);
  EXPECT_TRUE(out_.str().empty());
  EXPECT_TRUE(Json::parse(read_file(path("r.json")))["wall_time_s"].is_null());
}

TEST_F(Cli, BestAlpha) {
  EXPECT_EQ(run({"best-alpha", "--instance", path("gmp2.json"), "--variant", "reuse-cuts", "--trace",
                 path("trace.csv")}),
            0);
  const Json doc = Json::parse(out_.str());
  EXPECT_LE(doc["alpha_lo"].get<double>(), 2.0);
  EXPECT_GE(doc["alpha_hi"].get<double>(), 2.0);
  EXPECT_EQ(read_file(path("trace.csv")).rfind("iteration,alpha,status,nodes,cuts,time_s\n", 0), 0u);

  EXPECT_EQ(run({"best-alpha", "--instance", path("t1.json"), "--variant", "multitree"}), 0);
  EXPECT_EQ(Json::parse(out_.str())["alpha_hi"], 1.0);
  EXPECT_EQ(run({"best-alpha", "--instance", path("t1.json"), "--variant", "fastest"}), 4);

  write_file(path("mp.json"), serialize_instance(fx::matching_pennies()));
  EXPECT_EQ(run({"best-alpha", "--instance", path("mp.json"), "--max-growth", "2"}), 1);
}

TEST_F(Cli, GenerateIsDeterministic) {
  EXPECT_EQ(run({"generate", "--nodes", "4", "--edges", "6", "--players", "2", "--seed", "9"}), 0);
  const std::string a = out_.str();
  EXPECT_EQ(run({"generate", "--nodes", "4", "--edges", "6", "--players", "2", "--seed", "9"}), 0);
  EXPECT_EQ(out_.str(), a);
  EXPECT_EQ(run({"generate", "--count", "3", "--seed", "4", "--out-dir", path("gen")}), 0);
  for (const char* f : {"flow_4.json", "flow_5.json", "flow_6.json"}) EXPECT_TRUE(fs::exists(dir_ / "gen" / f));
  EXPECT_EQ(run({"solve", "--instance", path("gen/flow_4.json"), "--alpha", "1000"}), 0);
}

TEST_F(Cli, Verify) {
  EXPECT_EQ(run({"verify", "--instance", path("gmp2.json"), "--alpha", "2"}), 0);
  const Json doc = Json::parse(out_.str());
  EXPECT_EQ(doc["alpha_min"], 2.0);
  EXPECT_EQ(doc["ne_set"].size(), 4u);
  EXPECT_EQ(doc["br_family_sizes"], Json::array({2, 2}));

  write_file(path("fg1.json"), serialize_instance(fx::fg1()));
  EXPECT_EQ(run({"verify", "--instance", path("fg1.json")}), 3);
}

TEST_F(Cli, ReportCounts) {
  fs::create_directories(dir_ / "res");
  auto doc = [](const char* status, double t, const char* variant) {
    Json d;
    d["status"] = status;
    if (variant) d["variant"] = variant;
    d["alpha_hi"] = 2.0;
    d["wall_time_s"] = t;
    return d.dump();
  };
  write_file(path("res/a.json"), doc("NeFound", 0.5, nullptr));
  write_file(path("res/b.json"), doc("TimeLimit", 3600.0, nullptr));
  write_file(path("res/c.json"), doc("NoNeExists", 1.5, nullptr));
  EXPECT_EQ(run({"report", "--results", path("res"), "--out", path("rep")}), 0);
  EXPECT_EQ(read_file(path("rep/ecdf.csv")), "time_s,solve\n0.5,1\n1.5,2\n");

  write_file(path("res/d.json"), doc("Converged", 1.0, "multitree"));
  write_file(path("res/e.json"), doc("Converged", 2.0, "reuse-cuts"));
  const auto [ecdf, alpha] = build_report(path("res"));
  EXPECT_EQ(ecdf, "time_s,multitree,reuse-cuts,solve\n0.5,0,0,1\n1,1,0,1\n1.5,1,0,2\n2,1,1,2\n");
  EXPECT_EQ(alpha, "alpha,multitree,reuse-cuts,solve\n2,1,1,0\n");

  fs::create_directories(dir_ / "empty");
  const auto [e1, e2] = build_report(path("empty"));
  EXPECT_EQ(e1, "time_s\n");
  EXPECT_EQ(e2, "alpha\n");
  EXPECT_EQ(run({"report", "--results", path("missing")}), 3);
}

TEST_F(Cli, HelpListsTolerances) {
  EXPECT_EQ(run({"solve", "--help"}), 0);
  for (const char* flag : {"--tol-ne", "--tol-prune", "--tol-cut", "--time-limit", "--node-limit"}) {
    EXPECT_NE(out_.str().find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(out_.str().find("1e-08"), std::string::npos);
}
