#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "oracles.hpp"
#include "pmrf/bench.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
  json report() const { return json::parse(out); }
};

CliResult run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " " + PMRF_CLI_PATH + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pmrf_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
  std::string four_clause_ = std::string(PMRF_DATA_DIR) + "/four_clause.pmrf";
};

}  // namespace

TEST_F(Cli, CountMatchesOracle) {
  double expected = oracle::log_z(oracle::four_clause());
  for (std::string method : {"fdc", "vdc", "ve", "brute"}) {
    CliResult r = run("count --method " + method + " --input " + four_clause_);
    ASSERT_EQ(r.status, 0) << method;
    json j = r.report();
    EXPECT_EQ(j["command"], "count");
    EXPECT_NEAR(j["log_z"].get<double>(), expected, 1e-12);
    EXPECT_NEAR(j["z"].get<double>(), std::exp(expected), 1e-6);
    EXPECT_EQ(j["fingerprint"].get<std::string>().size(), 16u);
    EXPECT_TRUE(j.contains("elapsed_seconds"));
    EXPECT_TRUE(j["stats"].contains("leaves"));
  }
}

TEST_F(Cli, CacheAndWidthFlags) {
  CliResult r = run("count --method fdc --cache off --ve-width 0 --model " + four_clause_);
  ASSERT_EQ(r.status, 0);
  EXPECT_GT(r.report()["stats"]["nodes"].get<int>(), 0);
}

TEST_F(Cli, ProbEmptyQuery) {
  std::string q = write("empty.cnf", "");
  CliResult r = run("prob --model " + four_clause_ + " --query " + q);
  ASSERT_EQ(r.status, 0);
  EXPECT_NEAR(r.report()["prob"].get<double>(), 1.0, 1e-12);
}

TEST_F(Cli, ProbComplementSumsToOne) {
  std::string pos = write("pos.cnf", "4 0\n");
  std::string neg = write("neg.cnf", "-4 0\n");
  double p = run("prob --model " + four_clause_ + " --query " + pos).report()["prob"];
  double q = run("prob --model " + four_clause_ + " --query " + neg).report()["prob"];
  EXPECT_NEAR(p + q, 1.0, 1e-9);
}

TEST_F(Cli, ExactMarginals) {
  json j = run("marginals --input " + four_clause_).report();
  auto expected = oracle::marginals(oracle::four_clause());
  auto got = j["marginals"].get<std::vector<double>>();
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-10);
  EXPECT_EQ(j["log_marginals"].size(), got.size());
}

TEST_F(Cli, SampleDeterministic) {
  std::string args = "sample --method fis --samples 2000 --seed 7 --input " + four_clause_;
  json a = run(args).report();
  json b = run(args).report();
  a.erase("elapsed_seconds");
  b.erase("elapsed_seconds");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_TRUE(a["estimate"].contains("std_error"));
  double z = std::exp(oracle::log_z(oracle::four_clause()));
  EXPECT_LE(std::abs(a["estimate"]["z_hat"].get<double>() - z), 4 * a["estimate"]["std_error"].get<double>());
  json v = run("sample --method vis --samples 500 --seed 7 --input " + four_clause_).report();
  EXPECT_EQ(v["method"], "vis");
}

TEST_F(Cli, SeedFromEnvironment) {
  std::string args = "sample --samples 200 --input " + four_clause_;
  json a = run(args, "PMRF_SEED=11").report();
  json b = run(args + " --seed 11").report();
  EXPECT_EQ(a["seed"], 11);
  EXPECT_EQ(a["estimate"].dump(), b["estimate"].dump());
  json c = run(args, "PMRF_JOBS=2").report();
  EXPECT_EQ(c["estimate"]["samples"], 200);
}

TEST_F(Cli, GenThenCount) {
  std::string out = (dir_ / "r.pmrf").string();
  CliResult g = run("gen --family random --n 10 --m 8 --s 3 --seed 5 --output " + out);
  ASSERT_EQ(g.status, 0);
  json j = run("count --input " + out).report();
  std::ifstream in(out);
  EXPECT_NEAR(j["log_z"].get<double>(), pmrf::brute_force_z(pmrf::parse_model(in)), 1e-9);
  json inline_model = run("gen --family qmr --d 4 --f 3 --s 2 --seed 1").report();
  EXPECT_EQ(inline_model["soft_clauses"], 7);
  EXPECT_EQ(pmrf::parse_model(inline_model["model"].get<std::string>()).num_vars(), 4);
  json fs_model = run("gen --family fs --people 2").report();
  EXPECT_EQ(fs_model["num_vars"], 8);
}

TEST_F(Cli, Eval) {
  std::string exact = write("exact.txt", "0.5\n");
  std::string approx = write("approx.json", R"({"marginals": [0.25]})");
  CliResult r = run("eval --exact " + exact + " --approx " + approx);
  ASSERT_EQ(r.status, 0);
  EXPECT_NEAR(r.report()["sum_kld"].get<double>(), 0.1438, 1e-4);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("bogus").status, 2);
  EXPECT_EQ(run("count --method nope --input " + four_clause_).status, 2);
  EXPECT_EQ(run("count --input /nonexistent/model.pmrf").status, 3);
  EXPECT_EQ(run("count --input " + write("bad.pmrf", "p pmrf 1\nh 2 0\n")).status, 4);
  EXPECT_EQ(run("count --input " + write("taut.pmrf", "p pmrf 1\nh 1 -1 0\n")).status, 4);
  EXPECT_EQ(run("count --method brute --input " + write("big.pmrf", "p pmrf 30\ns 1 1 30 0\n")).status, 5);
  EXPECT_EQ(run("prob --input " + write("unsat.pmrf", "p pmrf 1\nh 1 0\nh -1 0\n")).status, 6);
}
