#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "harsanyi/axioms.hpp"
#include "harsanyi/experiments.hpp"
#include "harsanyi/table_io.hpp"

using namespace harsanyi;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HARSANYI_CLI;
const std::string kEvaluator = HARSANYI_REFERENCE_EVALUATOR;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = "'" + kCli + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("harsanyi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValueTableToInteractionTableRoundTrip) {
  std::mt19937_64 rng(4);
  const ValueTable v(8, random_values(8, rng));
  save_value_table(path("v.txt"), v);
  const auto r = run("interactions --table-in " + path("v.txt") + " --out " + path("i.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max |I|"), std::string::npos);
  const auto back = zeta_transform(load_interaction_table(path("i.txt")));
  for (Mask t = 0; t < v.size(); ++t) EXPECT_LE(std::abs(back[t] - v[t]), 1e-9);
}

TEST_F(Cli, BridgeMatchesInProcess) {
  const auto model = init_model({{6, 10, 3}, 8, 1.0});
  save_model(path("m.json"), model);
  const std::vector<double> x{0.5, -0.25, 1.0, 2.0, -1.5, 0.125}, b(6, 0.0);
  const auto r = run("interactions --bridge-cmd \"'" + kEvaluator + "' --mode mlp --class 1 --model " +
                     path("m.json") + "\" --sample 0.5,-0.25,1,2,-1.5,0.125 --out " + path("i.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto local = mobius_transform(build_value_table(
      [&](const VariableSet& s) { return logit_value(model.forward(apply_mask(x, b, s)), 1); }, 6));
  EXPECT_EQ(load_interaction_table(path("i.txt")), local);
}

TEST_F(Cli, EvaluatorErrorsExitThree) {
  EXPECT_EQ(run("interactions --bridge-cmd \"'" + kEvaluator + "' --mode nan\" --sample 1,2").code, 3);
  EXPECT_EQ(run("interactions --bridge-cmd \"'" + kEvaluator +
                "' --fault duplicate --fault-at 1\" --sample 1,2").code, 3);
}

TEST_F(Cli, InputErrorsExitTwo) {
  std::string many = "0";
  for (int i = 1; i < 21; ++i) many += ",0";
  EXPECT_EQ(run("interactions --bridge-cmd true --sample " + many).code, 2);
  EXPECT_EQ(run("interactions --bridge-cmd true --sample 1,2 --n 21").code, 2);
  EXPECT_EQ(run("interactions --sample 1,2").code, 2);
  EXPECT_EQ(run("similarity --no-such-flag a b").code, 2);
  EXPECT_EQ(run("").code, 2);
  std::ofstream(path("bad.txt")) << "harsanyi-table v1 kind=value n=2 sample=0\n00 1\n";
  EXPECT_EQ(run("salient --table-in " + path("bad.txt")).code, 2);
}

TEST_F(Cli, SalientOnAndTableListsOneConcept) {
  std::vector<double> v(16, 0.0);
  for (Mask t = 0; t < 16; ++t) v[t] = (t & 0b0110u) == 0b0110u ? 2.0 : 0.0;
  save_value_table(path("and.txt"), ValueTable(4, v));
  const auto r = run("salient --ratio 0.05 --table-in " + path("and.txt") + " --out " + path("s.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("salient 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0110 2.0"), std::string::npos) << r.out;
}

TEST_F(Cli, SimilarityOfIdenticalFilesIsOne) {
  std::mt19937_64 rng(6);
  save_value_table(path("v.txt"), ValueTable(6, random_values(6, rng)));
  auto r = run("similarity " + path("v.txt") + " " + path("v.txt"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.0\n");
  r = run("similarity --order 2 " + path("v.txt") + " " + path("v.txt"));
  EXPECT_EQ(r.out, "1.0\n");
}

TEST_F(Cli, DynamicsWritesOrderColumnsAndManifest) {
  const auto r = run("--threads 2 dynamics --target-order 8 --n 10 --seeds 0,1 --epochs 3 --width 8 "
                     "--eval-points 16 --out-dir " + path("dyn"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream csv(path("dyn/dynamics_seed1.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "epoch,loss,order_0,order_1,order_2,order_3,order_4,order_5,order_6,order_7,"
                    "order_8,order_9,order_10");
  std::ifstream m(path("dyn/manifest.json"));
  const auto j = nlohmann::json::parse(m);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["seeds"].size(), 2u);
  EXPECT_EQ(j["outputs"].size(), 2u);
}

TEST_F(Cli, RepeatedRunsAreIdentical) {
  const std::string args = " dynamics --target-order 2 --n 6 --epochs 4 --width 6 --out-dir ";
  ASSERT_EQ(run("--threads 1" + args + path("a")).code, 0);
  ASSERT_EQ(run("--threads 3" + args + path("b")).code, 0);
  std::ifstream a(path("a/dynamics_seed0.csv")), b(path("b/dynamics_seed0.csv"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_FALSE(sa.str().empty());
}

TEST_F(Cli, DegenerateStrengthExitsFourWithManifest) {
  // Zero init: only the output bias trains, so v(x_N) = v(x_empty) everywhere.
  const auto r = run("noise-overfit --rho-list 0 --seeds 0 --epochs 2 --init-scale 0 --hidden 4 "
                     "--train-size 16 --eval-samples 2 --out-dir " + path("noise"));
  EXPECT_EQ(r.code, 4) << r.out;
  std::ifstream m(path("noise/manifest.json"));
  ASSERT_TRUE(m.good());
  const auto j = nlohmann::json::parse(m);
  EXPECT_EQ(j["status"].get<std::string>().rfind("degenerate", 0), 0u) << j["status"];
}

TEST_F(Cli, SelfcheckQuickPasses) {
  const auto r = run("selfcheck --quick");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("SKIP"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, HelpListsFlags) {
  const auto r = run("variance-scan --help");
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--delta", "--tau-shift", "--trials", "--baseline-rule", "--seeds", "--out-dir"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}
