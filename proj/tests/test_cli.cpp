#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "mdsipm/bench/bench.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const auto tmp = std::filesystem::temp_directory_path() / "mdsipm_cli_out.txt";
  const std::string cmd = std::string(MDS_IPM_BIN) + " " + args + " > " + tmp.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(tmp);
  std::stringstream ss;
  ss << is.rdbuf();
  r.out = ss.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST(Cli, SolveSynthetic) {
  const auto r = run("solve --problem synthetic:10 --tol 1e-6");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("Optimal"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("23 compressed"), std::string::npos) << r.out;
}

TEST(Cli, SolveWritesIterationCsvAndJson) {
  const auto csv = scratch("mdsipm_iter.csv");
  auto r = run("solve --problem random:3:4:5:1:2 --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, mdsipm::kIterationCsvHeader);

  const auto json = scratch("mdsipm_iter.json");
  r = run("solve --problem synthetic:3 --format json --out " + json.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream js(json);
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["status"], "Optimal");
  EXPECT_EQ(j["log"].size(), j["iterations"].get<std::size_t>());
  std::filesystem::remove(csv);
  std::filesystem::remove(json);
}

TEST(Cli, BadInputsExitTwo) {
  EXPECT_EQ(run("solve --problem synthetic:0").code, 2);
  EXPECT_EQ(run("solve --problem bogus").code, 2);
  EXPECT_EQ(run("solve --tol -1").code, 2);
  EXPECT_EQ(run("solve --backend gpu").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bench --sizes 0").code, 2);
}

TEST(Cli, SolverFailureExitsOne) {
  const auto r = run("solve --problem synthetic:10 --max-iter 1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("MaxIter"), std::string::npos) << r.out;
}

TEST(Cli, BenchCsv) {
  const auto csv = scratch("mdsipm_bench.csv");
  const auto r = run("bench --sizes 10,50,100 --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream is(csv);
  const auto recs = mdsipm::read_bench_csv(is);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].k, 10u);
  EXPECT_EQ(recs[2].kkt_dim, 203u);
  for (const auto& rec : recs) EXPECT_EQ(rec.status, "Optimal");
  std::filesystem::remove(csv);
}

TEST(Cli, BenchJsonAndCompare) {
  const auto json = scratch("mdsipm_bench.json");
  const auto r = run("bench --sizes 20,40 --compare-full --format json --out " + json.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("speedup"), std::string::npos) << r.out;
  std::ifstream is(json);
  EXPECT_EQ(nlohmann::json::parse(is).size(), 2u);
  std::filesystem::remove(json);
}

TEST(Cli, Verify) {
  auto r = run("verify --seeds 0");
  EXPECT_EQ(r.code, 0) << r.out;
  r = run("verify --seeds 5 --seed 11");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS compression-equivalence: 5 passed, 0 failed"), std::string::npos)
      << r.out;
}

TEST(Cli, DumpKkt) {
  const auto dir = scratch("mdsipm_cli_dump");
  std::filesystem::remove_all(dir);
  const auto r = run("solve --problem synthetic:2 --dump-kkt " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "kkt3_iter0000.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "kkt4_iter0000.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, LogLevelEnv) {
  const auto r = run("solve --problem synthetic:2");
  const std::string cmd = "MDS_IPM_LOG=debug " + std::string(MDS_IPM_BIN) +
                          " solve --problem synthetic:2 2>&1 >/dev/null | grep -c 'trial dw'";
  EXPECT_EQ(r.out.find("iter "), std::string::npos);
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}
