#include <sstream>

#include <gtest/gtest.h>

#include "mdsipm/bench/bench.hpp"

using namespace mdsipm;

TEST(BenchSweep, SingleSize) {
  const auto recs = bench_sweep({10}, {});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].k, 10u);
  EXPECT_EQ(recs[0].kkt_dim, 23u);
  EXPECT_EQ(recs[0].status, "Optimal");
  EXPECT_GE(recs[0].iterations, 1u);
  EXPECT_GT(recs[0].avg_iter_time, 0.0);
  EXPECT_GE(recs[0].k4_fraction, 0.0);
  EXPECT_LE(recs[0].k4_fraction, 1.0);
  EXPECT_THROW(bench_sweep({}, {}), ConfigError);
}

TEST(BenchSweep, TimeGrowsWithSize) {
  SolverOptions opts;
  opts.enable_timing = false;  // forced back on by the sweep
  const auto recs = bench_sweep({50, 100}, opts);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].kkt_dim, 203u);
  EXPECT_GT(recs[1].avg_iter_time, recs[0].avg_iter_time);
  for (const auto& r : recs) {
    EXPECT_EQ(r.status, "Optimal");
    EXPECT_LE(r.avg_t_K1 + r.avg_t_K2 + r.avg_t_K3 + r.avg_t_K4, r.avg_iter_time * (1 + 1e-9));
  }
}

TEST(BenchSweep, FailedSolveRecorded) {
  SolverOptions opts;
  opts.max_iter = 1;
  const auto recs = bench_sweep({5}, opts);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].status, "MaxIter");
  EXPECT_EQ(recs[0].iterations, 1u);
}

TEST(BenchCsv, RoundTrip) {
  std::vector<BenchRecord> recs(2);
  recs[0] = {10, 23, "Optimal", 5, 1.0 / 3.0, 1e-7, 2e-6, 3.25e-5, 0.1, 0.3};
  recs[1] = {200, 403, "MaxIter", 500, 0.123456789012345678, 0, 0, 0, 0.1, 0.81};
  std::stringstream ss;
  write_bench_csv(ss, recs);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kBenchCsvHeader);
  EXPECT_EQ(read_bench_csv(ss), recs);

  const auto live = bench_sweep({10}, {});
  std::stringstream s2;
  write_bench_csv(s2, live);
  EXPECT_EQ(read_bench_csv(s2), live);
}

TEST(BenchCsv, RejectsMalformed) {
  std::stringstream bad_header("k,kkt_dim\n");
  EXPECT_THROW(read_bench_csv(bad_header), ConfigError);
  std::stringstream short_row(std::string(kBenchCsvHeader) + "\n1,2,Optimal\n");
  EXPECT_THROW(read_bench_csv(short_row), ConfigError);
  std::stringstream bad_num(std::string(kBenchCsvHeader) + "\nx,5,Optimal,1,1,1,1,1,1,1\n");
  EXPECT_THROW(read_bench_csv(bad_num), ConfigError);
}

TEST(BenchJson, Fields) {
  const BenchRecord r{10, 23, "Optimal", 5, 0.5, 0.1, 0.1, 0.1, 0.2, 0.4};
  const auto j = to_json(r);
  EXPECT_EQ(j["k"], 10);
  EXPECT_EQ(j["kkt_dim"], 23);
  EXPECT_EQ(j["status"], "Optimal");
  EXPECT_DOUBLE_EQ(j["k4_fraction"].get<double>(), 0.4);
  std::stringstream ss;
  write_bench_json(ss, {r, r});
  EXPECT_EQ(nlohmann::json::parse(ss.str()).size(), 2u);
}

TEST(IterationCsv, HeaderAndRows) {
  const auto res = solve(*synthetic_problem(4), {});
  std::stringstream ss;
  write_iteration_csv(ss, res.log);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "iter,mu,theta,phi,alpha_primal,alpha_dual,delta_w,delta_c,inertia_pos,"
                  "inertia_zero,inertia_neg,t_K1,t_K2,t_K3,t_K4,t_total");
  std::size_t rows = 0;
  while (std::getline(ss, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
    ++rows;
  }
  EXPECT_EQ(rows, res.log.size());
  const auto j = to_json(res.log.front());
  EXPECT_EQ(j["inertia"][0], 4);
  EXPECT_EQ(j["inertia"][2], 7);
}

TEST(CompareFactorizations, CompressedIsSmallerAndFaster) {
  const auto c = compare_factorizations(150, {});
  EXPECT_EQ(c.compressed_dim, 303u);
  EXPECT_EQ(c.full_dim, 453u);
  EXPECT_GE(c.systems, 1u);
  EXPECT_LE(c.systems, 4u);
  EXPECT_GT(c.t_compressed, 0.0);
  EXPECT_GT(c.speedup(), 1.0);
}
