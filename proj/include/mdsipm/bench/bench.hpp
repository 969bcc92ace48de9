#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdsipm/ipm/solver.hpp"
#include "mdsipm/nlp/builtin.hpp"

namespace mdsipm {

/// Per-size summary of a timed solve, averaged over iterations.
struct BenchRecord {
  std::size_t k = 0;
  std::size_t kkt_dim = 0;  // dimension of the factorized compressed matrix
  std::string status;
  std::size_t iterations = 0;
  double avg_iter_time = 0.0;
  double avg_t_K1 = 0.0;
  double avg_t_K2 = 0.0;
  double avg_t_K3 = 0.0;
  double avg_t_K4 = 0.0;
  double k4_fraction = 0.0;

  bool operator==(const BenchRecord&) const = default;
};

inline BenchRecord summarize(std::size_t k, const ProblemDims& dims, const SolveResult& r) {
  BenchRecord b;
  b.k = k;
  b.kkt_dim = dims.compressed_dim();
  b.status = std::string(to_string(r.status));
  b.iterations = r.log.size();
  if (r.log.empty()) return b;
  for (const auto& rec : r.log) {
    b.avg_iter_time += rec.times.total;
    b.avg_t_K1 += rec.times[KernelClass::K1];
    b.avg_t_K2 += rec.times[KernelClass::K2];
    b.avg_t_K3 += rec.times[KernelClass::K3];
    b.avg_t_K4 += rec.times[KernelClass::K4];
  }
  const double n = static_cast<double>(r.log.size());
  for (double* v : {&b.avg_iter_time, &b.avg_t_K1, &b.avg_t_K2, &b.avg_t_K3, &b.avg_t_K4}) *v /= n;
  b.k4_fraction = b.avg_iter_time > 0.0 ? std::clamp(b.avg_t_K4 / b.avg_iter_time, 0.0, 1.0) : 0.0;
  return b;
}

/**
 * Solves synthetic_problem(k) for each size with kernel timing enabled.
 * A size whose solve throws is recorded with status "error" and the sweep
 * continues.
 */
inline std::vector<BenchRecord> bench_sweep(const std::vector<std::size_t>& sizes,
                                            SolverOptions opts,
                                            const KernelSuite& la = default_kernels()) {
  if (sizes.empty()) throw ConfigError("bench_sweep needs at least one size");
  opts.enable_timing = true;
  std::vector<BenchRecord> out;
  for (std::size_t k : sizes) {
    const auto p = synthetic_problem(k);
    try {
      out.push_back(summarize(k, p->dims(), solve(*p, opts, la)));
    } catch (const std::exception&) {
      BenchRecord b;
      b.k = k;
      b.kkt_dim = p->dims().compressed_dim();
      b.status = "error";
      out.push_back(b);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV and JSON

inline constexpr const char* kBenchCsvHeader =
    "k,kkt_dim,status,iterations,avg_iter_time,avg_t_K1,avg_t_K2,avg_t_K3,avg_t_K4,k4_fraction";

inline constexpr const char* kIterationCsvHeader =
    "iter,mu,theta,phi,alpha_primal,alpha_dual,delta_w,delta_c,inertia_pos,inertia_zero,"
    "inertia_neg,t_K1,t_K2,t_K3,t_K4,t_total";

namespace detail {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  using detail::fmt_real;
  os << kBenchCsvHeader << "\n";
  for (const auto& r : records)
    os << r.k << "," << r.kkt_dim << "," << r.status << "," << r.iterations << ","
       << fmt_real(r.avg_iter_time) << "," << fmt_real(r.avg_t_K1) << "," << fmt_real(r.avg_t_K2)
       << "," << fmt_real(r.avg_t_K3) << "," << fmt_real(r.avg_t_K4) << ","
       << fmt_real(r.k4_fraction) << "\n";
}

inline std::vector<BenchRecord> read_bench_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kBenchCsvHeader)
    throw ConfigError("bench CSV: unexpected header");
  std::vector<BenchRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    for (auto v : detail::split(line, ',')) f.emplace_back(v);
    if (f.size() != 10) throw ConfigError("bench CSV: expected 10 fields in '" + line + "'");
    try {
      BenchRecord r;
      r.k = std::stoull(f[0]);
      r.kkt_dim = std::stoull(f[1]);
      r.status = f[2];
      r.iterations = std::stoull(f[3]);
      r.avg_iter_time = std::stod(f[4]);
      r.avg_t_K1 = std::stod(f[5]);
      r.avg_t_K2 = std::stod(f[6]);
      r.avg_t_K3 = std::stod(f[7]);
      r.avg_t_K4 = std::stod(f[8]);
      r.k4_fraction = std::stod(f[9]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError("bench CSV: malformed number in '" + line + "'");
    }
  }
  return out;
}

inline nlohmann::json to_json(const BenchRecord& r) {
  return {{"k", r.k},
          {"kkt_dim", r.kkt_dim},
          {"status", r.status},
          {"iterations", r.iterations},
          {"avg_iter_time", r.avg_iter_time},
          {"avg_t_K1", r.avg_t_K1},
          {"avg_t_K2", r.avg_t_K2},
          {"avg_t_K3", r.avg_t_K3},
          {"avg_t_K4", r.avg_t_K4},
          {"k4_fraction", r.k4_fraction}};
}

inline void write_bench_json(std::ostream& os, const std::vector<BenchRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  os << arr.dump(2) << "\n";
}

inline void write_iteration_csv(std::ostream& os, const std::vector<IterationLog>& log) {
  using detail::fmt_real;
  os << kIterationCsvHeader << "\n";
  for (const auto& r : log)
    os << r.iter << "," << fmt_real(r.mu) << "," << fmt_real(r.theta) << "," << fmt_real(r.phi)
       << "," << fmt_real(r.alpha_primal) << "," << fmt_real(r.alpha_dual) << ","
       << fmt_real(r.delta_w) << "," << fmt_real(r.delta_c) << "," << r.inertia.pos << ","
       << r.inertia.zero << "," << r.inertia.neg << "," << fmt_real(r.times[KernelClass::K1])
       << "," << fmt_real(r.times[KernelClass::K2]) << "," << fmt_real(r.times[KernelClass::K3])
       << "," << fmt_real(r.times[KernelClass::K4]) << "," << fmt_real(r.times.total) << "\n";
}

inline nlohmann::json to_json(const IterationLog& r) {
  return {{"iter", r.iter},
          {"mu", r.mu},
          {"theta", r.theta},
          {"phi", r.phi},
          {"alpha_primal", r.alpha_primal},
          {"alpha_dual", r.alpha_dual},
          {"delta_w", r.delta_w},
          {"delta_c", r.delta_c},
          {"inertia", {r.inertia.pos, r.inertia.zero, r.inertia.neg}},
          {"t_K1", r.times[KernelClass::K1]},
          {"t_K2", r.times[KernelClass::K2]},
          {"t_K3", r.times[KernelClass::K3]},
          {"t_K4", r.times[KernelClass::K4]},
          {"t_total", r.times.total},
          {"accept", std::string(to_string(r.accept))}};
}

// ---------------------------------------------------------------------------
// Compressed versus full factorization

struct FactorizationComparison {
  std::size_t k = 0;
  std::size_t compressed_dim = 0;
  std::size_t full_dim = 0;
  std::size_t systems = 0;        // KKT systems factorized on each side
  double t_compressed = 0.0;      // mean seconds per factorization and solve
  double t_full = 0.0;

  double speedup() const { return t_compressed > 0.0 ? t_full / t_compressed : 0.0; }
};

/**
 * Rebuilds the unregularized KKT system at every iterate of a solve of
 * synthetic_problem(k) and times factorization plus solve of the compressed
 * matrix and of the densified full matrix with the same LDL^T routine.
 */
inline FactorizationComparison compare_factorizations(std::size_t k, const SolverOptions& opts,
                                                      const KernelSuite& la = default_kernels(),
                                                      std::size_t max_systems = 4) {
  using Clock = std::chrono::steady_clock;
  const auto p = synthetic_problem(k);
  std::vector<IteratePoint> points;
  const auto res = solve(*p, opts, la, [&](const IteratePoint& pt, const IterationLog*) {
    if (points.size() < max_systems) points.push_back(pt);
  });
  if (res.status != SolveStatus::Optimal && points.empty())
    throw NumericError("compare_factorizations: solve produced no iterates");

  FactorizationComparison c;
  c.k = k;
  c.compressed_dim = p->dims().compressed_dim();
  c.full_dim = p->dims().full_dim();
  const double mu = opts.mu0;
  for (const auto& pt : points) {
    const EvalBundle b = eval_all(*p, pt.xd, pt.xs, pt.yg, pt.yh);
    const BarrierDiagonals diag = build_diagonals(*p, pt);
    const KktRhs rhs = build_rhs(*p, b, pt, diag, mu, la);
    const KktSystem4 k4 = assemble_kkt4(b, diag, rhs, 0.0, 0.0);
    const CompressedKkt k3 = compress(k4, la);
    const DenseMatrix full = kkt4_triplets(k4).to_dense();
    const Vector full_rhs = kkt4_rhs(k4);

    auto t0 = Clock::now();
    bk_factorize(k3.M).solve(k3.rhs);
    auto t1 = Clock::now();
    bk_factorize(full).solve(full_rhs);
    auto t2 = Clock::now();
    c.t_compressed += std::chrono::duration<double>(t1 - t0).count();
    c.t_full += std::chrono::duration<double>(t2 - t1).count();
    ++c.systems;
  }
  c.t_compressed /= static_cast<double>(c.systems);
  c.t_full /= static_cast<double>(c.systems);
  return c;
}

}  // namespace mdsipm
