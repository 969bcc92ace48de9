// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "mdsipm/mdsipm.hpp"

using namespace mdsipm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

struct EigenCount {
  Inertia inertia;
  double min_abs = 0.0;
};

EigenCount eigen_count(const DenseMatrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
  EigenCount c;
  c.min_abs = std::numeric_limits<double>::infinity();
  for (double l : es.eigenvalues()) {
    c.min_abs = std::min(c.min_abs, std::abs(l));
    if (l > 0) ++c.inertia.pos;
    else if (l < 0) ++c.inertia.neg;
    else ++c.inertia.zero;
  }
  return c;
}

Outcome compression_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i)
    worst = std::max(worst, check::compression_gap(oracle::random_kkt4(rng, {}), default_kernels()));
  const double t = seconds_since(t0);
  return {worst <= 1e-8 && t <= 10.0,
          fmt("200 instances, worst relative gap %.2e (tol 1e-8), %.2f s", worst, t)};
}

Outcome haynsworth() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  int checked = 0, mismatches = 0, skipped = 0;
  while (checked < 100) {
    const auto k = oracle::random_kkt4(rng, {});
    const DenseMatrix full = kkt4_triplets(k).to_dense();
    const auto ref = eigen_count(full);
    if (ref.min_abs < 1e-8 * full.norm_inf()) {
      ++skipped;
      continue;
    }
    ++checked;
    const Inertia got =
        Inertia{k.dims().n_s, 0, 0} + bk_factorize(compress(k, default_kernels()).M).inertia();
    if (!(got == ref.inertia)) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t <= 10.0,
          fmt("100 instances, %d mismatches, %d redrawn, %.2f s", mismatches, skipped, t)};
}

Outcome bunch_kaufman() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<std::size_t> size(1, 200);
  int residual_fail = 0, inertia_fail = 0, done = 0, skipped = 0;
  double worst = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (done < 500) {
    const std::size_t n = size(rng);
    const DenseMatrix a = oracle::random_symmetric(rng, n);
    const auto ref = eigen_count(a);
    if (ref.min_abs < 1e-8 * a.norm_inf()) {
      ++skipped;
      continue;
    }
    ++done;
    const auto f = bk_factorize(a);
    const double res = oracle::residual_norm_inf(oracle::reconstruct(f), a);
    const double ratio = res / (static_cast<double>(n) * eps * a.norm_inf());
    worst = std::max(worst, ratio);
    if (ratio > 100.0) ++residual_fail;
    if (!(f.inertia() == ref.inertia)) ++inertia_fail;
  }
  const double t = seconds_since(t0);
  return {residual_fail == 0 && inertia_fail == 0 && t <= 60.0,
          fmt("500 matrices n<=200, worst residual %.2f n*eps*|A|, %d residual / %d inertia "
              "failures, %d redrawn, %.2f s",
              worst, residual_fail, inertia_fail, skipped, t)};
}

struct ConvergenceRuns {
  std::vector<std::pair<std::size_t, SolveResult>> runs;
};

Outcome convergence(ConvergenceRuns& out) {
  bool ok = true;
  std::string detail;
  for (std::size_t k : {2u, 10u, 100u, 1000u}) {
    const auto p = synthetic_problem(k);
    const auto t0 = Clock::now();
    auto res = solve(*p, {});
    const double t = seconds_since(t0);
    bool dim_ok = p->dims().compressed_dim() == 2 * k + 3;
    for (const auto& r : res.log) dim_ok = dim_ok && r.kkt_dim == 2 * k + 3;
    const bool good = res.status == SolveStatus::Optimal && res.e_mu_final <= 1e-6 &&
                      res.iterations <= 100 && dim_ok && (k < 1000 || t <= 120.0);
    ok = ok && good;
    detail += fmt("k=%zu %s %zu it e0=%.1e dim=%zu %.2fs; ", k,
                  std::string(to_string(res.status)).c_str(), res.iterations, res.e_mu_final,
                  p->dims().compressed_dim(), t);
    out.runs.emplace_back(k, std::move(res));
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome inertia_discipline(const ConvergenceRuns& runs) {
  std::size_t checked = 0, violations = 0;
  for (const auto& [k, res] : runs.runs) {
    const auto target = required_compressed_inertia(synthetic_problem(k)->dims());
    for (const auto& r : res.log) {
      ++checked;
      if (!(r.inertia == target)) ++violations;
    }
  }
  return {violations == 0 && checked > 0,
          fmt("%zu accepted iterations, %zu inertia violations", checked, violations)};
}

Outcome compression_speed() {
  const auto c = compare_factorizations(500, {});
  return {c.speedup() >= 1.5,
          fmt("k=500: compressed %zu x %zu %.4f s, full %zu x %zu %.4f s, speedup %.2fx (need 1.5x)",
              c.compressed_dim, c.compressed_dim, c.t_compressed, c.full_dim, c.full_dim, c.t_full,
              c.speedup())};
}

Outcome k4_fraction() {
  const auto recs = bench_sweep({200, 500}, {});
  std::stringstream csv;
  write_bench_csv(csv, recs);
  const auto back = read_bench_csv(csv);
  bool ok = back == recs;
  std::string detail;
  for (const auto& r : back) {
    ok = ok && r.status == "Optimal" && r.k4_fraction > 0.5;
    detail += fmt("k=%zu K4 fraction %.3f; ", r.k, r.k4_fraction);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome property_suites() {
  const auto t0 = Clock::now();
  const auto rep = verify_suite(100);
  std::string detail;
  for (const auto& s : rep.suites) detail += fmt("%s %zu/%zu, ", s.name.c_str(), s.passed, s.passed + s.failed);
  detail += fmt("%.1f s", seconds_since(t0));
  return {rep.ok() && !rep.suites.empty(), detail};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  const auto guarded = [](auto&& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "compression equivalence", guarded(compression_equivalence));
  report(2, "Haynsworth inertia additivity", guarded(haynsworth));
  report(3, "Bunch-Kaufman correctness", guarded(bunch_kaufman));
  ConvergenceRuns runs;
  report(4, "end-to-end convergence", guarded([&] { return convergence(runs); }));
  report(5, "inertia discipline", guarded([&] { return inertia_discipline(runs); }));
  report(6, "compression speed benefit", guarded(compression_speed));
  report(7, "K4 fraction of iteration time", guarded(k4_fraction));
  report(8, "property suites", guarded(property_suites));
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
