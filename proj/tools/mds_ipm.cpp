// mds_ipm: solve, bench and verify driver for the MDS interior-point solver.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdsipm/mdsipm.hpp"

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level_from_env() {
  const char* v = std::getenv("MDS_IPM_LOG");
  if (!v) return LogLevel::Quiet;
  const std::string s(v);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Quiet;
}

struct CommonFlags {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  double mu0 = 0.1;
  std::string backend = "host-seq";
  std::string out;
  std::string format = "csv";

  mdsipm::SolverOptions options() const {
    mdsipm::SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.mu0 = mu0;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--tol", f.tol, "Optimality tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap");
  cmd->add_option("--mu0", f.mu0, "Initial barrier parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--backend", f.backend, "Linear algebra backend")
      ->check(CLI::IsMember({"default", "host-seq", "host-par"}));
  cmd->add_option("--out", f.out, "Machine-readable output file");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw mdsipm::ConfigError("cannot open " + path + " for writing");
  return os;
}

void print_iteration(const mdsipm::IterationLog& r, LogLevel level) {
  std::fprintf(stderr,
               "iter %4zu  mu %9.2e  theta %9.2e  phi %14.7e  alpha %8.2e/%8.2e  dw %8.1e  "
               "inertia (%zu,%zu,%zu)  %s\n",
               r.iter, r.mu, r.theta, r.phi, r.alpha_primal, r.alpha_dual, r.delta_w,
               r.inertia.pos, r.inertia.zero, r.inertia.neg,
               std::string(mdsipm::to_string(r.accept)).c_str());
  if (level != LogLevel::Debug) return;
  for (const auto& t : r.reg_trials)
    std::fprintf(stderr, "    trial dw %9.2e dc %9.2e inertia %s%s\n", t.delta_w, t.delta_c,
                 mdsipm::to_string(t.inertia).c_str(), t.factorized ? "" : " (skipped)");
  std::fprintf(stderr, "    K1 %.3es K2 %.3es K3 %.3es K4 %.3es total %.3es  ls trials %zu\n",
               r.times[mdsipm::KernelClass::K1], r.times[mdsipm::KernelClass::K2],
               r.times[mdsipm::KernelClass::K3], r.times[mdsipm::KernelClass::K4], r.times.total,
               r.ls_trials);
}

int run_solve(const std::string& spec, const CommonFlags& f, const std::string& dump_dir,
              LogLevel level) {
  const auto problem = mdsipm::parse_problem(spec);
  auto opts = f.options();
  opts.dump_kkt_dir = dump_dir;
  const auto la = mdsipm::make_linear_algebra(mdsipm::parse_backend(f.backend));
  mdsipm::IterateObserver obs;
  if (level != LogLevel::Quiet)
    obs = [level](const mdsipm::IteratePoint&, const mdsipm::IterationLog* r) {
      if (r) print_iteration(*r, level);
    };
  const auto res = mdsipm::solve(*problem, opts, *la, obs);

  const auto& d = problem->dims();
  std::cout << "problem     " << problem->name() << "  (n_d=" << d.n_d << " n_s=" << d.n_s
            << " m_E=" << d.m_E << " m_I=" << d.m_I << ")\n"
            << "kkt dim     " << d.compressed_dim() << " compressed, " << d.full_dim()
            << " full\n"
            << "status      " << mdsipm::to_string(res.status) << "\n"
            << "iterations  " << res.iterations << "\n"
            << "objective   " << mdsipm::detail::fmt_real(res.objective) << "\n"
            << "e_0         " << res.e_mu_final << "\n"
            << "time        " << res.total_time << " s\n";
  if (!res.message.empty()) std::cout << "message     " << res.message << "\n";

  if (!f.out.empty()) {
    auto os = open_out(f.out);
    if (f.format == "json") {
      nlohmann::json j;
      j["problem"] = problem->name();
      j["status"] = std::string(mdsipm::to_string(res.status));
      j["iterations"] = res.iterations;
      j["objective"] = res.objective;
      j["e_0"] = res.e_mu_final;
      j["log"] = nlohmann::json::array();
      for (const auto& r : res.log) j["log"].push_back(mdsipm::to_json(r));
      os << j.dump(2) << "\n";
    } else {
      mdsipm::write_iteration_csv(os, res.log);
    }
  }
  return res.status == mdsipm::SolveStatus::Optimal ? 0 : 1;
}

int run_bench(const std::vector<std::size_t>& sizes, const CommonFlags& f, bool compare,
              LogLevel level) {
  const auto la = mdsipm::make_linear_algebra(mdsipm::parse_backend(f.backend));
  std::vector<mdsipm::BenchRecord> records;
  for (std::size_t k : sizes) {
    const auto rec = mdsipm::bench_sweep({k}, f.options(), *la).front();
    if (level != LogLevel::Quiet)
      std::fprintf(stderr, "k=%zu done: %s in %zu iterations\n", k, rec.status.c_str(),
                   rec.iterations);
    records.push_back(rec);
  }
  std::printf("%8s %8s %10s %6s %12s %10s %10s %10s %10s %8s\n", "k", "kkt_dim", "status", "iters",
              "s/iter", "K1", "K2", "K3", "K4", "K4 frac");
  for (const auto& r : records)
    std::printf("%8zu %8zu %10s %6zu %12.4e %10.3e %10.3e %10.3e %10.3e %8.3f\n", r.k, r.kkt_dim,
                r.status.c_str(), r.iterations, r.avg_iter_time, r.avg_t_K1, r.avg_t_K2,
                r.avg_t_K3, r.avg_t_K4, r.k4_fraction);
  if (!f.out.empty()) {
    auto os = open_out(f.out);
    if (f.format == "json")
      mdsipm::write_bench_json(os, records);
    else
      mdsipm::write_bench_csv(os, records);
  }
  if (compare) {
    const std::size_t k = *std::max_element(sizes.begin(), sizes.end());
    const auto c = mdsipm::compare_factorizations(k, f.options(), *la);
    std::printf("factorization at k=%zu: compressed %zu x %zu %.4e s, full %zu x %zu %.4e s, "
                "speedup %.2fx\n",
                k, c.compressed_dim, c.compressed_dim, c.t_compressed, c.full_dim, c.full_dim,
                c.t_full, c.speedup());
  }
  for (const auto& r : records)
    if (r.status != "Optimal") return 1;
  return 0;
}

int run_verify(std::size_t seeds, std::uint64_t seed, const CommonFlags& f) {
  const auto la = mdsipm::make_linear_algebra(mdsipm::parse_backend(f.backend));
  const auto rep = mdsipm::verify_suite(seeds, {}, *la, seed);
  mdsipm::print_report(std::cout, rep);
  if (!f.out.empty()) {
    auto os = open_out(f.out);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : rep.suites)
      j.push_back({{"suite", s.name}, {"passed", s.passed}, {"failed", s.failed},
                   {"failures", s.failures}});
    os << j.dump(2) << "\n";
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed dense-sparse interior-point solver"};
  app.require_subcommand(1);
  const LogLevel level = log_level_from_env();

  CommonFlags solve_flags, bench_flags, verify_flags;
  std::string problem = "synthetic:10";
  std::string dump_dir;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one built-in problem");
  solve_cmd->add_option("--problem", problem, "synthetic:<k> or random:<seed>:<n_d>:<n_s>:<m_E>:<m_I>");
  solve_cmd->add_option("--dump-kkt", dump_dir, "Directory for per-iteration KKT matrix dumps");
  add_common(solve_cmd, solve_flags);

  std::vector<std::size_t> sizes{10, 50, 100, 200, 500};
  bool compare = false;
  auto* bench_cmd = app.add_subcommand("bench", "Timed sweep over synthetic problem sizes");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated k values")->delimiter(',');
  bench_cmd->add_flag("--compare-full", compare,
                      "Also time the uncompressed KKT factorization at the largest size");
  add_common(bench_cmd, bench_flags);

  std::size_t seeds = 100;
  std::uint64_t seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle property suites");
  verify_cmd->add_option("--seeds", seeds, "Number of random draws per suite");
  verify_cmd->add_option("--seed", seed, "First seed");
  add_common(verify_cmd, verify_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve_cmd) return run_solve(problem, solve_flags, dump_dir, level);
    if (*bench_cmd) {
      for (std::size_t k : sizes)
        if (k < 1) throw mdsipm::ConfigError("bench sizes must be >= 1");
      if (sizes.empty()) throw mdsipm::ConfigError("bench needs at least one size");
      return run_bench(sizes, bench_flags, compare, level);
    }
    return run_verify(seeds, seed, verify_flags);
  } catch (const mdsipm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
