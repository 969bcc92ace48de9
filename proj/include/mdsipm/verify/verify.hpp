#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mdsipm/ipm/solver.hpp"
#include "mdsipm/nlp/builtin.hpp"
#include "mdsipm/verify/oracles.hpp"

namespace mdsipm {

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;  // first few messages

  void record(std::optional<std::string> failure) {
    if (!failure) {
      ++passed;
      return;
    }
    ++failed;
    if (failures.size() < 5) failures.push_back(std::move(*failure));
  }
};

struct VerifyReport {
  std::vector<SuiteResult> suites;

  std::size_t total_failed() const {
    std::size_t n = 0;
    for (const auto& s : suites) n += s.failed;
    return n;
  }
  bool ok() const { return total_failed() == 0; }
};

struct VerifyCaps {
  oracle::KktCaps kkt;          // random KKT systems and random problems
  std::size_t ldl_n = 60;       // largest matrix for the factorization suite
  std::size_t fd_points = 20;   // random interior points per problem
};

namespace check {

/// Relative inf-norm gap between the compressed-path and full-system directions.
inline double compression_gap(const KktSystem4& k, const KernelSuite& la) {
  const Vector ref = oracle::dense_solve(kkt4_triplets(k).to_dense(), kkt4_rhs(k));
  const CompressedKkt c = compress(k, la);
  const Vector sol = bk_factorize(c.M).solve(c.rhs);
  const auto d = k.dims();
  const std::span<const double> s(sol);
  const Vector dxs = recover_sparse_step(k, s.subspan(c.off_yg(), d.m_E),
                                         s.subspan(c.off_yh(), d.m_I), la);
  Vector got = dxs;
  got.insert(got.end(), sol.begin(), sol.end());
  double diff = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) diff = std::max(diff, std::abs(got[i] - ref[i]));
  return diff / std::max(oracle::norm_inf(ref), std::numeric_limits<double>::min());
}

inline std::optional<std::string> compression(std::mt19937_64& rng, const oracle::KktCaps& caps,
                                              const KernelSuite& la, double tol = 1e-8) {
  const KktSystem4 k = random_kkt4(rng, caps);
  const double gap = compression_gap(k, la);
  if (gap <= tol) return std::nullopt;
  return "compressed direction differs by " + std::to_string(gap);
}

/// Draws instances until the full matrix has no eigenvalue within 1e-8*norm of zero.
inline std::optional<std::string> haynsworth(std::mt19937_64& rng, const oracle::KktCaps& caps,
                                             const KernelSuite& la) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const KktSystem4 k = random_kkt4(rng, caps);
    const DenseMatrix full = kkt4_triplets(k).to_dense();
    const auto spec = oracle::eigen_signs(full, 1e-8 * full.norm_inf(), 1e-8 * full.norm_inf());
    if (spec.inertia.zero != 0) continue;
    const Inertia got = Inertia{k.dims().n_s, 0, 0} + bk_factorize(compress(k, la).M).inertia();
    if (got == spec.inertia) return std::nullopt;
    return "inertia " + to_string(got) + " vs eigenvalue count " + to_string(spec.inertia);
  }
  return std::string("no well-separated instance drawn");
}

inline std::optional<std::string> ldl_reconstruction(std::mt19937_64& rng, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> nd(1, std::max<std::size_t>(1, max_n));
  for (int attempt = 0; attempt < 100; ++attempt) {
    const std::size_t n = nd(rng);
    const DenseMatrix a = oracle::random_symmetric(rng, n);
    const double na = a.norm_inf();
    const auto spec = oracle::eigen_signs(a, 1e-8 * na, 1e-8 * na);
    if (spec.inertia.zero != 0) continue;
    const LdlFactors f = bk_factorize(a);
    const double res = oracle::residual_norm_inf(oracle::reconstruct(f), a);
    const double bound = 100.0 * n * std::numeric_limits<double>::epsilon() * na;
    if (res > bound)
      return "n=" + std::to_string(n) + " residual " + std::to_string(res) + " > " +
             std::to_string(bound);
    if (!(f.inertia() == spec.inertia))
      return "n=" + std::to_string(n) + " inertia " + to_string(f.inertia()) + " vs " +
             to_string(spec.inertia);
    return std::nullopt;
  }
  return std::string("no well-separated matrix drawn");
}

/// M0 + sign*A diag(d) B^T by the kernel and by explicit dense products.
inline std::optional<std::string> fused_kernel(std::mt19937_64& rng, const KernelSuite& la,
                                               double tol = 1e-13) {
  std::uniform_int_distribution<std::size_t> dim(1, 30), off(0, 3);
  const std::size_t p = dim(rng), q = dim(rng), r = dim(rng), r0 = off(rng), c0 = off(rng);
  TripletMatrix a = oracle::random_triplets(rng, p, q, 0.2);
  TripletMatrix b = oracle::random_triplets(rng, r, q, 0.2);
  // duplicates must be summed
  if (a.nnz() > 0) a.add(a.i[0], a.j[0], 0.5);
  if (b.nnz() > 0) b.add(b.i[0], b.j[0], -0.25);
  Vector d(q);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (auto& v : d) v = u(rng);
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  DenseMatrix m = oracle::random_dense(rng, p + r0 + 2, r + c0 + 2);
  DenseMatrix ref = m;

  DenseMatrix ad = a.to_dense();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) ad(i, j) *= d[j];
  const DenseMatrix prod = oracle::multiply(ad, oracle::transpose(b.to_dense()));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < r; ++j) ref(r0 + i, c0 + j) += sign * prod(i, j);

  la.fused_add_sdst(m, r0, c0, a, d, b, sign);
  const double diff = oracle::max_abs_diff(m, ref);
  const double scale = std::max(ref.norm_inf(), 1.0);
  if (diff <= tol * scale) return std::nullopt;
  return "fused update differs by " + std::to_string(diff / scale);
}

namespace fd {

inline Vector random_interior(std::mt19937_64& rng, std::span<const double> lo,
                              std::span<const double> up) {
  Vector x(lo.size());
  std::uniform_real_distribution<double> u(0.05, 0.95), w(-3.0, 3.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool fl = finite_lower(lo[i]), fu = finite_upper(up[i]);
    if (fl && fu) x[i] = lo[i] + u(rng) * (up[i] - lo[i]);
    else if (fl) x[i] = lo[i] + 3.0 * u(rng);
    else if (fu) x[i] = up[i] - 3.0 * u(rng);
    else x[i] = w(rng);
  }
  return x;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n) {
  Vector v(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& x : v) x = u(rng);
  return v;
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Gradient of the Lagrangian f + yg^T g + yh^T h with respect to (x_d, x_s).
inline Vector lagrangian_gradient(const MdsNlpProblem& p, std::span<const double> xd,
                                  std::span<const double> xs, std::span<const double> yg,
                                  std::span<const double> yh) {
  const auto& d = p.dims();
  Vector gd(d.n_d), gs(d.n_s);
  p.gradient(xd, xs, gd, gs);
  DenseMatrix jd;
  TripletMatrix js;
  const auto add_jt = [&](std::span<const double> y) {
    for (std::size_t i = 0; i < jd.rows(); ++i)
      for (std::size_t j = 0; j < jd.cols(); ++j) gd[j] += jd(i, j) * y[i];
    for (std::size_t e = 0; e < js.nnz(); ++e) gs[js.j[e]] += js.v[e] * y[js.i[e]];
  };
  p.jacobian_eq(xd, xs, jd, js);
  add_jt(yg);
  p.jacobian_ineq(xd, xs, jd, js);
  add_jt(yh);
  Vector out = gd;
  out.insert(out.end(), gs.begin(), gs.end());
  return out;
}

}  // namespace fd

/**
 * Central finite differences along random directions for the objective
 * gradient, both constraint Jacobians and the Lagrangian Hessian-vector
 * product, at random interior points. Step 1e-6*(1+|x|_inf).
 */
inline std::vector<std::string> derivatives(const MdsNlpProblem& p, std::mt19937_64& rng,
                                            std::size_t points, double tol = 1e-5) {
  std::vector<std::string> out;
  const auto& d = p.dims();
  for (std::size_t k = 0; k < points; ++k) {
    const Vector xd = fd::random_interior(rng, p.xd_lo(), p.xd_up());
    const Vector xs = fd::random_interior(rng, p.xs_lo(), p.xs_up());
    const Vector dd = fd::random_vector(rng, d.n_d), ds = fd::random_vector(rng, d.n_s);
    const Vector yg = fd::random_vector(rng, d.m_E), yh = fd::random_vector(rng, d.m_I);
    const double h =
        1e-6 * (1.0 + std::max(oracle::norm_inf(xd), oracle::norm_inf(xs)));
    Vector xdp = xd, xdm = xd, xsp = xs, xsm = xs;
    for (std::size_t i = 0; i < d.n_d; ++i) xdp[i] += h * dd[i], xdm[i] -= h * dd[i];
    for (std::size_t i = 0; i < d.n_s; ++i) xsp[i] += h * ds[i], xsm[i] -= h * ds[i];
    const std::string at = p.name() + " point " + std::to_string(k) + ": ";

    const EvalBundle b = eval_all(p, xd, xs, yg, yh);
    double dir_grad = 0.0;
    for (std::size_t i = 0; i < d.n_d; ++i) dir_grad += b.grad_d[i] * dd[i];
    for (std::size_t i = 0; i < d.n_s; ++i) dir_grad += b.grad_s[i] * ds[i];
    const double fd_grad = (p.objective(xdp, xsp) - p.objective(xdm, xsm)) / (2.0 * h);
    if (!fd::close(fd_grad, dir_grad, tol)) out.push_back(at + "objective gradient");

    const auto jac_check = [&](std::size_t m, const DenseMatrix& jd, const TripletMatrix& js,
                               auto eval, const char* what) {
      Vector plus(m), minus(m), jv(m, 0.0);
      eval(xdp, xsp, plus);
      eval(xdm, xsm, minus);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d.n_d; ++j) jv[i] += jd(i, j) * dd[j];
      for (std::size_t e = 0; e < js.nnz(); ++e) jv[js.i[e]] += js.v[e] * ds[js.j[e]];
      for (std::size_t i = 0; i < m; ++i)
        if (!fd::close((plus[i] - minus[i]) / (2.0 * h), jv[i], tol)) {
          out.push_back(at + what + " row " + std::to_string(i));
          return;
        }
    };
    jac_check(d.m_E, b.Jdg, b.Jsg,
              [&](auto a, auto c, Vector& o) { p.equalities(a, c, o); }, "equality Jacobian");
    jac_check(d.m_I, b.Jdh, b.Jsh,
              [&](auto a, auto c, Vector& o) { p.inequalities(a, c, o); }, "inequality Jacobian");

    const Vector gp = fd::lagrangian_gradient(p, xdp, xsp, yg, yh);
    const Vector gm = fd::lagrangian_gradient(p, xdm, xsm, yg, yh);
    Vector hv(d.n());
    for (std::size_t i = 0; i < d.n_d; ++i)
      for (std::size_t j = 0; j < d.n_d; ++j) hv[i] += b.Qdd(i, j) * dd[j];
    for (std::size_t i = 0; i < d.n_s; ++i) hv[d.n_d + i] = b.qss[i] * ds[i];
    for (std::size_t i = 0; i < d.n(); ++i)
      if (!fd::close((gp[i] - gm[i]) / (2.0 * h), hv[i], tol)) {
        out.push_back(at + "Hessian-vector product component " + std::to_string(i));
        break;
      }
  }
  return out;
}

/// Replays the acceptance rule of every logged step against an independently maintained filter.
inline std::vector<std::string> filter_replay(const std::vector<IterationLog>& log,
                                              const SolverOptions& o) {
  std::vector<std::string> out;
  std::vector<std::pair<double, double>> filter;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    const std::string at = "iteration " + std::to_string(r.iter) + ": ";
    if (k == 0 || r.filter_reset) filter = {{r.theta_max, -std::numeric_limits<double>::infinity()}};
    if (k + 1 < log.size() && log[k + 1].theta != r.theta_trial)
      out.push_back(at + "logged trial violation does not match the next iterate");
    if (r.accept == AcceptKind::TinyStep) continue;

    bool dominated = false;
    for (const auto& [th, ph] : filter)
      if (!(r.theta_trial < th || r.phi_trial < ph)) dominated = true;
    if (dominated) {
      out.push_back(at + "accepted a filter-dominated point");
      continue;
    }
    const double a = r.alpha_primal, g = r.grad_phi_d;
    const bool switching =
        g < 0.0 && a * std::pow(-g, o.s_phi) > o.delta_switch * std::pow(r.theta, o.s_theta);
    if (r.theta <= r.theta_min && switching) {
      const bool armijo = r.phi_trial <= r.phi + o.eta_phi * a * g + 10.0 * eps * std::abs(r.phi);
      if (!armijo || r.accept != AcceptKind::Armijo)
        out.push_back(at + "Armijo branch mismatch");
      continue;
    }
    const bool decrease = (r.theta > 0.0 && r.theta_trial <= (1.0 - o.gamma_theta) * r.theta) ||
                          r.phi_trial < r.phi - o.gamma_phi * r.theta;
    if (!decrease || r.accept != AcceptKind::SufficientDecrease)
      out.push_back(at + "sufficient-decrease branch mismatch");
    const double th = (1.0 - o.gamma_theta) * r.theta, ph = r.phi - o.gamma_phi * r.theta;
    std::erase_if(filter, [&](const auto& e) { return e.first >= th && e.second >= ph; });
    filter.emplace_back(th, ph);
  }
  return out;
}

// Exceptions count as failures of the check that raised them.
template <class F>
std::optional<std::string> guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return std::string("exception: ") + e.what();
  }
}

}  // namespace check

inline ProblemDims random_dims(std::mt19937_64& rng, const oracle::KktCaps& caps) {
  std::uniform_int_distribution<std::size_t> nd(1, std::max<std::size_t>(1, caps.n_d)),
      ns(1, std::max<std::size_t>(1, caps.n_s)), me(0, caps.m_E), mi(0, caps.m_I);
  ProblemDims d{nd(rng), ns(rng), me(rng), mi(rng)};
  d.m_E = std::min(d.m_E, d.n());
  if (d.m_E + d.m_I == 0) d.m_I = 1;
  return d;
}

/**
 * Property suites over `seeds` random draws starting at base_seed:
 * compression equivalence, inertia additivity, LDL^T reconstruction,
 * fused kernel against dense products, finite-difference derivatives,
 * strict interiority of every iterate and filter-acceptance replay.
 */
inline VerifyReport verify_suite(std::size_t seeds, const VerifyCaps& caps = {},
                                 const KernelSuite& la = default_kernels(),
                                 std::uint64_t base_seed = 1) {
  VerifyReport rep;
  if (seeds == 0) return rep;
  SuiteResult comp{"compression-equivalence"}, hay{"haynsworth-inertia"},
      ldl{"ldl-reconstruction"}, fused{"fused-kernel"}, fdr{"finite-differences"},
      interior{"strict-interiority"}, replay{"filter-replay"};
  const SolverOptions opts;
  for (std::size_t s = 0; s < seeds; ++s) {
    const std::uint64_t seed = base_seed + s;
    std::mt19937_64 rng(seed);
    comp.record(check::guarded([&] { return check::compression(rng, caps.kkt, la); }));
    hay.record(check::guarded([&] { return check::haynsworth(rng, caps.kkt, la); }));
    ldl.record(check::guarded([&] { return check::ldl_reconstruction(rng, caps.ldl_n); }));
    fused.record(check::guarded([&] { return check::fused_kernel(rng, la); }));

    const ProblemDims d = random_dims(rng, caps.kkt);
    const auto rp = random_problem(seed, d.n_d, d.n_s, d.m_E, d.m_I);
    const auto sp = synthetic_problem(1 + s % 5);
    for (const MdsNlpProblem* p : {rp.get(), sp.get()}) {
      fdr.record(check::guarded([&]() -> std::optional<std::string> {
        const auto bad = check::derivatives(*p, rng, caps.fd_points);
        if (bad.empty()) return std::nullopt;
        return bad.front();
      }));
    }

    std::optional<std::string> not_interior;
    SolveResult res;
    const auto solved = check::guarded([&]() -> std::optional<std::string> {
      res = solve(*rp, opts, la, [&](const IteratePoint& pt, const IterationLog* rec) {
        if (!not_interior && !strictly_interior(*rp, pt))
          not_interior = rp->name() + " iterate " + std::to_string(rec ? rec->iter : 0);
      });
      if (res.status == SolveStatus::Optimal) return std::nullopt;
      return rp->name() + " ended with status " + std::string(to_string(res.status));
    });
    interior.record(not_interior ? not_interior : solved);
    replay.record(check::guarded([&]() -> std::optional<std::string> {
      if (solved) return solved;
      const auto bad = check::filter_replay(res.log, opts);
      if (bad.empty()) return std::nullopt;
      return rp->name() + ": " + bad.front();
    }));
  }
  rep.suites = {comp, hay, ldl, fused, fdr, interior, replay};
  return rep;
}

inline void print_report(std::ostream& os, const VerifyReport& rep) {
  if (rep.suites.empty()) {
    os << "no suites run\n";
    return;
  }
  for (const auto& s : rep.suites) {
    os << (s.failed == 0 ? "PASS " : "FAIL ") << s.name << ": " << s.passed << " passed, "
       << s.failed << " failed\n";
    for (const auto& f : s.failures) os << "    " << f << "\n";
  }
}

}  // namespace mdsipm
