#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mdsipm/ipm/filter.hpp"
#include "mdsipm/ipm/iterate.hpp"
#include "mdsipm/ipm/kkt.hpp"
#include "mdsipm/ipm/options.hpp"
#include "mdsipm/ipm/timing.hpp"
#include "mdsipm/linalg/dump.hpp"
#include "mdsipm/nlp/problem.hpp"

namespace mdsipm {

/// One accepted iteration. The first block mirrors the CSV log columns.
struct IterationLog {
  std::size_t iter = 0;
  double mu = 0.0;
  double theta = 0.0;  // at the iterate the step starts from
  double phi = 0.0;
  double alpha_primal = 0.0;
  double alpha_dual = 0.0;
  double delta_w = 0.0;
  double delta_c = 0.0;
  Inertia inertia;  // of the factorized compressed matrix
  KernelTimes times;

  // Enough to replay the acceptance decision.
  double theta_trial = 0.0;
  double phi_trial = 0.0;
  double grad_phi_d = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  bool filter_reset = false;  // filter was reset (mu decreased) before this step
  AcceptKind accept = AcceptKind::Rejected;
  std::size_t ls_trials = 0;
  double e_mu = 0.0;
  std::size_t kkt_dim = 0;
  std::vector<RegularizationTrial> reg_trials;
};

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIter;
  IteratePoint point;
  double e_mu_final = 0.0;  // unbarriered optimality error at the returned point
  double objective = 0.0;
  double mu_final = 0.0;
  std::size_t iterations = 0;
  double total_time = 0.0;
  std::string message;
  std::vector<IterationLog> log;
};

/// Called with the starting point (record == nullptr) and after every accepted step.
using IterateObserver = std::function<void(const IteratePoint&, const IterationLog* record)>;

/// grad(phi)^T d over x_d, x_s and s.
inline double barrier_directional_derivative(const MdsNlpProblem& p, const EvalBundle& b,
                                             const IteratePoint& pt, const Direction& d, double mu,
                                             const KernelSuite& la) {
  double g = la.dot(b.grad_d, d.dxd) + la.dot(b.grad_s, d.dxs);
  g += la.dot(detail::barrier_gradient_terms(pt.xd, p.xd_lo(), p.xd_up(), mu), d.dxd);
  g += la.dot(detail::barrier_gradient_terms(pt.xs, p.xs_lo(), p.xs_up(), mu), d.dxs);
  g += la.dot(detail::barrier_gradient_terms(pt.s, p.h_lo(), p.h_up(), mu), d.ds);
  return g;
}

namespace detail {

inline Vector dual_lower_bounds(std::span<const double> bound, bool lower) {
  Vector lo(bound.size());
  for (std::size_t i = 0; i < bound.size(); ++i)
    lo[i] = (lower ? finite_lower(bound[i]) : finite_upper(bound[i])) ? 0.0 : -kInfBound;
  return lo;
}

inline double dual_step(const MdsNlpProblem& p, const IteratePoint& pt, const Direction& d,
                        double tau, const KernelSuite& la) {
  const Vector inf(std::max({pt.xd.size(), pt.xs.size(), pt.s.size()}), kInfBound);
  const auto step = [&](const Vector& z, const Vector& dz, const Vector& bound, bool lower) {
    return la.max_step_to_bound(z, dz, dual_lower_bounds(bound, lower),
                                std::span<const double>(inf).first(z.size()), tau);
  };
  return std::min({step(pt.z_lo_d, d.dz_lo_d, p.xd_lo(), true),
                   step(pt.z_up_d, d.dz_up_d, p.xd_up(), false),
                   step(pt.z_lo_s, d.dz_lo_s, p.xs_lo(), true),
                   step(pt.z_up_s, d.dz_up_s, p.xs_up(), false),
                   step(pt.v_lo, d.dv_lo, p.h_lo(), true), step(pt.v_up, d.dv_up, p.h_up(), false)});
}

// Keeps every bound multiplier within a factor kappa_Sigma of mu/distance.
inline void safeguard_duals(const MdsNlpProblem& p, IteratePoint& pt, double mu, double kappa) {
  const auto clip = [&](const Vector& x, const Vector& lo, const Vector& up, Vector& zl,
                        Vector& zu) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (finite_lower(lo[i])) {
        const double gap = x[i] - lo[i];
        zl[i] = std::clamp(zl[i], mu / (kappa * gap), kappa * mu / gap);
      }
      if (finite_upper(up[i])) {
        const double gap = up[i] - x[i];
        zu[i] = std::clamp(zu[i], mu / (kappa * gap), kappa * mu / gap);
      }
    }
  };
  clip(pt.xd, p.xd_lo(), p.xd_up(), pt.z_lo_d, pt.z_up_d);
  clip(pt.xs, p.xs_lo(), p.xs_up(), pt.z_lo_s, pt.z_up_s);
  clip(pt.s, p.h_lo(), p.h_up(), pt.v_lo, pt.v_up);
}

inline void take_step(IteratePoint& pt, const Direction& d, double alpha_p, double alpha_d,
                      const KernelSuite& la) {
  la.axpy(alpha_p, d.dxd, pt.xd);
  la.axpy(alpha_p, d.dxs, pt.xs);
  la.axpy(alpha_p, d.ds, pt.s);
  la.axpy(alpha_p, d.dyg, pt.yg);
  la.axpy(alpha_p, d.dyh, pt.yh);
  la.axpy(alpha_d, d.dz_lo_d, pt.z_lo_d);
  la.axpy(alpha_d, d.dz_up_d, pt.z_up_d);
  la.axpy(alpha_d, d.dz_lo_s, pt.z_lo_s);
  la.axpy(alpha_d, d.dz_up_s, pt.z_up_s);
  la.axpy(alpha_d, d.dv_lo, pt.v_lo);
  la.axpy(alpha_d, d.dv_up, pt.v_up);
}

}  // namespace detail

/// Largest primal step keeping x_d, x_s and s a tau-fraction inside their bounds.
inline double max_primal_step(const MdsNlpProblem& p, const IteratePoint& pt, const Direction& d,
                              double tau, const KernelSuite& la) {
  return std::min({la.max_step_to_bound(pt.xd, d.dxd, p.xd_lo(), p.xd_up(), tau),
                   la.max_step_to_bound(pt.xs, d.dxs, p.xs_lo(), p.xs_up(), tau),
                   la.max_step_to_bound(pt.s, d.ds, p.h_lo(), p.h_up(), tau)});
}

struct LineSearchResult {
  bool accepted = false;
  IteratePoint point;
  double alpha_primal = 0.0;
  double alpha_dual = 0.0;
  double alpha_max = 0.0;
  double theta_trial = 0.0;
  double phi_trial = 0.0;
  AcceptKind kind = AcceptKind::Rejected;
  std::size_t trials = 0;
};

/// Current-iterate quantities the line search compares against.
struct LineSearchContext {
  double theta = 0.0;
  double phi = 0.0;
  double grad_phi_d = 0.0;
  double theta_min = 0.0;
};

/**
 * Backtracking filter line search. Starts at the largest fraction-to-boundary
 * step, halves until a trial is accepted, and gives up (accepted == false,
 * meaning restoration would be needed) once alpha < alpha_min_frac*alpha_max.
 * On acceptance the filter is augmented unless the Armijo branch was taken,
 * and the bound multipliers are stepped by the dual step and safeguarded.
 */
inline LineSearchResult line_search(const MdsNlpProblem& p, const IteratePoint& pt,
                                    const Direction& dir, double mu, Filter& filter,
                                    const SolverOptions& opts, const LineSearchContext& ctx,
                                    const KernelSuite& la, KernelTimers* timers = nullptr) {
  LineSearchResult r;
  const double tau = std::max(opts.tau_min, 1.0 - mu);
  double alpha_dual = 0.0;
  {
    auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K1)
                    : std::nullopt;
    r.alpha_max = max_primal_step(p, pt, dir, tau, la);
    alpha_dual = detail::dual_step(p, pt, dir, tau, la);
  }

  const auto& d = p.dims();
  Vector g(d.m_E), h(d.m_I);
  IteratePoint trial = pt;
  double alpha = r.alpha_max;
  while (alpha >= opts.alpha_min_frac * r.alpha_max && alpha > 0.0) {
    ++r.trials;
    {
      auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K1)
                      : std::nullopt;
      trial.xd = pt.xd;
      trial.xs = pt.xs;
      trial.s = pt.s;
      la.axpy(alpha, dir.dxd, trial.xd);
      la.axpy(alpha, dir.dxs, trial.xs);
      la.axpy(alpha, dir.ds, trial.s);
    }
    const double f = p.objective(trial.xd, trial.xs);
    p.equalities(trial.xd, trial.xs, g);
    p.inequalities(trial.xd, trial.xs, h);
    if (std::isfinite(f) && std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); }) &&
        std::all_of(h.begin(), h.end(), [](double v) { return std::isfinite(v); })) {
      TrialMeasures m;
      m.theta = ctx.theta;
      m.phi = ctx.phi;
      m.theta_trial = constraint_violation(p, g, h, trial.s);
      m.phi_trial = barrier_phi(p, trial, mu, f);
      m.alpha = alpha;
      m.grad_phi_d = ctx.grad_phi_d;
      m.theta_min = ctx.theta_min;
      const AcceptKind kind = evaluate_trial(filter, m, opts);
      if (kind != AcceptKind::Rejected) {
        if (kind != AcceptKind::Armijo) {
          const auto e = filter_margin_entry(ctx.theta, ctx.phi, opts);
          filter.add(e.theta, e.phi);
        }
        r.accepted = true;
        r.kind = kind;
        r.alpha_primal = alpha;
        r.alpha_dual = alpha_dual;
        r.theta_trial = m.theta_trial;
        r.phi_trial = m.phi_trial;
        r.point = pt;
        auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K1)
                        : std::nullopt;
        detail::take_step(r.point, dir, alpha, alpha_dual, la);
        detail::safeguard_duals(p, r.point, mu, opts.kappa_Sigma);
        return r;
      }
    }
    alpha *= 0.5;
  }
  return r;
}

namespace detail {

// Step is negligible relative to the iterate in every primal component.
inline bool tiny_step(const IteratePoint& pt, const Direction& d) {
  const double tol = 10.0 * std::numeric_limits<double>::epsilon();
  const auto check = [&](const Vector& x, const Vector& dx) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(dx[i]) / (1.0 + std::abs(x[i])) >= tol) return false;
    return true;
  };
  return check(pt.xd, d.dxd) && check(pt.xs, d.dxs) && check(pt.s, d.ds);
}

inline void dump_kkt(const std::string& dir, std::size_t iter, const CorrectedStep& step) {
  std::filesystem::create_directories(dir);
  char name[64];
  std::snprintf(name, sizeof(name), "kkt4_iter%04zu.txt", iter);
  dump_matrix((std::filesystem::path(dir) / name).string(), kkt4_triplets(step.kkt4));
  std::snprintf(name, sizeof(name), "kkt3_iter%04zu.txt", iter);
  dump_matrix((std::filesystem::path(dir) / name).string(), step.kkt3.M);
}

}  // namespace detail

/**
 * Filter line-search interior-point method on the compressed KKT system.
 * Outer loop: barrier homotopy on mu. Inner step: evaluate the model,
 * build the barrier Newton system, compress it, factorize with inertia
 * correction, recover the full direction and run the filter line search.
 */
inline SolveResult solve(const MdsNlpProblem& p, const SolverOptions& opts,
                         const KernelSuite& la = default_kernels(),
                         const IterateObserver& observer = {}) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  opts.validate();
  if (const auto issues = validate_problem(p); !issues.empty())
    throw ConfigError("invalid problem: " + issues.front());

  SolveResult res;
  const auto& dims = p.dims();
  IteratePoint pt = initialize(p, opts);
  double mu = opts.mu0;
  if (observer) observer(pt, nullptr);

  EvalBundle bundle;
  try {
    bundle = eval_all(p, pt.xd, pt.xs, pt.yg, pt.yh);
  } catch (const EvalError& e) {
    res.status = SolveStatus::EvalFailure;
    res.message = e.what();
    res.point = std::move(pt);
    return res;
  }

  const double theta0 = constraint_violation(p, bundle.g_val, bundle.h_val, pt.s);
  const double theta_max = 1e4 * std::max(1.0, theta0);
  const double theta_min = 1e-4 * std::max(1.0, theta0);
  Filter filter;
  filter.reset(theta_max);
  RegularizationState reg;

  std::size_t iter = 0;
  while (true) {
    const auto t_iter = Clock::now();
    KernelTimers timers(opts.enable_timing);
    KernelTimers* tm = &timers;

    KktError err0, err_mu;
    {
      auto t = timers.scope(KernelClass::K2);
      err0 = kkt_error(p, bundle, pt, 0.0, la, opts);
    }
    res.e_mu_final = err0.e;
    if (err0.e <= opts.tol) {
      res.status = SolveStatus::Optimal;
      break;
    }
    if (iter >= opts.max_iter) {
      res.status = SolveStatus::MaxIter;
      break;
    }

    IterationLog rec;
    {
      auto t = timers.scope(KernelClass::K2);
      err_mu = kkt_error(p, bundle, pt, mu, la, opts);
    }
    while (true) {
      const double next = update_barrier(mu, err_mu.e, opts);
      if (next == mu) break;
      mu = next;
      filter.reset(theta_max);
      rec.filter_reset = true;
      auto t = timers.scope(KernelClass::K2);
      err_mu = kkt_error(p, bundle, pt, mu, la, opts);
    }

    BarrierDiagonals diag;
    KktRhs rhs;
    {
      auto t = timers.scope(KernelClass::K1);
      diag = build_diagonals(p, pt);
    }
    {
      auto t = timers.scope(KernelClass::K2);
      rhs = build_rhs(p, bundle, pt, diag, mu, la);
    }

    CorrectedStep step;
    try {
      step = solve_with_inertia_correction(bundle, diag, rhs, mu, opts, reg, la, tm);
    } catch (const InertiaCorrectionError& e) {
      res.status = SolveStatus::SingularSystem;
      res.message = e.what();
      break;
    }
    if (!opts.dump_kkt_dir.empty()) detail::dump_kkt(opts.dump_kkt_dir, iter, step);

    Direction dir;
    {
      auto t = timers.scope(KernelClass::K1);
      dir = complete_direction(p, pt, diag, rhs, mu, std::move(step.dxs), std::move(step.dxd),
                               std::move(step.dyg), std::move(step.dyh));
    }

    LineSearchContext ctx;
    ctx.theta = constraint_violation(p, bundle.g_val, bundle.h_val, pt.s);
    ctx.phi = barrier_phi(p, pt, mu, bundle.f);
    ctx.grad_phi_d = barrier_directional_derivative(p, bundle, pt, dir, mu, la);
    ctx.theta_min = theta_min;

    LineSearchResult ls;
    if (detail::tiny_step(pt, dir)) {
      // Nothing left to gain along this direction; take it and let mu decrease.
      const double tau = std::max(opts.tau_min, 1.0 - mu);
      ls.alpha_max = max_primal_step(p, pt, dir, tau, la);
      ls.alpha_primal = ls.alpha_max;
      ls.alpha_dual = detail::dual_step(p, pt, dir, tau, la);
      ls.point = pt;
      detail::take_step(ls.point, dir, ls.alpha_primal, ls.alpha_dual, la);
      detail::safeguard_duals(p, ls.point, mu, opts.kappa_Sigma);
      ls.accepted = true;
      ls.kind = AcceptKind::TinyStep;
    } else {
      ls = line_search(p, pt, dir, mu, filter, opts, ctx, la, tm);
    }
    if (!ls.accepted) {
      res.status = SolveStatus::RestorationNeeded;
      res.message = "line search step fell below the minimum; feasibility restoration is not available";
      break;
    }

    pt = std::move(ls.point);
    try {
      bundle = eval_all(p, pt.xd, pt.xs, pt.yg, pt.yh);
    } catch (const EvalError& e) {
      res.status = SolveStatus::EvalFailure;
      res.message = e.what();
      break;
    }
    if (ls.kind == AcceptKind::TinyStep) {
      ls.theta_trial = constraint_violation(p, bundle.g_val, bundle.h_val, pt.s);
      ls.phi_trial = barrier_phi(p, pt, mu, bundle.f);
    }

    ++iter;
    rec.iter = iter;
    rec.mu = mu;
    rec.theta = ctx.theta;
    rec.phi = ctx.phi;
    rec.alpha_primal = ls.alpha_primal;
    rec.alpha_dual = ls.alpha_dual;
    rec.delta_w = step.delta_w;
    rec.delta_c = step.delta_c;
    rec.inertia = step.inertia;
    rec.theta_trial = ls.theta_trial;
    rec.phi_trial = ls.phi_trial;
    rec.grad_phi_d = ctx.grad_phi_d;
    rec.theta_min = theta_min;
    rec.theta_max = theta_max;
    rec.accept = ls.kind;
    rec.ls_trials = ls.trials;
    rec.e_mu = err_mu.e;
    rec.kkt_dim = dims.compressed_dim();
    rec.reg_trials = std::move(step.trials);
    timers.set_total(std::chrono::duration<double>(Clock::now() - t_iter).count());
    rec.times = timers.times();
    res.log.push_back(std::move(rec));
    if (observer) observer(pt, &res.log.back());
  }

  res.iterations = iter;
  res.objective = bundle.f;
  res.mu_final = mu;
  res.point = std::move(pt);
  res.total_time = std::chrono::duration<double>(Clock::now() - t_start).count();
  return res;
}

}  // namespace mdsipm
