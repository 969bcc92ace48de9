#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "mdsipm/ipm/options.hpp"
#include "mdsipm/linalg/kernels.hpp"
#include "mdsipm/nlp/problem.hpp"

namespace mdsipm {

/// Primal variables, inequality slacks and all multipliers of the barrier subproblem.
struct IteratePoint {
  Vector xd, xs;
  Vector s;            // slacks, h(x) - s = 0
  Vector yg, yh;       // constraint multipliers
  Vector z_lo_d, z_up_d;
  Vector z_lo_s, z_up_s;
  Vector v_lo, v_up;   // slack bound multipliers
};

/// One bounded block: values, bounds and the two bound multipliers.
struct BoundedBlock {
  std::span<const double> x, lo, up, zl, zu;
};

inline std::array<BoundedBlock, 3> bounded_blocks(const MdsNlpProblem& p, const IteratePoint& pt) {
  return {{{pt.xd, p.xd_lo(), p.xd_up(), pt.z_lo_d, pt.z_up_d},
           {pt.xs, p.xs_lo(), p.xs_up(), pt.z_lo_s, pt.z_up_s},
           {pt.s, p.h_lo(), p.h_up(), pt.v_lo, pt.v_up}}};
}

/**
 * Every finite-bounded primal and slack component strictly inside its bounds,
 * multipliers of finite bounds strictly positive, those of infinite bounds zero.
 */
inline bool strictly_interior(const MdsNlpProblem& p, const IteratePoint& pt) {
  for (const auto& b : bounded_blocks(p, pt)) {
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      if (finite_lower(b.lo[i]) ? !(b.x[i] > b.lo[i] && b.zl[i] > 0.0) : b.zl[i] != 0.0)
        return false;
      if (finite_upper(b.up[i]) ? !(b.x[i] < b.up[i] && b.zu[i] > 0.0) : b.zu[i] != 0.0)
        return false;
    }
  }
  return true;
}

namespace detail {

inline void require_interior(const BoundedBlock& b) {
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    if ((finite_lower(b.lo[i]) && !(b.x[i] > b.lo[i])) ||
        (finite_upper(b.up[i]) && !(b.x[i] < b.up[i])))
      throw NotInteriorError("component " + std::to_string(i) + " is on or outside a bound");
  }
}

// Push x into [lo + pl, up - pu] with pl = min(k1*max(1,|lo|), k2*(up-lo)).
inline double push_inside(double x, double lo, double up, double k1, double k2) {
  const bool fl = finite_lower(lo), fu = finite_upper(up);
  if (fl && fu) {
    const double pl = std::min(k1 * std::max(1.0, std::abs(lo)), k2 * (up - lo));
    const double pu = std::min(k1 * std::max(1.0, std::abs(up)), k2 * (up - lo));
    if (!(lo + pl < up - pu)) return 0.5 * (lo + up);
    return std::clamp(x, lo + pl, up - pu);
  }
  if (fl) return std::max(x, lo + k1 * std::max(1.0, std::abs(lo)));
  if (fu) return std::min(x, up - k1 * std::max(1.0, std::abs(up)));
  return x;
}

}  // namespace detail

/**
 * Starting point: primals pushed off their bounds, slacks = h(x) pushed into
 * [h_lo, h_up], bound multipliers mu0/distance (zero for infinite bounds) and
 * constraint multipliers zero.
 */
inline IteratePoint initialize(const MdsNlpProblem& p, const SolverOptions& opts,
                               std::optional<std::span<const double>> x0_d = std::nullopt,
                               std::optional<std::span<const double>> x0_s = std::nullopt) {
  const auto& d = p.dims();
  IteratePoint pt;
  pt.xd.assign(d.n_d, 0.0);
  pt.xs.assign(d.n_s, 0.0);
  p.starting_point(pt.xd, pt.xs);
  if (x0_d) {
    detail::require_dims(x0_d->size() == d.n_d, "x0_d");
    std::copy(x0_d->begin(), x0_d->end(), pt.xd.begin());
  }
  if (x0_s) {
    detail::require_dims(x0_s->size() == d.n_s, "x0_s");
    std::copy(x0_s->begin(), x0_s->end(), pt.xs.begin());
  }

  const auto push_block = [&](Vector& x, const Vector& lo, const Vector& up, const char* tag) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (finite_lower(lo[i]) && finite_upper(up[i]) && !(lo[i] < up[i]))
        throw InitError(std::string("empty interior for ") + tag + "[" + std::to_string(i) + "]");
      x[i] = detail::push_inside(x[i], lo[i], up[i], opts.kappa_1, opts.kappa_2);
    }
  };
  push_block(pt.xd, p.xd_lo(), p.xd_up(), "x_d");
  push_block(pt.xs, p.xs_lo(), p.xs_up(), "x_s");

  pt.s.assign(d.m_I, 0.0);
  p.inequalities(pt.xd, pt.xs, pt.s);
  detail::require_finite(pt.s, "h");
  push_block(pt.s, p.h_lo(), p.h_up(), "s");

  pt.yg.assign(d.m_E, 0.0);
  pt.yh.assign(d.m_I, 0.0);
  const auto duals = [&](const Vector& x, const Vector& lo, const Vector& up, Vector& zl,
                         Vector& zu) {
    zl.assign(x.size(), 0.0);
    zu.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (finite_lower(lo[i])) zl[i] = opts.mu0 / (x[i] - lo[i]);
      if (finite_upper(up[i])) zu[i] = opts.mu0 / (up[i] - x[i]);
    }
  };
  duals(pt.xd, p.xd_lo(), p.xd_up(), pt.z_lo_d, pt.z_up_d);
  duals(pt.xs, p.xs_lo(), p.xs_up(), pt.z_lo_s, pt.z_up_s);
  duals(pt.s, p.h_lo(), p.h_up(), pt.v_lo, pt.v_up);
  return pt;
}

/// f(x) - mu * sum of log-distances to every finite primal and slack bound.
inline double barrier_phi(const MdsNlpProblem& p, const IteratePoint& pt, double mu, double f) {
  double sum = 0.0;
  for (const auto& b : bounded_blocks(p, pt)) {
    detail::require_interior(b);
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      if (finite_lower(b.lo[i])) sum += std::log(b.x[i] - b.lo[i]);
      if (finite_upper(b.up[i])) sum += std::log(b.up[i] - b.x[i]);
    }
  }
  return mu == 0.0 ? f : f - mu * sum;
}

inline double barrier_phi(const MdsNlpProblem& p, const IteratePoint& pt, double mu) {
  return barrier_phi(p, pt, mu, p.objective(pt.xd, pt.xs));
}

/// Constraint violation ||g - g_E||_1 + ||h - s||_1.
inline double constraint_violation(const MdsNlpProblem& p, std::span<const double> g_val,
                                   std::span<const double> h_val, std::span<const double> s) {
  double theta = 0.0;
  for (std::size_t i = 0; i < g_val.size(); ++i) theta += std::abs(g_val[i] - p.g_E()[i]);
  for (std::size_t i = 0; i < h_val.size(); ++i) theta += std::abs(h_val[i] - s[i]);
  return theta;
}

struct KktError {
  double e = 0.0;       // overall scaled error
  double dual = 0.0;    // ||stationarity||_inf, unscaled
  double primal = 0.0;  // ||(g - g_E, h - s)||_inf
  double compl_ = 0.0;  // ||dist*dual - mu||_inf, unscaled
  double s_d = 1.0;
  double s_c = 1.0;
};

/**
 * Gradient of the Lagrangian
 *   f + y_g^T (g - g_E) + y_h^T (h - s) - z_lo^T (x - lo) - z_up^T (up - x) - ...
 * with respect to x_d, x_s and s.
 */
struct LagrangianGradient {
  Vector xd, xs, s;
};

inline LagrangianGradient lagrangian_gradient(const EvalBundle& b, const IteratePoint& pt,
                                              const KernelSuite& la) {
  LagrangianGradient r;
  r.xd = b.grad_d;
  r.xs = b.grad_s;
  la.gemv(1.0, r.xd, 1.0, b.Jdg, pt.yg, true);
  la.gemv(1.0, r.xd, 1.0, b.Jdh, pt.yh, true);
  la.triplet_times_vec(1.0, r.xs, 1.0, b.Jsg, pt.yg, true);
  la.triplet_times_vec(1.0, r.xs, 1.0, b.Jsh, pt.yh, true);
  for (std::size_t i = 0; i < r.xd.size(); ++i) r.xd[i] += -pt.z_lo_d[i] + pt.z_up_d[i];
  for (std::size_t i = 0; i < r.xs.size(); ++i) r.xs[i] += -pt.z_lo_s[i] + pt.z_up_s[i];
  r.s.resize(pt.s.size());
  for (std::size_t i = 0; i < r.s.size(); ++i) r.s[i] = -pt.yh[i] - pt.v_lo[i] + pt.v_up[i];
  return r;
}

/**
 * Scaled optimality error of the barrier subproblem:
 *   max(||grad L||_inf / s_d, ||c||_inf, ||dist*z - mu||_inf / s_c)
 * with s_d, s_c >= 1 growing with the average multiplier magnitude beyond s_max.
 * mu = 0 gives the error of the original problem.
 */
inline KktError kkt_error(const MdsNlpProblem& p, const EvalBundle& b, const IteratePoint& pt,
                          double mu, const KernelSuite& la, const SolverOptions& opts = {}) {
  KktError err;
  const auto grad = lagrangian_gradient(b, pt, la);
  err.dual = std::max({la.reduce(grad.xd, Reduction::InfNorm),
                       la.reduce(grad.xs, Reduction::InfNorm),
                       la.reduce(grad.s, Reduction::InfNorm)});
  for (std::size_t i = 0; i < b.g_val.size(); ++i)
    err.primal = std::max(err.primal, std::abs(b.g_val[i] - p.g_E()[i]));
  for (std::size_t i = 0; i < b.h_val.size(); ++i)
    err.primal = std::max(err.primal, std::abs(b.h_val[i] - pt.s[i]));

  double z_sum = 0.0;
  std::size_t n_bounds = 0;
  for (const auto& blk : bounded_blocks(p, pt)) {
    for (std::size_t i = 0; i < blk.x.size(); ++i) {
      if (finite_lower(blk.lo[i])) {
        err.compl_ = std::max(err.compl_, std::abs((blk.x[i] - blk.lo[i]) * blk.zl[i] - mu));
        z_sum += std::abs(blk.zl[i]);
        ++n_bounds;
      }
      if (finite_upper(blk.up[i])) {
        err.compl_ = std::max(err.compl_, std::abs((blk.up[i] - blk.x[i]) * blk.zu[i] - mu));
        z_sum += std::abs(blk.zu[i]);
        ++n_bounds;
      }
    }
  }
  const double y_sum = la.reduce(pt.yg, Reduction::OneNorm) + la.reduce(pt.yh, Reduction::OneNorm);
  const double m = static_cast<double>(p.dims().m());
  const double nb = static_cast<double>(n_bounds);
  err.s_d = std::max(opts.s_max, (y_sum + z_sum) / std::max(1.0, m + nb)) / opts.s_max;
  err.s_c = std::max(opts.s_max, z_sum / std::max(1.0, nb)) / opts.s_max;
  err.e = std::max({err.dual / err.s_d, err.primal, err.compl_ / err.s_c});
  return err;
}

inline KktError kkt_error(const MdsNlpProblem& p, const IteratePoint& pt, double mu,
                          const SolverOptions& opts = {}) {
  for (const auto& b : bounded_blocks(p, pt)) detail::require_interior(b);
  const EvalBundle b = eval_all(p, pt.xd, pt.xs, pt.yg, pt.yh);
  return kkt_error(p, b, pt, mu, default_kernels(), opts);
}

/// Barrier diagonals D_xs, D_xd and D_h of the primal-dual system.
struct BarrierDiagonals {
  Vector d_xs, d_xd, dh;
};

/// d_i = z_lo,i/(x_i - lo_i) + z_up,i/(up_i - x_i), infinite-bound terms dropped.
inline BarrierDiagonals build_diagonals(const MdsNlpProblem& p, const IteratePoint& pt) {
  const auto blocks = bounded_blocks(p, pt);
  std::array<Vector, 3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& b = blocks[k];
    detail::require_interior(b);
    out[k].assign(b.x.size(), 0.0);
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      if (finite_lower(b.lo[i])) out[k][i] += b.zl[i] / (b.x[i] - b.lo[i]);
      if (finite_upper(b.up[i])) out[k][i] += b.zu[i] / (b.up[i] - b.x[i]);
    }
  }
  return {std::move(out[1]), std::move(out[0]), std::move(out[2])};
}

}  // namespace mdsipm
