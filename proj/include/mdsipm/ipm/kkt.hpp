#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdsipm/ipm/iterate.hpp"
#include "mdsipm/ipm/timing.hpp"
#include "mdsipm/ldl/bunch_kaufman.hpp"
#include "mdsipm/linalg/kernels.hpp"
#include "mdsipm/nlp/problem.hpp"

namespace mdsipm {

/**
 * Right-hand side of the primal-dual Newton system after the bound
 * multipliers and the slacks have been eliminated.
 *
 *   r_xd = -(grad_d f + Jdg^T y_g + Jdh^T y_h - mu/(x_d - lo) + mu/(up - x_d))
 *   r_xs = same for x_s
 *   r_s  = y_h + mu/(s - h_lo) - mu/(h_up - s)
 *   r_yg = -(g - g_E)
 *   r_yh = -(h - s) + D_h^{-1} r_s
 */
struct KktRhs {
  Vector r_xs, r_xd, r_yg, r_yh, r_s;
};

namespace detail {

inline Vector barrier_gradient_terms(std::span<const double> x, std::span<const double> lo,
                                     std::span<const double> up, double mu) {
  Vector t(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (finite_lower(lo[i])) t[i] -= mu / (x[i] - lo[i]);
    if (finite_upper(up[i])) t[i] += mu / (up[i] - x[i]);
  }
  return t;
}

}  // namespace detail

inline KktRhs build_rhs(const MdsNlpProblem& p, const EvalBundle& b, const IteratePoint& pt,
                        const BarrierDiagonals& diag, double mu, const KernelSuite& la) {
  KktRhs r;
  r.r_xd = b.grad_d;
  r.r_xs = b.grad_s;
  la.gemv(1.0, r.r_xd, 1.0, b.Jdg, pt.yg, true);
  la.gemv(1.0, r.r_xd, 1.0, b.Jdh, pt.yh, true);
  la.triplet_times_vec(1.0, r.r_xs, 1.0, b.Jsg, pt.yg, true);
  la.triplet_times_vec(1.0, r.r_xs, 1.0, b.Jsh, pt.yh, true);
  la.axpy(1.0, detail::barrier_gradient_terms(pt.xd, p.xd_lo(), p.xd_up(), mu), r.r_xd);
  la.axpy(1.0, detail::barrier_gradient_terms(pt.xs, p.xs_lo(), p.xs_up(), mu), r.r_xs);
  for (auto& v : r.r_xd) v = -v;
  for (auto& v : r.r_xs) v = -v;

  r.r_s = detail::barrier_gradient_terms(pt.s, p.h_lo(), p.h_up(), mu);
  for (std::size_t i = 0; i < r.r_s.size(); ++i) r.r_s[i] = pt.yh[i] - r.r_s[i];

  r.r_yg.resize(b.g_val.size());
  for (std::size_t i = 0; i < r.r_yg.size(); ++i) r.r_yg[i] = -(b.g_val[i] - p.g_E()[i]);
  r.r_yh.resize(b.h_val.size());
  for (std::size_t i = 0; i < r.r_yh.size(); ++i)
    r.r_yh[i] = -(b.h_val[i] - pt.s[i]) + r.r_s[i] / diag.dh[i];
  return r;
}

/**
 * The 4x4 block system in (x_s, x_d, y_g, y_h) ordering
 *
 *   [ Q_s    0      Jsg^T   Jsh^T           ] [dx_s]   [r_xs]
 *   [ 0      Q_d    Jdg^T   Jdh^T           ] [dx_d] = [r_xd]
 *   [ Jsg    Jdg   -dc*I    0               ] [dy_g]   [r_yg]
 *   [ Jsh    Jdh    0      -(D_h^-1 + dc*I) ] [dy_h]   [r_yh]
 *
 * with Q_s = diag(q_ss) and both Hessian blocks already carrying the barrier
 * diagonal and the shift delta_w.
 */
struct KktSystem4 {
  Vector q_ss;
  DenseMatrix Qdd;
  TripletMatrix Jsg, Jsh;
  DenseMatrix Jdg, Jdh;
  Vector dh;
  Vector r_xs, r_xd, r_yg, r_yh;
  double delta_w = 0.0;
  double delta_c = 0.0;

  ProblemDims dims() const { return {Qdd.rows(), q_ss.size(), Jdg.rows(), Jdh.rows()}; }
};

inline bool sparse_block_positive(std::span<const double> qss, std::span<const double> d_xs,
                                  double delta_w) {
  for (std::size_t i = 0; i < qss.size(); ++i)
    if (!(qss[i] + d_xs[i] + delta_w > 0.0)) return false;
  return true;
}

inline KktSystem4 assemble_kkt4(const EvalBundle& b, const BarrierDiagonals& diag,
                                const KktRhs& rhs, double delta_w, double delta_c) {
  const std::size_t nd = b.Qdd.rows(), ns = b.qss.size();
  detail::require_dims(diag.d_xs.size() == ns && diag.d_xd.size() == nd, "barrier diagonals");
  detail::require_dims(diag.dh.size() == b.h_val.size(), "D_h");
  KktSystem4 k;
  k.q_ss.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    if (b.qss[i] < 0.0) throw AssemblyError("negative sparse Hessian diagonal at " + std::to_string(i));
    k.q_ss[i] = b.qss[i] + diag.d_xs[i] + delta_w;
    if (!(k.q_ss[i] > 0.0))
      throw AssemblyError("sparse Hessian block not positive at " + std::to_string(i));
  }
  for (std::size_t i = 0; i < diag.dh.size(); ++i)
    if (!(diag.dh[i] > 0.0)) throw AssemblyError("D_h not positive at " + std::to_string(i));
  k.Qdd = b.Qdd;
  for (std::size_t i = 0; i < nd; ++i) k.Qdd(i, i) += diag.d_xd[i] + delta_w;
  k.Jsg = b.Jsg;
  k.Jsh = b.Jsh;
  k.Jdg = b.Jdg;
  k.Jdh = b.Jdh;
  k.dh = diag.dh;
  k.r_xs = rhs.r_xs;
  k.r_xd = rhs.r_xd;
  k.r_yg = rhs.r_yg;
  k.r_yh = rhs.r_yh;
  k.delta_w = delta_w;
  k.delta_c = delta_c;
  return k;
}

/// The full 4x4 matrix as triplets (both triangles), in (x_s, x_d, y_g, y_h) order.
inline TripletMatrix kkt4_triplets(const KktSystem4& k) {
  const auto d = k.dims();
  const std::size_t os = 0, od = d.n_s, og = od + d.n_d, oh = og + d.m_E, n = oh + d.m_I;
  TripletMatrix t(n, n);
  for (std::size_t i = 0; i < d.n_s; ++i) t.add(os + i, os + i, k.q_ss[i]);
  for (std::size_t i = 0; i < d.n_d; ++i)
    for (std::size_t j = 0; j < d.n_d; ++j)
      if (k.Qdd(i, j) != 0.0) t.add(od + i, od + j, k.Qdd(i, j));
  const auto sparse_pair = [&](const TripletMatrix& js, std::size_t orow) {
    for (std::size_t e = 0; e < js.nnz(); ++e) {
      t.add(orow + js.i[e], os + js.j[e], js.v[e]);
      t.add(os + js.j[e], orow + js.i[e], js.v[e]);
    }
  };
  const auto dense_pair = [&](const DenseMatrix& jd, std::size_t orow) {
    for (std::size_t i = 0; i < jd.rows(); ++i)
      for (std::size_t j = 0; j < jd.cols(); ++j)
        if (jd(i, j) != 0.0) {
          t.add(orow + i, od + j, jd(i, j));
          t.add(od + j, orow + i, jd(i, j));
        }
  };
  sparse_pair(k.Jsg, og);
  sparse_pair(k.Jsh, oh);
  dense_pair(k.Jdg, og);
  dense_pair(k.Jdh, oh);
  if (k.delta_c != 0.0)
    for (std::size_t i = 0; i < d.m_E; ++i) t.add(og + i, og + i, -k.delta_c);
  for (std::size_t i = 0; i < d.m_I; ++i) t.add(oh + i, oh + i, -(1.0 / k.dh[i] + k.delta_c));
  return t;
}

inline Vector kkt4_rhs(const KktSystem4& k) {
  Vector r = k.r_xs;
  r.insert(r.end(), k.r_xd.begin(), k.r_xd.end());
  r.insert(r.end(), k.r_yg.begin(), k.r_yg.end());
  r.insert(r.end(), k.r_yh.begin(), k.r_yh.end());
  return r;
}

/// Dense symmetric (x_d, y_g, y_h) system left after eliminating dx_s.
struct CompressedKkt {
  DenseMatrix M;
  Vector rhs;
  std::size_t n_d = 0, m_E = 0, m_I = 0;

  std::size_t dim() const noexcept { return M.rows(); }
  std::size_t off_yg() const noexcept { return n_d; }
  std::size_t off_yh() const noexcept { return n_d + m_E; }
};

/**
 * Block elimination of dx_s:
 *
 *   [ Q_d   Jdg^T                        Jdh^T                              ]
 *   [ Jdg  -Jsg Q_s^-1 Jsg^T - dc*I     -Jsg Q_s^-1 Jsh^T                    ]
 *   [ Jdh  -Jsh Q_s^-1 Jsg^T            -Jsh Q_s^-1 Jsh^T - D_h^-1 - dc*I   ]
 *
 * rhs = (r_xd, r_yg - Jsg Q_s^-1 r_xs, r_yh - Jsh Q_s^-1 r_xs). Each sandwich
 * product is one fused pass of the kernel suite; M is stored with both triangles.
 */
inline CompressedKkt compress(const KktSystem4& k, const KernelSuite& la,
                              KernelTimers* timers = nullptr) {
  const auto d = k.dims();
  for (std::size_t i = 0; i < d.n_s; ++i)
    if (!(k.q_ss[i] > 0.0))
      throw CompressionError("sparse Hessian block not positive at " + std::to_string(i));

  CompressedKkt c;
  c.n_d = d.n_d;
  c.m_E = d.m_E;
  c.m_I = d.m_I;
  const std::size_t og = c.off_yg(), oh = c.off_yh(), n = d.compressed_dim();

  Vector qinv(d.n_s);
  for (std::size_t i = 0; i < d.n_s; ++i) qinv[i] = 1.0 / k.q_ss[i];

  c.M = DenseMatrix(n, n);
  {
    auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K3)
                    : std::nullopt;
    DenseMatrix& M = c.M;
    for (std::size_t i = 0; i < d.n_d; ++i) {
      const auto src = k.Qdd.row(i);
      std::copy(src.begin(), src.end(), M.row(i).begin());
    }
    for (std::size_t r = 0; r < d.m_E; ++r)
      for (std::size_t j = 0; j < d.n_d; ++j) M(og + r, j) = M(j, og + r) = k.Jdg(r, j);
    for (std::size_t r = 0; r < d.m_I; ++r)
      for (std::size_t j = 0; j < d.n_d; ++j) M(oh + r, j) = M(j, oh + r) = k.Jdh(r, j);

    la.fused_add_sdst(M, og, og, k.Jsg, qinv, k.Jsg, -1.0);
    la.fused_add_sdst(M, og, oh, k.Jsg, qinv, k.Jsh, -1.0);
    la.fused_add_sdst(M, oh, oh, k.Jsh, qinv, k.Jsh, -1.0);
    for (std::size_t r = 0; r < d.m_E; ++r)
      for (std::size_t q = 0; q < d.m_I; ++q) M(oh + q, og + r) = M(og + r, oh + q);
    for (std::size_t r = 0; r < d.m_E; ++r) M(og + r, og + r) -= k.delta_c;
    for (std::size_t r = 0; r < d.m_I; ++r) M(oh + r, oh + r) -= 1.0 / k.dh[r] + k.delta_c;
  }

  auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K2)
                  : std::nullopt;
  Vector scaled(d.n_s);
  for (std::size_t i = 0; i < d.n_s; ++i) scaled[i] = k.r_xs[i] * qinv[i];
  c.rhs.resize(n);
  std::copy(k.r_xd.begin(), k.r_xd.end(), c.rhs.begin());
  std::span<double> rg(c.rhs.data() + og, d.m_E), rh(c.rhs.data() + oh, d.m_I);
  std::copy(k.r_yg.begin(), k.r_yg.end(), rg.begin());
  std::copy(k.r_yh.begin(), k.r_yh.end(), rh.begin());
  la.triplet_times_vec(1.0, rg, -1.0, k.Jsg, scaled, false);
  la.triplet_times_vec(1.0, rh, -1.0, k.Jsh, scaled, false);
  return c;
}

/// dx_s = Q_s^{-1} (r_xs - Jsg^T dy_g - Jsh^T dy_h)
inline Vector recover_sparse_step(const KktSystem4& k, std::span<const double> dyg,
                                  std::span<const double> dyh, const KernelSuite& la) {
  const auto d = k.dims();
  detail::require_dims(dyg.size() == d.m_E && dyh.size() == d.m_I, "recover_sparse_step");
  Vector dxs = k.r_xs;
  la.triplet_times_vec(1.0, dxs, -1.0, k.Jsg, dyg, true);
  la.triplet_times_vec(1.0, dxs, -1.0, k.Jsh, dyh, true);
  for (std::size_t i = 0; i < d.n_s; ++i) dxs[i] /= k.q_ss[i];
  return dxs;
}

/// Search direction in every unknown of the barrier problem.
struct Direction {
  Vector dxd, dxs, ds, dyg, dyh;
  Vector dz_lo_d, dz_up_d, dz_lo_s, dz_up_s, dv_lo, dv_up;
};

/**
 * Recovers the eliminated components:
 *   ds     = D_h^{-1} (r_s + dy_h)
 *   dz_lo  = mu/(x - lo) - z_lo - z_lo/(x - lo) dx
 *   dz_up  = mu/(up - x) - z_up + z_up/(up - x) dx
 * (zero for infinite bounds), likewise for the slack multipliers.
 */
inline Direction complete_direction(const MdsNlpProblem& p, const IteratePoint& pt,
                                    const BarrierDiagonals& diag, const KktRhs& rhs, double mu,
                                    Vector dxs, Vector dxd, Vector dyg, Vector dyh) {
  Direction dir;
  dir.dxs = std::move(dxs);
  dir.dxd = std::move(dxd);
  dir.dyg = std::move(dyg);
  dir.dyh = std::move(dyh);
  dir.ds.resize(pt.s.size());
  for (std::size_t i = 0; i < dir.ds.size(); ++i) dir.ds[i] = (rhs.r_s[i] + dir.dyh[i]) / diag.dh[i];

  const auto bound_duals = [mu](std::span<const double> x, std::span<const double> dx,
                                const Vector& lo, const Vector& up, const Vector& zl,
                                const Vector& zu, Vector& dzl, Vector& dzu) {
    dzl.assign(x.size(), 0.0);
    dzu.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (finite_lower(lo[i])) {
        const double gap = x[i] - lo[i];
        dzl[i] = mu / gap - zl[i] - zl[i] / gap * dx[i];
      }
      if (finite_upper(up[i])) {
        const double gap = up[i] - x[i];
        dzu[i] = mu / gap - zu[i] + zu[i] / gap * dx[i];
      }
    }
  };
  bound_duals(pt.xd, dir.dxd, p.xd_lo(), p.xd_up(), pt.z_lo_d, pt.z_up_d, dir.dz_lo_d, dir.dz_up_d);
  bound_duals(pt.xs, dir.dxs, p.xs_lo(), p.xs_up(), pt.z_lo_s, pt.z_up_s, dir.dz_lo_s, dir.dz_up_s);
  bound_duals(pt.s, dir.ds, p.h_lo(), p.h_up(), pt.v_lo, pt.v_up, dir.dv_lo, dir.dv_up);
  return dir;
}

/// Raised when the regularization exceeds delta_w_max without reaching the required inertia.
class InertiaCorrectionError : public Error {
 public:
  using Error::Error;
};

struct RegularizationTrial {
  double delta_w = 0.0;
  double delta_c = 0.0;
  Inertia inertia;        // of the compressed matrix; empty if it was not factorized
  bool factorized = false;
};

struct CorrectedStep {
  Vector dxs, dxd, dyg, dyh;
  double delta_w = 0.0;
  double delta_c = 0.0;
  Inertia inertia;  // of the compressed matrix
  std::vector<RegularizationTrial> trials;
  KktSystem4 kkt4;       // accepted system
  CompressedKkt kkt3;    // accepted compressed system
};

/// Persistent regularization state across iterations.
struct RegularizationState {
  double delta_w_last = 0.0;
};

/// Inertia the compressed matrix must have: (n_d, 0, m).
inline Inertia required_compressed_inertia(const ProblemDims& d) { return {d.n_d, 0, d.m()}; }

/**
 * Factorizes the compressed system, shifting the Hessian blocks by
 * increasing delta_w (and the constraint blocks by delta_c when zero
 * eigenvalues appear) until its inertia is (n_d, 0, m). Because Q_s is a
 * positive diagonal whenever it is factorized, the full system then has
 * inertia (n, 0, m).
 *
 * Trial schedule: (0, 0); if singular or short of negative eigenvalues,
 * (0, delta_c); then delta_w starting at delta_w0 (or kappa_w_minus *
 * delta_w_last) growing by kappa_w_plus_first (or kappa_w_plus when a
 * previous shift exists). delta_c grows by kappa_w_plus whenever a trial is
 * still singular or short of negative eigenvalues.
 */
inline CorrectedStep solve_with_inertia_correction(const EvalBundle& b,
                                                   const BarrierDiagonals& diag,
                                                   const KktRhs& rhs, double mu,
                                                   const SolverOptions& opts,
                                                   RegularizationState& state,
                                                   const KernelSuite& la,
                                                   KernelTimers* timers = nullptr) {
  const ProblemDims dims{b.Qdd.rows(), b.qss.size(), b.g_val.size(), b.h_val.size()};
  const Inertia target = required_compressed_inertia(dims);
  CorrectedStep out;

  const auto attempt = [&](double dw, double dc) -> bool {
    RegularizationTrial trial{dw, dc, {}, false};
    if (!sparse_block_positive(b.qss, diag.d_xs, dw)) {
      out.trials.push_back(trial);
      return false;
    }
    KktSystem4 k4 = assemble_kkt4(b, diag, rhs, dw, dc);
    CompressedKkt k3 = compress(k4, la, timers);
    LdlFactors f;
    {
      auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K4)
                      : std::nullopt;
      f = bk_factorize(k3.M);
    }
    trial.inertia = f.inertia();
    trial.factorized = true;
    out.trials.push_back(trial);
    if (!(trial.inertia == target)) return false;

    Vector sol;
    {
      auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K4)
                      : std::nullopt;
      sol = f.solve(k3.rhs);
    }
    out.dxd.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(dims.n_d));
    out.dyg.assign(sol.begin() + static_cast<std::ptrdiff_t>(k3.off_yg()),
                   sol.begin() + static_cast<std::ptrdiff_t>(k3.off_yh()));
    out.dyh.assign(sol.begin() + static_cast<std::ptrdiff_t>(k3.off_yh()), sol.end());
    {
      auto t = timers ? std::optional<KernelTimers::Scope>(std::in_place, *timers, KernelClass::K2)
                      : std::nullopt;
      out.dxs = recover_sparse_step(k4, out.dyg, out.dyh, la);
    }
    out.delta_w = dw;
    out.delta_c = dc;
    out.inertia = trial.inertia;
    out.kkt4 = std::move(k4);
    out.kkt3 = std::move(k3);
    return true;
  };

  if (attempt(0.0, 0.0)) return out;
  // A zero eigenvalue or a missing negative one points at dependent constraint rows.
  const auto constraint_deficient = [&](const RegularizationTrial& t) {
    return t.factorized && (t.inertia.zero > 0 || t.inertia.neg < target.neg);
  };
  const double dc0 = opts.delta_c_bar * std::pow(mu, opts.kappa_c);
  double dc = 0.0;
  if (constraint_deficient(out.trials.back())) {
    dc = dc0;
    if (attempt(0.0, dc)) return out;
  }

  double dw = state.delta_w_last == 0.0
                  ? opts.delta_w0
                  : std::max(opts.delta_w_min, opts.kappa_w_minus * state.delta_w_last);
  while (true) {
    if (attempt(dw, dc)) {
      state.delta_w_last = dw;
      return out;
    }
    if (constraint_deficient(out.trials.back())) dc = dc == 0.0 ? dc0 : dc * opts.kappa_w_plus;
    dw *= state.delta_w_last == 0.0 ? opts.kappa_w_plus_first : opts.kappa_w_plus;
    if (dw > opts.delta_w_max)
      throw InertiaCorrectionError("inertia correction failed: delta_w exceeded " +
                                   std::to_string(opts.delta_w_max));
  }
}

}  // namespace mdsipm
