#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdsipm/errors.hpp"
#include "mdsipm/linalg/matrix.hpp"

namespace mdsipm {

struct ProblemDims {
  std::size_t n_d = 0;  // dense variables
  std::size_t n_s = 0;  // sparse variables
  std::size_t m_E = 0;  // equalities
  std::size_t m_I = 0;  // inequalities

  std::size_t n() const noexcept { return n_d + n_s; }
  std::size_t m() const noexcept { return m_E + m_I; }
  /// Dimension of the compressed (x_d, y_g, y_h) system.
  std::size_t compressed_dim() const noexcept { return n_d + m_E + m_I; }
  /// Dimension of the full (x_s, x_d, y_g, y_h) system.
  std::size_t full_dim() const noexcept { return n_s + compressed_dim(); }

  bool operator==(const ProblemDims&) const = default;
};

/**
 * Mixed dense-sparse nonlinear program
 *
 *   min f(x_d, x_s)  s.t.  g(x) = g_E,  h_lo <= h(x) <= h_up,  box bounds on x_d, x_s.
 *
 * The structure is fixed by the interface: there are no cross-term Hessian
 * blocks between x_d and x_s, and the sparse-sparse block of the Lagrangian
 * Hessian is a nonnegative diagonal. Infinite bounds use +-kInfBound.
 *
 * Derived classes fill the bound vectors in their constructor and implement
 * the evaluators; evaluators must be deterministic and side-effect free.
 */
class MdsNlpProblem {
 public:
  virtual ~MdsNlpProblem() = default;

  virtual std::string name() const = 0;

  const ProblemDims& dims() const noexcept { return dims_; }
  const Vector& g_E() const noexcept { return g_E_; }
  const Vector& h_lo() const noexcept { return h_lo_; }
  const Vector& h_up() const noexcept { return h_up_; }
  const Vector& xd_lo() const noexcept { return xd_lo_; }
  const Vector& xd_up() const noexcept { return xd_up_; }
  const Vector& xs_lo() const noexcept { return xs_lo_; }
  const Vector& xs_up() const noexcept { return xs_up_; }

  virtual double objective(std::span<const double> xd, std::span<const double> xs) const = 0;
  virtual void gradient(std::span<const double> xd, std::span<const double> xs,
                        std::span<double> grad_d, std::span<double> grad_s) const = 0;
  virtual void equalities(std::span<const double> xd, std::span<const double> xs,
                          std::span<double> g) const = 0;
  virtual void inequalities(std::span<const double> xd, std::span<const double> xs,
                            std::span<double> h) const = 0;

  /// Jacobian of g split into its dense (m_E x n_d) and sparse (m_E x n_s) blocks.
  virtual void jacobian_eq(std::span<const double> xd, std::span<const double> xs,
                           DenseMatrix& jd, TripletMatrix& js) const = 0;
  virtual void jacobian_ineq(std::span<const double> xd, std::span<const double> xs,
                             DenseMatrix& jd, TripletMatrix& js) const = 0;

  /**
   * Lagrangian Hessian blocks for
   *   L = f + y_g^T g + y_h^T h,
   * the dense block qdd (n_d x n_d, symmetric) and the diagonal of the sparse
   * block qss (n_s, nonnegative).
   */
  virtual void hessian(std::span<const double> xd, std::span<const double> xs,
                       std::span<const double> yg, std::span<const double> yh, DenseMatrix& qdd,
                       std::span<double> qss) const = 0;

  /// Initial guess before it is pushed into the interior. Zero by default.
  virtual void starting_point(std::span<double> xd, std::span<double> xs) const {
    std::fill(xd.begin(), xd.end(), 0.0);
    std::fill(xs.begin(), xs.end(), 0.0);
  }

 protected:
  void resize_data(ProblemDims d) {
    dims_ = d;
    g_E_.assign(d.m_E, 0.0);
    h_lo_.assign(d.m_I, -kInfBound);
    h_up_.assign(d.m_I, kInfBound);
    xd_lo_.assign(d.n_d, -kInfBound);
    xd_up_.assign(d.n_d, kInfBound);
    xs_lo_.assign(d.n_s, -kInfBound);
    xs_up_.assign(d.n_s, kInfBound);
  }

  ProblemDims dims_;
  Vector g_E_, h_lo_, h_up_;
  Vector xd_lo_, xd_up_, xs_lo_, xs_up_;
};

/// Every model quantity at one primal-dual point.
struct EvalBundle {
  double f = 0.0;
  Vector grad_d, grad_s;
  Vector g_val, h_val;
  DenseMatrix Jdg, Jdh;
  TripletMatrix Jsg, Jsh;
  DenseMatrix Qdd;
  Vector qss;
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* component) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw EvalError(component, std::string("evaluator produced a non-finite value in ") +
                                     component + "[" + std::to_string(i) + "]");
  }
}

}  // namespace detail

inline EvalBundle eval_all(const MdsNlpProblem& p, std::span<const double> xd,
                           std::span<const double> xs, std::span<const double> yg,
                           std::span<const double> yh) {
  const auto& d = p.dims();
  detail::require_dims(xd.size() == d.n_d && xs.size() == d.n_s, "eval_all primal");
  detail::require_dims(yg.size() == d.m_E && yh.size() == d.m_I, "eval_all duals");

  EvalBundle b;
  b.f = p.objective(xd, xs);
  if (!std::isfinite(b.f)) throw EvalError("f", "objective is not finite");
  b.grad_d.assign(d.n_d, 0.0);
  b.grad_s.assign(d.n_s, 0.0);
  p.gradient(xd, xs, b.grad_d, b.grad_s);
  detail::require_finite(b.grad_d, "grad_d");
  detail::require_finite(b.grad_s, "grad_s");

  b.g_val.assign(d.m_E, 0.0);
  b.h_val.assign(d.m_I, 0.0);
  p.equalities(xd, xs, b.g_val);
  p.inequalities(xd, xs, b.h_val);
  detail::require_finite(b.g_val, "g");
  detail::require_finite(b.h_val, "h");

  b.Jdg = DenseMatrix(d.m_E, d.n_d);
  b.Jsg = TripletMatrix(d.m_E, d.n_s);
  b.Jdh = DenseMatrix(d.m_I, d.n_d);
  b.Jsh = TripletMatrix(d.m_I, d.n_s);
  p.jacobian_eq(xd, xs, b.Jdg, b.Jsg);
  p.jacobian_ineq(xd, xs, b.Jdh, b.Jsh);
  detail::require_dims(b.Jdg.rows() == d.m_E && b.Jdg.cols() == d.n_d, "Jdg shape");
  detail::require_dims(b.Jdh.rows() == d.m_I && b.Jdh.cols() == d.n_d, "Jdh shape");
  detail::require_dims(b.Jsg.rows == d.m_E && b.Jsg.cols == d.n_s, "Jsg shape");
  detail::require_dims(b.Jsh.rows == d.m_I && b.Jsh.cols == d.n_s, "Jsh shape");
  b.Jsg.check();
  b.Jsh.check();
  detail::require_finite(b.Jdg.data(), "Jdg");
  detail::require_finite(b.Jdh.data(), "Jdh");
  detail::require_finite(b.Jsg.v, "Jsg");
  detail::require_finite(b.Jsh.v, "Jsh");

  b.Qdd = DenseMatrix(d.n_d, d.n_d);
  b.qss.assign(d.n_s, 0.0);
  p.hessian(xd, xs, yg, yh, b.Qdd, b.qss);
  detail::require_finite(b.Qdd.data(), "Qdd");
  detail::require_finite(b.qss, "qss");
  return b;
}

/**
 * Structural checks on a problem. Returns one message per violation; an
 * empty list means the problem is well formed.
 */
inline std::vector<std::string> validate_problem(const MdsNlpProblem& p) {
  std::vector<std::string> out;
  const auto& d = p.dims();
  const auto sized = [&](const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n) out.push_back(std::string(what) + " has wrong length");
    return v.size() == n;
  };
  if (sized(p.g_E(), d.m_E, "g_E")) {
    for (std::size_t i = 0; i < d.m_E; ++i)
      if (!std::isfinite(p.g_E()[i])) out.push_back("g_E[" + std::to_string(i) + "] is not finite");
  }
  if (sized(p.h_lo(), d.m_I, "h_lo") && sized(p.h_up(), d.m_I, "h_up")) {
    for (std::size_t i = 0; i < d.m_I; ++i) {
      const double lo = p.h_lo()[i], up = p.h_up()[i];
      if (std::isnan(lo) || std::isnan(up) || !(lo < up))
        out.push_back("h bounds not strictly ordered at inequality " + std::to_string(i));
      if (!finite_lower(lo) && !finite_upper(up))
        out.push_back("no finite bound on inequality " + std::to_string(i));
    }
  }
  const auto check_box = [&](const Vector& lo, const Vector& up, std::size_t n, const char* tag) {
    if (!sized(lo, n, tag) || !sized(up, n, tag)) return;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(lo[i]) || std::isnan(up[i]) || !(lo[i] < up[i]))
        out.push_back(std::string(tag) + " bounds not strictly ordered at variable " +
                      std::to_string(i));
    }
  };
  check_box(p.xd_lo(), p.xd_up(), d.n_d, "x_d");
  check_box(p.xs_lo(), p.xs_up(), d.n_s, "x_s");
  if (!out.empty()) return out;

  // Sample the Hessian at the starting point with zero multipliers.
  Vector xd(d.n_d), xs(d.n_s), yg(d.m_E, 0.0), yh(d.m_I, 0.0);
  p.starting_point(xd, xs);
  try {
    const EvalBundle b = eval_all(p, xd, xs, yg, yh);
    for (std::size_t i = 0; i < d.n_s; ++i)
      if (b.qss[i] < 0.0) out.push_back("sparse Hessian diagonal negative at " + std::to_string(i));
    for (std::size_t i = 0; i < d.n_d; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double a = b.Qdd(i, j), c = b.Qdd(j, i);
        if (std::abs(a - c) > 1e-12 * std::max({1.0, std::abs(a), std::abs(c)}))
          out.push_back("dense Hessian not symmetric at (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
      }
  } catch (const Error& e) {
    out.push_back(std::string("evaluation failed at the starting point: ") + e.what());
  }
  return out;
}

}  // namespace mdsipm
