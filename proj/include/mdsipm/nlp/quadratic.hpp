#pragma once

#include <string>
#include <utility>

#include "mdsipm/linalg/kernels.hpp"
#include "mdsipm/nlp/problem.hpp"

namespace mdsipm {

/// Data of a separable-in-blocks QP with linear constraints.
struct QuadraticData {
  ProblemDims dims;
  DenseMatrix H;   // n_d x n_d, symmetric
  Vector c_d;      // n_d
  Vector q;        // n_s, >= 0: diagonal of the sparse Hessian
  Vector c_s;      // n_s
  double constant = 0.0;
  DenseMatrix Jdg;  // m_E x n_d
  TripletMatrix Jsg;
  DenseMatrix Jdh;  // m_I x n_d
  TripletMatrix Jsh;
  Vector g_E, h_lo, h_up, xd_lo, xd_up, xs_lo, xs_up;
  Vector xd0, xs0;  // optional starting point; empty means zero
};

/**
 *   f(x) = 1/2 xd^T H xd + c_d^T xd + 1/2 sum_i q_i xs_i^2 + c_s^T xs + constant
 *   g(x) = Jdg xd + Jsg xs,   h(x) = Jdh xd + Jsh xs
 */
class QuadraticMdsProblem : public MdsNlpProblem {
 public:
  QuadraticMdsProblem(std::string name, QuadraticData data)
      : name_(std::move(name)), q_(std::move(data)) {
    const auto& d = q_.dims;
    resize_data(d);
    const auto take = [](Vector& dst, Vector& src, std::size_t n) {
      if (!src.empty()) {
        detail::require_dims(src.size() == n, "quadratic problem vector");
        dst = std::move(src);
      }
    };
    take(g_E_, q_.g_E, d.m_E);
    take(h_lo_, q_.h_lo, d.m_I);
    take(h_up_, q_.h_up, d.m_I);
    take(xd_lo_, q_.xd_lo, d.n_d);
    take(xd_up_, q_.xd_up, d.n_d);
    take(xs_lo_, q_.xs_lo, d.n_s);
    take(xs_up_, q_.xs_up, d.n_s);
    detail::require_dims(q_.H.rows() == d.n_d && q_.H.cols() == d.n_d, "H");
    detail::require_dims(q_.c_d.size() == d.n_d && q_.c_s.size() == d.n_s, "linear terms");
    detail::require_dims(q_.q.size() == d.n_s, "sparse Hessian diagonal");
    detail::require_dims(q_.Jdg.rows() == d.m_E && q_.Jdg.cols() == d.n_d, "Jdg");
    detail::require_dims(q_.Jdh.rows() == d.m_I && q_.Jdh.cols() == d.n_d, "Jdh");
    detail::require_dims(q_.Jsg.rows == d.m_E && q_.Jsg.cols == d.n_s, "Jsg");
    detail::require_dims(q_.Jsh.rows == d.m_I && q_.Jsh.cols == d.n_s, "Jsh");
    q_.Jsg.check();
    q_.Jsh.check();
  }

  std::string name() const override { return name_; }
  const QuadraticData& data() const noexcept { return q_; }

  double objective(std::span<const double> xd, std::span<const double> xs) const override {
    const auto& la = default_kernels();
    Vector hx(xd.size());
    la.gemv(0.0, hx, 1.0, q_.H, xd, false);
    double f = q_.constant + 0.5 * la.dot(xd, hx) + la.dot(q_.c_d, xd) + la.dot(q_.c_s, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) f += 0.5 * q_.q[i] * xs[i] * xs[i];
    return f;
  }

  void gradient(std::span<const double> xd, std::span<const double> xs, std::span<double> gd,
                std::span<double> gs) const override {
    std::copy(q_.c_d.begin(), q_.c_d.end(), gd.begin());
    default_kernels().gemv(1.0, gd, 1.0, q_.H, xd, false);
    for (std::size_t i = 0; i < xs.size(); ++i) gs[i] = q_.q[i] * xs[i] + q_.c_s[i];
  }

  void equalities(std::span<const double> xd, std::span<const double> xs,
                  std::span<double> g) const override {
    apply(q_.Jdg, q_.Jsg, xd, xs, g);
  }

  void inequalities(std::span<const double> xd, std::span<const double> xs,
                    std::span<double> h) const override {
    apply(q_.Jdh, q_.Jsh, xd, xs, h);
  }

  void jacobian_eq(std::span<const double>, std::span<const double>, DenseMatrix& jd,
                   TripletMatrix& js) const override {
    jd = q_.Jdg;
    js = q_.Jsg;
  }

  void jacobian_ineq(std::span<const double>, std::span<const double>, DenseMatrix& jd,
                     TripletMatrix& js) const override {
    jd = q_.Jdh;
    js = q_.Jsh;
  }

  // Constraints are linear, so the multipliers do not enter the Hessian.
  void hessian(std::span<const double>, std::span<const double>, std::span<const double>,
               std::span<const double>, DenseMatrix& qdd, std::span<double> qss) const override {
    qdd = q_.H;
    std::copy(q_.q.begin(), q_.q.end(), qss.begin());
  }

  void starting_point(std::span<double> xd, std::span<double> xs) const override {
    MdsNlpProblem::starting_point(xd, xs);
    if (!q_.xd0.empty()) std::copy(q_.xd0.begin(), q_.xd0.end(), xd.begin());
    if (!q_.xs0.empty()) std::copy(q_.xs0.begin(), q_.xs0.end(), xs.begin());
  }

 private:
  static void apply(const DenseMatrix& jd, const TripletMatrix& js, std::span<const double> xd,
                    std::span<const double> xs, std::span<double> out) {
    const auto& la = default_kernels();
    la.triplet_times_vec(0.0, out, 1.0, js, xs, false);
    la.gemv(1.0, out, 1.0, jd, xd, false);
  }

  std::string name_;
  QuadraticData q_;
};

}  // namespace mdsipm
