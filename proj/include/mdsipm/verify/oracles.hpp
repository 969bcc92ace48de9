#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <utility>

#include "mdsipm/errors.hpp"
#include "mdsipm/ipm/kkt.hpp"
#include "mdsipm/ldl/bunch_kaufman.hpp"
#include "mdsipm/linalg/matrix.hpp"

namespace mdsipm::oracle {

/// Gaussian elimination with partial pivoting on a copy of a.
inline Vector dense_solve(DenseMatrix a, Vector b) {
  const std::size_t n = a.rows();
  detail::require_dims(a.cols() == n && b.size() == n, "dense_solve");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) throw SingularError("dense_solve: singular matrix");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      if (l == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= l * a(k, j);
      b[i] -= l * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * b[j];
    b[k] = s / a(k, k);
  }
  return b;
}

/// Householder reduction of a symmetric matrix to tridiagonal form (diag, offdiag).
inline std::pair<Vector, Vector> tridiagonalize(DenseMatrix a) {
  const std::size_t n = a.rows();
  detail::require_dims(a.cols() == n, "tridiagonalize");
  Vector v(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0.0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    // A <- H A H with H = I - 2 v v^T / (v^T v)
    for (std::size_t i = k; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      w[i] = 2.0 * s / vv;
    }
    double vw = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vw += v[i] * w[i];
    const double c = vw / vv;
    for (std::size_t i = k; i < n; ++i) w[i] -= c * (i > k ? v[i] : 0.0);
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j) a(i, j) -= v[i] * w[j] + w[i] * v[j];
    a(k + 1, k) = a(k, k + 1) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = a(k, i) = 0.0;
  }
  Vector d(n), e(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a(i + 1, i);
  return {d, e};
}

/// Number of eigenvalues of the tridiagonal matrix strictly less than x.
inline std::size_t sturm_count(const Vector& d, const Vector& e, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i > 0 ? e[i - 1] * e[i - 1] : 0.0;
    q = d[i] - x - (i > 0 ? off / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

struct SpectrumSigns {
  Inertia inertia;        // eigenvalues in [-zero_tol, zero_tol] count as zero
  bool gap_ok = true;     // no eigenvalue inside (zero_tol, gap_tol] in magnitude
};

/**
 * Eigenvalue sign counts of a symmetric matrix by tridiagonalization and
 * Sturm sequences. gap_ok reports whether every nonzero eigenvalue exceeds
 * gap_tol in magnitude, so the counts are unambiguous.
 */
inline SpectrumSigns eigen_signs(const DenseMatrix& a, double zero_tol, double gap_tol) {
  const auto [d, e] = tridiagonalize(a);
  const std::size_t n = d.size();
  const std::size_t below = sturm_count(d, e, -zero_tol);
  const std::size_t up_to = n - sturm_count(d, e, zero_tol);  // eigenvalues >= zero_tol
  SpectrumSigns s;
  s.inertia.neg = below;
  s.inertia.pos = up_to;
  s.inertia.zero = n - below - up_to;
  if (gap_tol > zero_tol) {
    const std::size_t in_band = sturm_count(d, e, gap_tol) - sturm_count(d, e, -gap_tol);
    s.gap_ok = in_band == s.inertia.zero;
  }
  return s;
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// A * B as dense matrices.
inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require_dims(a.cols() == b.rows(), "multiply");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

/// P L D L^T P^T assembled explicitly from the factors.
inline DenseMatrix reconstruct(const LdlFactors& f) {
  const DenseMatrix ld = multiply(f.L, f.d_matrix());
  const DenseMatrix inner = multiply(ld, transpose(f.L));
  DenseMatrix a(f.n, f.n);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) a(f.perm[i], f.perm[j]) = inner(i, j);
  return a;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

/// |A - B|_inf (maximum absolute row sum of the difference).
inline double residual_norm_inf(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j) - b(i, j));
    m = std::max(m, row);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Random instances

struct KktCaps {
  std::size_t n_d = 20, n_s = 20, m_E = 3, m_I = 10;
};

inline TripletMatrix random_triplets(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                     double density) {
  TripletMatrix t(rows, cols);
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (coin(rng) < density) t.add(i, j, u(rng));
  return t;
}

inline DenseMatrix random_dense(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix a(rows, cols);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = u(rng);
  return a;
}

/**
 * Random regularized 4x4 KKT system: q_ss > 0, dh > 0, symmetric Qdd that may
 * be indefinite, random sparse and dense Jacobian blocks and random residuals.
 */
inline KktSystem4 random_kkt4(std::mt19937_64& rng, const KktCaps& caps) {
  std::uniform_int_distribution<std::size_t> nd(1, std::max<std::size_t>(1, caps.n_d)),
      ns(1, std::max<std::size_t>(1, caps.n_s)), me(0, caps.m_E), mi(0, caps.m_I);
  std::uniform_real_distribution<double> pos(0.1, 10.0), u(-1.0, 1.0), c(0.0, 1.0);
  KktSystem4 k;
  const std::size_t n_d = nd(rng), n_s = ns(rng), m_E = std::min(me(rng), n_d + n_s),
                    m_I = mi(rng);
  k.q_ss.resize(n_s);
  for (auto& v : k.q_ss) v = pos(rng);
  k.Qdd = DenseMatrix(n_d, n_d);
  for (std::size_t i = 0; i < n_d; ++i)
    for (std::size_t j = 0; j <= i; ++j) k.Qdd(i, j) = k.Qdd(j, i) = u(rng);
  for (std::size_t i = 0; i < n_d; ++i) k.Qdd(i, i) += 2.0 * c(rng);
  const double density = std::min(1.0, 3.0 / static_cast<double>(n_s));
  k.Jsg = random_triplets(rng, m_E, n_s, density);
  k.Jsh = random_triplets(rng, m_I, n_s, density);
  k.Jdg = random_dense(rng, m_E, n_d);
  k.Jdh = random_dense(rng, m_I, n_d);
  k.dh.resize(m_I);
  for (auto& v : k.dh) v = pos(rng);
  k.delta_w = c(rng) < 0.5 ? 0.0 : c(rng);
  k.delta_c = c(rng) < 0.5 ? 0.0 : 1e-3 * c(rng);
  for (std::size_t i = 0; i < n_s; ++i) k.q_ss[i] += k.delta_w;
  for (std::size_t i = 0; i < n_d; ++i) k.Qdd(i, i) += k.delta_w;
  const auto fill = [&](std::size_t n) {
    Vector r(n);
    for (auto& v : r) v = 10.0 * u(rng);
    return r;
  };
  k.r_xs = fill(n_s);
  k.r_xd = fill(n_d);
  k.r_yg = fill(m_E);
  k.r_yh = fill(m_I);
  return k;
}

/// Random symmetric matrix of a randomly chosen structure (dense, saddle point, banded, graded).
inline DenseMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(n, n);
  const int kind = std::uniform_int_distribution<int>(0, n >= 2 ? 3 : 0)(rng);
  if (kind == 1 && n >= 2) {
    // [H J^T; J 0] with a zero trailing block
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, n / 2)(rng);
    const std::size_t h = n - m;
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
    for (std::size_t i = h; i < n; ++i)
      for (std::size_t j = 0; j < h; ++j) a(i, j) = a(j, i) = u(rng);
    return a;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = u(rng);
      if (kind == 2 && i - j > 3) v = 0.0;
      if (kind == 3) v *= std::pow(10.0, 3.0 * u(rng));
      a(i, j) = a(j, i) = v;
    }
  if (kind == 2)
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 0.0;  // zero diagonal forces 2x2 pivots
  return a;
}

}  // namespace mdsipm::oracle
