#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdsipm/errors.hpp"
#include "mdsipm/linalg/matrix.hpp"

namespace mdsipm {

/// Counts of positive, zero and negative eigenvalues.
struct Inertia {
  std::size_t pos = 0;
  std::size_t zero = 0;
  std::size_t neg = 0;

  std::size_t size() const noexcept { return pos + zero + neg; }
  bool operator==(const Inertia&) const = default;

  Inertia& operator+=(const Inertia& o) {
    pos += o.pos;
    zero += o.zero;
    neg += o.neg;
    return *this;
  }
  friend Inertia operator+(Inertia a, const Inertia& b) { return a += b; }
};

inline std::string to_string(const Inertia& in) {
  return "(" + std::to_string(in.pos) + "," + std::to_string(in.zero) + "," +
         std::to_string(in.neg) + ")";
}

/// One diagonal block of D: a 1x1 pivot (a) or a 2x2 pivot [[a, b], [b, c]].
struct PivotBlock {
  std::size_t start = 0;
  std::size_t size = 1;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double det() const { return a * c - b * b; }
};

/**
 * Factors of A = P L D L^T P^T.
 *
 * perm[i] is the row of A that ends up in position i, so that
 * (P^T A P)(i,j) = A(perm[i], perm[j]) = (L D L^T)(i,j).
 */
struct LdlFactors {
  std::size_t n = 0;
  std::vector<std::size_t> perm;
  DenseMatrix L;  // unit lower triangular
  std::vector<PivotBlock> blocks;
  double norm_a = 0.0;     // ||A||_inf of the factorized matrix
  double zero_tol = 0.0;   // n * eps * ||A||_inf
  std::size_t flagged_blocks = 0;  // 2x2 pivots without a negative determinant

  bool is_zero_pivot(const PivotBlock& blk) const {
    return blk.size == 1 && std::abs(blk.a) <= zero_tol;
  }

  Inertia inertia() const {
    Inertia in;
    for (const auto& blk : blocks) {
      if (blk.size == 1) {
        if (std::abs(blk.a) <= zero_tol) ++in.zero;
        else if (blk.a > 0.0) ++in.pos;
        else ++in.neg;
      } else if (blk.det() < 0.0) {
        ++in.pos;
        ++in.neg;
      } else {
        // Not produced by the pivoting rule in exact arithmetic; fall back to
        // the block's own eigenvalue signs.
        const double tr = blk.a + blk.c;
        if (std::abs(blk.det()) <= zero_tol * zero_tol) {
          ++in.zero;
          if (std::abs(tr) <= zero_tol) ++in.zero;
          else if (tr > 0.0) ++in.pos;
          else ++in.neg;
        } else if (tr > 0.0) {
          in.pos += 2;
        } else {
          in.neg += 2;
        }
      }
    }
    return in;
  }

  /// Block diagonal D as a dense matrix.
  DenseMatrix d_matrix() const {
    DenseMatrix d(n, n);
    for (const auto& blk : blocks) {
      d(blk.start, blk.start) = blk.a;
      if (blk.size == 2) {
        d(blk.start + 1, blk.start) = blk.b;
        d(blk.start, blk.start + 1) = blk.b;
        d(blk.start + 1, blk.start + 1) = blk.c;
      }
    }
    return d;
  }

  /// Solves A x = b. Throws SingularError on a zero 1x1 pivot.
  Vector solve(std::span<const double> b) const {
    detail::require_dims(b.size() == n, "ldl solve rhs");
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = b[perm[i]];
    // L w' = w
    for (std::size_t i = 1; i < n; ++i) {
      const auto row = L.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < i; ++j) s += row[j] * w[j];
      w[i] -= s;
    }
    for (const auto& blk : blocks) {
      const std::size_t k = blk.start;
      if (blk.size == 1) {
        if (is_zero_pivot(blk))
          throw SingularError("zero pivot at position " + std::to_string(k));
        w[k] /= blk.a;
      } else {
        const double det = blk.det();
        if (det == 0.0) throw SingularError("singular 2x2 pivot at position " + std::to_string(k));
        const double w0 = w[k], w1 = w[k + 1];
        w[k] = (blk.c * w0 - blk.b * w1) / det;
        w[k + 1] = (blk.a * w1 - blk.b * w0) / det;
      }
    }
    // L^T z = w, sweeping rows of L from the bottom.
    for (std::size_t i = n; i-- > 0;) {
      const double zi = w[i];
      const auto row = L.row(i);
      for (std::size_t j = 0; j < i; ++j) w[j] -= row[j] * zi;
    }
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm[i]] = w[i];
    return x;
  }
};

namespace detail {

// Symmetric interchange of indices p < q in the lower triangle of w, for the
// trailing matrix starting at column k. Row prefixes left of p (previous L
// columns and the pivot column) move with the rows.
inline void symmetric_swap(DenseMatrix& w, std::size_t p, std::size_t q) {
  const std::size_t n = w.rows();
  std::swap(w(p, p), w(q, q));
  {
    auto rp = w.row(p), rq = w.row(q);
    for (std::size_t j = 0; j < p; ++j) std::swap(rp[j], rq[j]);
  }
  for (std::size_t j = p + 1; j < q; ++j) std::swap(w(j, p), w(q, j));
  for (std::size_t i = q + 1; i < n; ++i) std::swap(w(i, p), w(i, q));
}

}  // namespace detail

/// Pivot growth constant (1+sqrt(17))/8 of the Bunch-Kaufman rule.
inline const double kBunchKaufmanAlpha = (1.0 + std::sqrt(17.0)) / 8.0;

/**
 * Unblocked Bunch-Kaufman LDL^T with 1x1 and 2x2 pivots. Only the lower
 * triangle of `a` is read.
 */
inline LdlFactors bk_factorize(const DenseMatrix& a) {
  if (a.rows() != a.cols())
    throw DimensionError("bk_factorize needs a square matrix, got " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()));
  const std::size_t n = a.rows();
  const double alpha = kBunchKaufmanAlpha;

  LdlFactors f;
  f.n = n;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});

  DenseMatrix w(n, n);
  {
    std::vector<double> rowsum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = a.row(i);
      auto dst = w.row(i);
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = src[j];
        if (!std::isfinite(v))
          throw NumericError("non-finite entry at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
        dst[j] = v;
        rowsum[i] += std::abs(v);
        if (j != i) rowsum[j] += std::abs(v);
      }
    }
    for (double s : rowsum) f.norm_a = std::max(f.norm_a, s);
  }
  f.zero_tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * f.norm_a;

  std::vector<double> c1(n), c2(n);
  std::size_t k = 0;
  while (k < n) {
    const double absakk = std::abs(w(k, k));
    std::size_t imax = k;
    double colmax = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(w(i, k));
      if (v > colmax) {
        colmax = v;
        imax = i;
      }
    }

    std::size_t kp = k;
    std::size_t size = 1;
    if (std::max(absakk, colmax) == 0.0) {
      // Column is already zero: record a zero pivot, nothing to eliminate.
      f.blocks.push_back({k, 1, 0.0, 0.0, 0.0});
      ++k;
      continue;
    }
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      {
        const auto r = w.row(imax);
        for (std::size_t j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(r[j]));
      }
      for (std::size_t i = imax + 1; i < n; ++i) rowmax = std::max(rowmax, std::abs(w(i, imax)));

      if (absakk >= alpha * colmax * (colmax / rowmax)) {
        kp = k;
      } else if (std::abs(w(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        size = 2;
      }
    }

    const std::size_t kk = k + size - 1;
    if (kp != kk) {
      detail::symmetric_swap(w, kk, kp);
      std::swap(f.perm[kk], f.perm[kp]);
    }

    if (size == 1) {
      const double d = w(k, k);
      for (std::size_t i = k + 1; i < n; ++i) c1[i] = w(i, k);
      const double inv = 1.0 / d;
      for (std::size_t i = k + 1; i < n; ++i) {
        const double li = c1[i] * inv;
        auto row = w.row(i);
        double* __restrict r = row.data();
        const double* __restrict c = c1.data();
        for (std::size_t j = k + 1; j <= i; ++j) r[j] -= li * c[j];
        w(i, k) = li;
      }
      f.blocks.push_back({k, 1, d, 0.0, 0.0});
    } else {
      const double d11 = w(k, k), d21 = w(k + 1, k), d22 = w(k + 1, k + 1);
      const double det = d11 * d22 - d21 * d21;
      if (!(det < 0.0)) ++f.flagged_blocks;
      for (std::size_t i = k + 2; i < n; ++i) {
        c1[i] = w(i, k);
        c2[i] = w(i, k + 1);
      }
      for (std::size_t i = k + 2; i < n; ++i) {
        const double l1 = (c1[i] * d22 - c2[i] * d21) / det;
        const double l2 = (c2[i] * d11 - c1[i] * d21) / det;
        auto row = w.row(i);
        double* __restrict r = row.data();
        const double* __restrict p1 = c1.data();
        const double* __restrict p2 = c2.data();
        for (std::size_t j = k + 2; j <= i; ++j) r[j] -= l1 * p1[j] + l2 * p2[j];
        w(i, k) = l1;
        w(i, k + 1) = l2;
      }
      f.blocks.push_back({k, 2, d11, d21, d22});
    }
    k += size;
  }

  // Turn the workspace into an explicit unit lower triangular L.
  for (std::size_t i = 0; i < n; ++i) {
    auto row = w.row(i);
    row[i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) row[j] = 0.0;
  }
  for (const auto& blk : f.blocks)
    if (blk.size == 2) w(blk.start + 1, blk.start) = 0.0;
  f.L = std::move(w);
  return f;
}

inline Vector ldl_solve(const LdlFactors& f, std::span<const double> b) { return f.solve(b); }
inline Inertia ldl_inertia(const LdlFactors& f) { return f.inertia(); }

}  // namespace mdsipm
