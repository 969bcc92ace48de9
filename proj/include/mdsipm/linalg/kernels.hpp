#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdsipm/errors.hpp"
#include "mdsipm/linalg/matrix.hpp"

namespace mdsipm {

enum class Reduction { InfNorm, OneNorm, TwoNorm, Min, Max };

/**
 * Kernel classes K1-K3: dense vector operations, mixed sparse/dense
 * matrix-vector products and the fused M += A*diag(d)*B^T update used to
 * compress the KKT system.
 *
 * Every matrix-vector style kernel follows the BLAS convention
 * y <- beta*y + alpha*op(A)*x, and beta == 0 discards the old content of y.
 * Implementations are stateless; one instance may be shared across threads.
 */
class KernelSuite {
 public:
  virtual ~KernelSuite() = default;

  virtual std::string_view name() const = 0;

  /// y <- y + alpha*x
  virtual void axpy(double alpha, std::span<const double> x, std::span<double> y) const = 0;
  virtual double dot(std::span<const double> x, std::span<const double> y) const = 0;
  virtual double reduce(std::span<const double> x, Reduction kind) const = 0;

  /**
   * Largest alpha in (0,1] keeping x + alpha*dx at least a tau-fraction of its
   * current distance away from every finite bound:
   *   alpha = min(1, min_i tau*gap_i/|dx_i|)
   * over the components moving toward a finite bound.
   */
  virtual double max_step_to_bound(std::span<const double> x, std::span<const double> dx,
                                   std::span<const double> lo, std::span<const double> up,
                                   double tau) const = 0;

  virtual void gemv(double beta, std::span<double> y, double alpha, const DenseMatrix& a,
                    std::span<const double> x, bool transpose) const = 0;

  /// Y <- beta*Y + alpha*A*X
  virtual void gemm(double beta, DenseMatrix& y, double alpha, const DenseMatrix& a,
                    const DenseMatrix& x) const = 0;

  virtual void triplet_times_vec(double beta, std::span<double> y, double alpha,
                                 const TripletMatrix& a, std::span<const double> x,
                                 bool transpose) const = 0;

  /**
   * M[row0.., col0..] += sign * A * diag(d) * B^T in one pass over the triplet
   * entries. A is p x q, B is r x q, d has q entries.
   */
  virtual void fused_add_sdst(DenseMatrix& m, std::size_t row0, std::size_t col0,
                              const TripletMatrix& a, std::span<const double> d,
                              const TripletMatrix& b, double sign) const = 0;

  void fused_add_sdst(DenseMatrix& m, const TripletMatrix& a, const DiagonalMatrix& d,
                      const TripletMatrix& b, double sign) const {
    detail::require_dims(m.rows() == a.rows && m.cols() == b.rows, "fused_add_sdst target");
    fused_add_sdst(m, 0, 0, a, d.d, b, sign);
  }

  /**
   * y <- beta*y + alpha*[Jsp Jde]*x for a row-wise concatenation of a sparse
   * and a dense block. The dense part accumulates onto the sparse result.
   */
  void mds_times_vec(double beta, std::span<double> y, double alpha, const TripletMatrix& jsp,
                     const DenseMatrix& jde, std::span<const double> x) const {
    detail::require_dims(x.size() == jsp.cols + jde.cols(), "mds_times_vec x");
    detail::require_dims(jsp.rows == jde.rows() && y.size() == jsp.rows, "mds_times_vec y");
    triplet_times_vec(beta, y, alpha, jsp, x.first(jsp.cols), false);
    gemv(1.0, y, alpha, jde, x.subspan(jsp.cols), false);
  }

  // Value-returning conveniences.
  Vector vec_axpy(double alpha, std::span<const double> x, std::span<const double> y) const {
    Vector out(y.begin(), y.end());
    axpy(alpha, x, out);
    return out;
  }
};

namespace detail {

struct SequentialExec {
  static constexpr std::string_view name = "host-seq";

  template <class F>
  static void for_each(std::size_t n, F&& f) {
    for (std::size_t i = 0; i < n; ++i) f(i);
  }

  /// Left-to-right accumulation of term(i) combined with op.
  template <class Term, class Op>
  static double reduce(std::size_t n, double init, Term&& term, Op&& op) {
    double acc = init;
    for (std::size_t i = 0; i < n; ++i) acc = op(acc, term(i));
    return acc;
  }
};

struct ParallelExec {
  static constexpr std::string_view name = "host-par";
  static constexpr std::size_t kMinParallel = 2048;

  template <class F>
  static void for_each(std::size_t n, F&& f) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
    for (std::ptrdiff_t i = 0; i < sn; ++i) f(static_cast<std::size_t>(i));
  }

  // Fixed chunking so the combination order does not depend on thread count.
  template <class Term, class Op>
  static double reduce(std::size_t n, double init, Term&& term, Op&& op) {
    constexpr std::size_t kChunks = 64;
    if (n < kMinParallel) return SequentialExec::reduce(n, init, term, op);
    double partial[kChunks];
    const std::size_t chunk = (n + kChunks - 1) / kChunks;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(kChunks); ++c) {
      const std::size_t b = static_cast<std::size_t>(c) * chunk;
      const std::size_t e = std::min(n, b + chunk);
      double acc = init;
      for (std::size_t i = b; i < e; ++i) acc = op(acc, term(i));
      partial[c] = acc;
    }
    double acc = init;
    for (double p : partial) acc = op(acc, p);
    return acc;
  }
};

}  // namespace detail

template <class Exec>
class BasicKernelSuite final : public KernelSuite {
 public:
  std::string_view name() const override { return Exec::name; }

  void axpy(double alpha, std::span<const double> x, std::span<double> y) const override {
    detail::require_dims(x.size() == y.size(), "axpy");
    if (alpha == 0.0) return;
    Exec::for_each(x.size(), [&](std::size_t i) { y[i] += alpha * x[i]; });
  }

  double dot(std::span<const double> x, std::span<const double> y) const override {
    detail::require_dims(x.size() == y.size(), "dot");
    return Exec::reduce(
        x.size(), 0.0, [&](std::size_t i) { return x[i] * y[i]; },
        [](double a, double b) { return a + b; });
  }

  double reduce(std::span<const double> x, Reduction kind) const override {
    const auto plus = [](double a, double b) { return a + b; };
    const auto max = [](double a, double b) { return std::max(a, b); };
    const auto min = [](double a, double b) { return std::min(a, b); };
    const std::size_t n = x.size();
    switch (kind) {
      case Reduction::InfNorm:
        return Exec::reduce(n, 0.0, [&](std::size_t i) { return std::abs(x[i]); }, max);
      case Reduction::OneNorm:
        return Exec::reduce(n, 0.0, [&](std::size_t i) { return std::abs(x[i]); }, plus);
      case Reduction::TwoNorm:
        return std::sqrt(Exec::reduce(n, 0.0, [&](std::size_t i) { return x[i] * x[i]; }, plus));
      case Reduction::Min:
        if (n == 0) throw EmptyInputError("min of an empty vector");
        return Exec::reduce(n, std::numeric_limits<double>::infinity(),
                            [&](std::size_t i) { return x[i]; }, min);
      case Reduction::Max:
        if (n == 0) throw EmptyInputError("max of an empty vector");
        return Exec::reduce(n, -std::numeric_limits<double>::infinity(),
                            [&](std::size_t i) { return x[i]; }, max);
    }
    throw ConfigError("unknown reduction");
  }

  double max_step_to_bound(std::span<const double> x, std::span<const double> dx,
                           std::span<const double> lo, std::span<const double> up,
                           double tau) const override {
    const std::size_t n = x.size();
    detail::require_dims(dx.size() == n && lo.size() == n && up.size() == n, "max_step_to_bound");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("fraction-to-boundary tau must lie in (0,1)");
    for (std::size_t i = 0; i < n; ++i) {
      if ((finite_lower(lo[i]) && !(x[i] > lo[i])) || (finite_upper(up[i]) && !(x[i] < up[i])))
        throw NotInteriorError("component " + std::to_string(i) + " is not strictly interior");
    }
    return Exec::reduce(
        n, 1.0,
        [&](std::size_t i) {
          if (dx[i] < 0.0 && finite_lower(lo[i])) return tau * (x[i] - lo[i]) / -dx[i];
          if (dx[i] > 0.0 && finite_upper(up[i])) return tau * (up[i] - x[i]) / dx[i];
          return 1.0;
        },
        [](double a, double b) { return std::min(a, b); });
  }

  void gemv(double beta, std::span<double> y, double alpha, const DenseMatrix& a,
            std::span<const double> x, bool transpose) const override {
    const std::size_t m = a.rows(), n = a.cols();
    if (!transpose) {
      detail::require_dims(x.size() == n && y.size() == m, "gemv");
      Exec::for_each(m, [&](std::size_t i) {
        const auto row = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = (beta == 0.0 ? 0.0 : beta * y[i]) + alpha * s;
      });
    } else {
      detail::require_dims(x.size() == m && y.size() == n, "gemv^T");
      // Column blocks are independent; each element accumulates rows in order.
      constexpr std::size_t kBlock = 256;
      const std::size_t nblocks = (n + kBlock - 1) / kBlock;
      Exec::for_each(nblocks, [&](std::size_t blk) {
        const std::size_t b = blk * kBlock, e = std::min(n, b + kBlock);
        double acc[kBlock] = {};
        for (std::size_t i = 0; i < m; ++i) {
          const double xi = x[i];
          if (xi == 0.0) continue;
          const auto row = a.row(i);
          for (std::size_t j = b; j < e; ++j) acc[j - b] += row[j] * xi;
        }
        for (std::size_t j = b; j < e; ++j)
          y[j] = (beta == 0.0 ? 0.0 : beta * y[j]) + alpha * acc[j - b];
      });
    }
  }

  void gemm(double beta, DenseMatrix& y, double alpha, const DenseMatrix& a,
            const DenseMatrix& x) const override {
    const std::size_t m = a.rows(), q = a.cols(), n = x.cols();
    detail::require_dims(x.rows() == q && y.rows() == m && y.cols() == n, "gemm");
    Exec::for_each(m, [&](std::size_t i) {
      auto yr = y.row(i);
      for (std::size_t j = 0; j < n; ++j) yr[j] = beta == 0.0 ? 0.0 : beta * yr[j];
      if (alpha == 0.0) return;
      const auto ar = a.row(i);
      for (std::size_t k = 0; k < q; ++k) {
        const double s = alpha * ar[k];
        if (s == 0.0) continue;
        const auto xr = x.row(k);
        for (std::size_t j = 0; j < n; ++j) yr[j] += s * xr[j];
      }
    });
  }

  void triplet_times_vec(double beta, std::span<double> y, double alpha, const TripletMatrix& a,
                         std::span<const double> x, bool transpose) const override {
    a.check();
    const std::size_t out = transpose ? a.cols : a.rows;
    const std::size_t in = transpose ? a.rows : a.cols;
    detail::require_dims(y.size() == out && x.size() == in, "triplet_times_vec");
    Exec::for_each(y.size(), [&](std::size_t i) { y[i] = beta == 0.0 ? 0.0 : beta * y[i]; });
    if (alpha == 0.0) return;
    // Scatter: always sequential, entry order fixed.
    if (!transpose) {
      for (std::size_t k = 0; k < a.nnz(); ++k) y[a.i[k]] += alpha * a.v[k] * x[a.j[k]];
    } else {
      for (std::size_t k = 0; k < a.nnz(); ++k) y[a.j[k]] += alpha * a.v[k] * x[a.i[k]];
    }
  }

  void fused_add_sdst(DenseMatrix& m, std::size_t row0, std::size_t col0, const TripletMatrix& a,
                      std::span<const double> d, const TripletMatrix& b,
                      double sign) const override {
    a.check();
    b.check();
    detail::require_dims(a.cols == d.size() && b.cols == d.size(), "fused_add_sdst inner");
    detail::require_dims(row0 + a.rows <= m.rows() && col0 + b.rows <= m.cols(),
                         "fused_add_sdst target block");
    // Bucket B's entries by column so each A entry meets only its partners.
    const std::size_t q = d.size();
    std::vector<std::size_t> start(q + 1, 0);
    for (std::size_t k = 0; k < b.nnz(); ++k) ++start[b.j[k] + 1];
    for (std::size_t l = 0; l < q; ++l) start[l + 1] += start[l];
    std::vector<std::size_t> order(b.nnz());
    {
      std::vector<std::size_t> fill(start.begin(), start.end() - 1);
      for (std::size_t k = 0; k < b.nnz(); ++k) order[fill[b.j[k]]++] = k;
    }
    for (std::size_t ka = 0; ka < a.nnz(); ++ka) {
      const std::size_t l = a.j[ka];
      const double w = sign * a.v[ka] * d[l];
      if (w == 0.0) continue;
      auto row = m.row(row0 + a.i[ka]);
      for (std::size_t p = start[l]; p < start[l + 1]; ++p) {
        const std::size_t kb = order[p];
        row[col0 + b.i[kb]] += w * b.v[kb];
      }
    }
  }
};

using SequentialKernelSuite = BasicKernelSuite<detail::SequentialExec>;
using ParallelKernelSuite = BasicKernelSuite<detail::ParallelExec>;

// Runtime backend selection.

enum class MemorySpace { Default, Host };
enum class Execution { Sequential, Parallel };

struct BackendSelector {
  MemorySpace memory_space = MemorySpace::Default;
  Execution execution = Execution::Sequential;

  bool operator==(const BackendSelector&) const = default;
};

/// DEFAULT gives the sequential reference suite; HOST honors the execution policy.
inline std::shared_ptr<const KernelSuite> make_linear_algebra(BackendSelector sel) {
  switch (sel.memory_space) {
    case MemorySpace::Default:
      if (sel.execution != Execution::Sequential)
        throw ConfigError("DEFAULT memory space only supports sequential execution");
      return std::make_shared<const SequentialKernelSuite>();
    case MemorySpace::Host:
      if (sel.execution == Execution::Sequential)
        return std::make_shared<const SequentialKernelSuite>();
      return std::make_shared<const ParallelKernelSuite>();
  }
  throw ConfigError("unsupported backend selector");
}

/// Parses the CLI spelling: default | host-seq | host-par.
inline BackendSelector parse_backend(std::string_view s) {
  if (s == "default") return {};
  if (s == "host-seq") return {MemorySpace::Host, Execution::Sequential};
  if (s == "host-par") return {MemorySpace::Host, Execution::Parallel};
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

inline const KernelSuite& default_kernels() {
  static const SequentialKernelSuite suite;
  return suite;
}

}  // namespace mdsipm
