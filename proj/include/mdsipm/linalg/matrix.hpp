#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdsipm/errors.hpp"

namespace mdsipm {

using Vector = std::vector<double>;

/// Bound magnitudes at or beyond this value are treated as infinite.
inline constexpr double kInfBound = 1e20;

inline bool finite_lower(double lo) { return lo > -kInfBound; }
inline bool finite_upper(double up) { return up < kInfBound; }

/**
 * Dense matrix stored as one contiguous row-major block.
 * Element (i,j) lives at offset i*cols + j.
 */
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    detail::require_dims(data_.size() == rows * cols, "DenseMatrix data length");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  /// Max absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (double v : row(i)) s += std::abs(v);
      best = std::max(best, s);
    }
    return best;
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/**
 * Coordinate-format sparse matrix. Duplicate (i,j) entries are allowed and
 * are summed whenever the matrix is applied.
 */
struct TripletMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> i;
  std::vector<std::size_t> j;
  std::vector<double> v;

  TripletMatrix() = default;
  TripletMatrix(std::size_t r, std::size_t c) : rows(r), cols(c) {}

  std::size_t nnz() const noexcept { return v.size(); }

  void add(std::size_t row, std::size_t col, double value) {
    i.push_back(row);
    j.push_back(col);
    v.push_back(value);
  }

  /// Throws MalformedMatrixError on out-of-range indices or ragged arrays.
  void check() const {
    if (i.size() != v.size() || j.size() != v.size())
      throw MalformedMatrixError("triplet arrays have different lengths");
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (i[k] >= rows || j[k] >= cols)
        throw MalformedMatrixError("triplet entry " + std::to_string(k) + " (" +
                                   std::to_string(i[k]) + "," + std::to_string(j[k]) +
                                   ") outside " + std::to_string(rows) + "x" +
                                   std::to_string(cols));
    }
  }

  DenseMatrix to_dense() const {
    check();
    DenseMatrix d(rows, cols);
    for (std::size_t k = 0; k < v.size(); ++k) d(i[k], j[k]) += v[k];
    return d;
  }

  bool operator==(const TripletMatrix&) const = default;
};

/// diag(d)
struct DiagonalMatrix {
  Vector d;

  std::size_t size() const noexcept { return d.size(); }

  bool all_positive() const {
    return std::all_of(d.begin(), d.end(), [](double x) { return x > 0.0; });
  }
};

}  // namespace mdsipm
