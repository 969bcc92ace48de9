#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mdsipm/errors.hpp"
#include "mdsipm/linalg/matrix.hpp"

// Text dump for debugging: "rows cols nnz" then one "i j value" line per
// entry, zero-based, values with 17 significant digits.

namespace mdsipm {

namespace detail {
inline void dump_line(std::ostream& os, std::size_t i, std::size_t j, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << i << ' ' << j << ' ' << buf << '\n';
}
}  // namespace detail

inline void dump_matrix(std::ostream& os, const TripletMatrix& a) {
  os << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
  for (std::size_t k = 0; k < a.nnz(); ++k) detail::dump_line(os, a.i[k], a.j[k], a.v[k]);
}

/// Dense matrices are written as a full enumeration, zeros included.
inline void dump_matrix(std::ostream& os, const DenseMatrix& a) {
  os << a.rows() << ' ' << a.cols() << ' ' << a.rows() * a.cols() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) detail::dump_line(os, i, j, a(i, j));
}

template <class Matrix>
void dump_matrix(const std::string& path, const Matrix& a) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  dump_matrix(os, a);
}

inline TripletMatrix read_matrix_dump(std::istream& is) {
  TripletMatrix a;
  std::size_t nnz = 0;
  if (!(is >> a.rows >> a.cols >> nnz)) throw MalformedMatrixError("bad dump header");
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw MalformedMatrixError("truncated dump at entry " + std::to_string(k));
    a.add(i, j, v);
  }
  a.check();
  return a;
}

}  // namespace mdsipm
