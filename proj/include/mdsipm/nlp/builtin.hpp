#pragma once

#include <charconv>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mdsipm/nlp/quadratic.hpp"

namespace mdsipm {

/**
 * Convex mini-app with n_d = n_s = k, two equalities and k+1 inequalities
 * (m = n_s + 3), so the compressed KKT system is (2k+3) x (2k+3).
 *
 *   f  = 1/2 sum (xs_i - 1)^2 + 1/2 xd^T (I + e e^T / k) xd - e^T xd
 *   g1 = (1/k) sum xs + (1/k) sum xd = 1
 *   g2 = xs_1 - xd_1 = 0
 *   h_i = xs_i + (1/k) sum xd <= 2          i = 1..k
 *   h_{k+1} = (1/k) sum xd in [0.5, 3]
 *   -10 <= xs, xd <= 10
 */
inline std::unique_ptr<QuadraticMdsProblem> synthetic_problem(std::size_t k) {
  if (k < 1) throw ConfigError("synthetic problem needs k >= 1");
  const double inv_k = 1.0 / static_cast<double>(k);

  QuadraticData q;
  q.dims = {k, k, 2, k + 1};
  q.H = DenseMatrix(k, k, inv_k);
  for (std::size_t i = 0; i < k; ++i) q.H(i, i) += 1.0;
  q.c_d.assign(k, -1.0);
  q.q.assign(k, 1.0);
  q.c_s.assign(k, -1.0);
  q.constant = 0.5 * static_cast<double>(k);

  q.Jdg = DenseMatrix(2, k);
  q.Jsg = TripletMatrix(2, k);
  for (std::size_t j = 0; j < k; ++j) {
    q.Jdg(0, j) = inv_k;
    q.Jsg.add(0, j, inv_k);
  }
  q.Jdg(1, 0) = -1.0;
  q.Jsg.add(1, 0, 1.0);
  q.g_E = {1.0, 0.0};

  q.Jdh = DenseMatrix(k + 1, k, inv_k);
  q.Jsh = TripletMatrix(k + 1, k);
  for (std::size_t i = 0; i < k; ++i) q.Jsh.add(i, i, 1.0);
  q.h_lo.assign(k + 1, -kInfBound);
  q.h_up.assign(k + 1, 2.0);
  q.h_lo[k] = 0.5;
  q.h_up[k] = 3.0;

  q.xd_lo.assign(k, -10.0);
  q.xd_up.assign(k, 10.0);
  q.xs_lo.assign(k, -10.0);
  q.xs_up.assign(k, 10.0);
  return std::make_unique<QuadraticMdsProblem>("synthetic:" + std::to_string(k), std::move(q));
}

/**
 * Seeded convex QP honoring the MDS structure: SPD dense Hessian, positive
 * diagonal sparse Hessian, random dense blocks and sparse blocks with about
 * 3 entries per row (duplicates possible). Constraint bounds are placed
 * around the image of a random point that is strictly inside the variable
 * bounds, so a strictly feasible point always exists.
 */
inline std::unique_ptr<QuadraticMdsProblem> random_problem(std::uint64_t seed, std::size_t n_d,
                                                           std::size_t n_s, std::size_t m_E,
                                                           std::size_t m_I) {
  if (m_E + m_I < 1) throw ConfigError("random problem needs at least one constraint");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };

  QuadraticData q;
  q.dims = {n_d, n_s, m_E, m_I};

  DenseMatrix b(n_d, n_d);
  for (auto& v : b.data()) v = uni(-1.0, 1.0);
  q.H = DenseMatrix(n_d, n_d);
  for (std::size_t i = 0; i < n_d; ++i)
    for (std::size_t j = 0; j < n_d; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < n_d; ++l) s += b(l, i) * b(l, j);
      q.H(i, j) = s / static_cast<double>(n_d) + (i == j ? 0.5 : 0.0);
    }
  q.c_d.resize(n_d);
  for (auto& v : q.c_d) v = uni(-2.0, 2.0);
  q.q.resize(n_s);
  for (auto& v : q.q) v = uni(0.5, 2.0);
  q.c_s.resize(n_s);
  for (auto& v : q.c_s) v = uni(-2.0, 2.0);

  // Variable bounds: mostly boxes, some one-sided, a few free.
  const auto make_bounds = [&](std::size_t n, Vector& lo, Vector& up) {
    lo.assign(n, -kInfBound);
    up.assign(n, kInfBound);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = unit(rng);
      const double l = -uni(1.0, 3.0), u = uni(1.0, 3.0);
      if (r < 0.6) {
        lo[i] = l;
        up[i] = u;
      } else if (r < 0.75) {
        lo[i] = l;
      } else if (r < 0.9) {
        up[i] = u;
      }
    }
  };
  make_bounds(n_d, q.xd_lo, q.xd_up);
  make_bounds(n_s, q.xs_lo, q.xs_up);

  Vector xd_star(n_d), xs_star(n_s);
  for (auto& v : xd_star) v = uni(-0.5, 0.5);
  for (auto& v : xs_star) v = uni(-0.5, 0.5);

  const double density = n_s > 0 ? std::min(1.0, 3.0 / static_cast<double>(n_s)) : 0.0;
  const auto make_jac = [&](std::size_t m, DenseMatrix& jd, TripletMatrix& js) {
    jd = DenseMatrix(m, n_d);
    for (auto& v : jd.data()) v = uni(-1.0, 1.0);
    js = TripletMatrix(m, n_s);
    std::uniform_int_distribution<std::size_t> col(0, n_s > 0 ? n_s - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (n_s == 0) continue;
      std::binomial_distribution<std::size_t> count(n_s, density);
      std::size_t c = count(rng);
      if (c == 0 && n_d == 0) c = 1;
      for (std::size_t t = 0; t < c; ++t) js.add(i, col(rng), uni(-1.0, 1.0));
    }
  };
  make_jac(m_E, q.Jdg, q.Jsg);
  make_jac(m_I, q.Jdh, q.Jsh);

  const auto& la = default_kernels();
  q.g_E.assign(m_E, 0.0);
  la.mds_times_vec(0.0, q.g_E, 1.0, q.Jsg, q.Jdg, [&] {
    Vector x(xs_star);
    x.insert(x.end(), xd_star.begin(), xd_star.end());
    return x;
  }());
  Vector h_star(m_I, 0.0);
  la.triplet_times_vec(0.0, h_star, 1.0, q.Jsh, xs_star, false);
  la.gemv(1.0, h_star, 1.0, q.Jdh, xd_star, false);
  q.h_lo.assign(m_I, -kInfBound);
  q.h_up.assign(m_I, kInfBound);
  for (std::size_t i = 0; i < m_I; ++i) {
    const double r = unit(rng);
    const double lo = h_star[i] - uni(0.5, 2.0), up = h_star[i] + uni(0.5, 2.0);
    if (r < 0.5) {
      q.h_lo[i] = lo;
      q.h_up[i] = up;
    } else if (r < 0.75) {
      q.h_lo[i] = lo;
    } else {
      q.h_up[i] = up;
    }
  }

  const std::string name = "random:" + std::to_string(seed) + ":" + std::to_string(n_d) + ":" +
                            std::to_string(n_s) + ":" + std::to_string(m_E) + ":" +
                            std::to_string(m_I);
  return std::make_unique<QuadraticMdsProblem>(name, std::move(q));
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (true) {
    const std::size_t e = s.find(sep, b);
    out.push_back(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// "synthetic:<k>" or "random:<seed>:<n_d>:<n_s>:<m_E>:<m_I>"
inline std::unique_ptr<QuadraticMdsProblem> parse_problem(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  if (parts[0] == "synthetic" && parts.size() == 2) {
    const auto k = detail::parse_int<std::size_t>(parts[1], "k");
    if (k < 1) throw ConfigError("synthetic problem needs k >= 1");
    return synthetic_problem(k);
  }
  if (parts[0] == "random" && parts.size() == 6) {
    return random_problem(detail::parse_int<std::uint64_t>(parts[1], "seed"),
                          detail::parse_int<std::size_t>(parts[2], "n_d"),
                          detail::parse_int<std::size_t>(parts[3], "n_s"),
                          detail::parse_int<std::size_t>(parts[4], "m_E"),
                          detail::parse_int<std::size_t>(parts[5], "m_I"));
  }
  throw ConfigError("unknown problem '" + std::string(spec) +
                    "' (expected synthetic:<k> or random:<seed>:<n_d>:<n_s>:<m_E>:<m_I>)");
}

}  // namespace mdsipm
