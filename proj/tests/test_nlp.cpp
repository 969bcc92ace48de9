#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mdsipm/nlp/builtin.hpp"
#include "mdsipm/verify/verify.hpp"

using namespace mdsipm;

namespace {

// Quadratic problem whose objective turns NaN once xd[0] exceeds a threshold.
class PoisonedProblem : public QuadraticMdsProblem {
 public:
  using QuadraticMdsProblem::QuadraticMdsProblem;
  void gradient(std::span<const double> xd, std::span<const double> xs, std::span<double> gd,
                std::span<double> gs) const override {
    QuadraticMdsProblem::gradient(xd, xs, gd, gs);
    if (xd[0] > 0.5) gd[0] = std::nan("");
  }
};

QuadraticData tiny_data() {
  QuadraticData q;
  q.dims = {1, 1, 0, 1};
  q.H = DenseMatrix(1, 1, 1.0);
  q.c_d = {0};
  q.q = {1};
  q.c_s = {0};
  q.Jdg = DenseMatrix(0, 1);
  q.Jsg = TripletMatrix(0, 1);
  q.Jdh = DenseMatrix(1, 1, 1.0);
  q.Jsh = TripletMatrix(1, 1);
  q.Jsh.add(0, 0, 1.0);
  q.h_lo = {-1};
  q.h_up = {1};
  q.xd_lo = {-kInfBound};
  q.xd_up = {kInfBound};
  q.xs_lo = {-kInfBound};
  q.xs_up = {kInfBound};
  return q;
}

}  // namespace

TEST(Synthetic, Dimensions) {
  for (std::size_t k : {1u, 2u, 7u, 10u, 100u}) {
    const auto p = synthetic_problem(k);
    const auto& d = p->dims();
    EXPECT_EQ(d.n_d, k);
    EXPECT_EQ(d.n_s, k);
    EXPECT_EQ(d.m(), d.n_s + 3);
    EXPECT_EQ(d.compressed_dim(), 2 * k + 3);
    EXPECT_EQ(d.full_dim(), 3 * k + 3);
    EXPECT_TRUE(validate_problem(*p).empty());
  }
  EXPECT_EQ(synthetic_problem(1)->dims().n(), 2u);
  EXPECT_EQ(synthetic_problem(1)->dims().m(), 4u);
  EXPECT_EQ(synthetic_problem(1)->dims().compressed_dim(), 5u);
  EXPECT_EQ(synthetic_problem(10)->dims().compressed_dim(), 23u);
  EXPECT_THROW(synthetic_problem(0), ConfigError);
}

TEST(Synthetic, ClosedFormsAtOrigin) {
  const std::size_t k = 4;
  const auto p = synthetic_problem(k);
  const Vector z(k, 0.0);
  const auto b = eval_all(*p, z, z, Vector(2, 0.0), Vector(k + 1, 0.0));
  EXPECT_DOUBLE_EQ(b.f, 0.5 * k);
  for (double g : b.grad_d) EXPECT_DOUBLE_EQ(g, -1.0);
  for (double g : b.grad_s) EXPECT_DOUBLE_EQ(g, -1.0);
  for (double v : b.g_val) EXPECT_EQ(v, 0.0);
  for (double v : b.h_val) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      EXPECT_DOUBLE_EQ(b.Qdd(i, j), (i == j ? 1.0 : 0.0) + 1.0 / k);
  EXPECT_EQ(b.qss, Vector(k, 1.0));
}

TEST(Synthetic, ClosedFormsAtPoint) {
  // xd = (1, 2), xs = (3, -1), k = 2
  const auto p = synthetic_problem(2);
  const Vector xd{1, 2}, xs{3, -1};
  const auto b = eval_all(*p, xd, xs, Vector{0.3, -2}, Vector{1, 2, 3});
  // 1/2 (4 + 4) + 1/2 (1 + 4 + (3^2)/2) - 3
  EXPECT_DOUBLE_EQ(b.f, 4.0 + 0.5 * (5.0 + 4.5) - 3.0);
  EXPECT_DOUBLE_EQ(b.grad_d[0], 1.0 + 1.5 - 1.0);
  EXPECT_DOUBLE_EQ(b.grad_d[1], 2.0 + 1.5 - 1.0);
  EXPECT_DOUBLE_EQ(b.grad_s[0], 2.0);
  EXPECT_DOUBLE_EQ(b.grad_s[1], -2.0);
  EXPECT_DOUBLE_EQ(b.g_val[0], 0.5 * 2 + 0.5 * 3);
  EXPECT_DOUBLE_EQ(b.g_val[1], 3.0 - 1.0);
  EXPECT_DOUBLE_EQ(b.h_val[0], 3.0 + 1.5);
  EXPECT_DOUBLE_EQ(b.h_val[1], -1.0 + 1.5);
  EXPECT_DOUBLE_EQ(b.h_val[2], 1.5);
}

TEST(EvalAll, ZeroMultipliersGiveObjectiveHessian) {
  const auto p = random_problem(4, 5, 6, 2, 3);
  const auto& d = p->dims();
  const Vector xd(d.n_d, 0.1), xs(d.n_s, -0.2);
  const auto b0 = eval_all(*p, xd, xs, Vector(d.m_E, 0.0), Vector(d.m_I, 0.0));
  const auto b1 = eval_all(*p, xd, xs, Vector(d.m_E, 3.0), Vector(d.m_I, -1.0));
  EXPECT_EQ(b0.Qdd, p->data().H);
  EXPECT_EQ(b0.qss, p->data().q);
  // linear constraints: multipliers do not change the Hessian
  EXPECT_EQ(b1.Qdd, b0.Qdd);
  EXPECT_EQ(b1.qss, b0.qss);
}

TEST(EvalAll, NonFiniteRaisesWithComponent) {
  PoisonedProblem p("poisoned", tiny_data());
  EXPECT_NO_THROW(eval_all(p, Vector{0}, Vector{0}, Vector{}, Vector{0}));
  try {
    eval_all(p, Vector{1}, Vector{0}, Vector{}, Vector{0});
    FAIL() << "expected EvalError";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.component(), "grad_d");
  }
}

TEST(EvalAll, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = random_problem(seed, 6, 9, 2, 4);
    const auto bad = check::derivatives(*p, rng, 20, 1e-6);
    EXPECT_TRUE(bad.empty()) << bad.front();
  }
  for (std::size_t k : {1u, 2u, 5u, 30u}) {
    const auto bad = check::derivatives(*synthetic_problem(k), rng, 20, 1e-6);
    EXPECT_TRUE(bad.empty()) << bad.front();
  }
}

TEST(EvalAll, SparseHessianNonnegative) {
  std::mt19937_64 rng(32);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = random_problem(seed, 3, 8, 1, 2);
    const auto& d = p->dims();
    const auto xd = check::fd::random_interior(rng, p->xd_lo(), p->xd_up());
    const auto xs = check::fd::random_interior(rng, p->xs_lo(), p->xs_up());
    const auto b = eval_all(*p, xd, xs, check::fd::random_vector(rng, d.m_E),
                            check::fd::random_vector(rng, d.m_I));
    for (double v : b.qss) EXPECT_GE(v, 0.0);
  }
}

TEST(RandomProblem, Deterministic) {
  const auto a = random_problem(17, 4, 5, 2, 3);
  const auto b = random_problem(17, 4, 5, 2, 3);
  const Vector xd{0.1, -0.2, 0.3, 0.0}, xs{0.5, 0.4, -0.1, 0.2, 0.0};
  const auto ea = eval_all(*a, xd, xs, Vector{1, 2}, Vector{1, 2, 3});
  const auto eb = eval_all(*b, xd, xs, Vector{1, 2}, Vector{1, 2, 3});
  EXPECT_EQ(ea.f, eb.f);
  EXPECT_EQ(ea.grad_d, eb.grad_d);
  EXPECT_EQ(ea.grad_s, eb.grad_s);
  EXPECT_EQ(ea.g_val, eb.g_val);
  EXPECT_EQ(ea.h_val, eb.h_val);
  EXPECT_EQ(ea.Jsg.to_dense(), eb.Jsg.to_dense());
  EXPECT_EQ(ea.Jdh, eb.Jdh);
  EXPECT_EQ(ea.Qdd, eb.Qdd);
  EXPECT_NE(eval_all(*random_problem(18, 4, 5, 2, 3), xd, xs, Vector{1, 2}, Vector{1, 2, 3}).f,
            ea.f);
}

TEST(RandomProblem, Validates) {
  EXPECT_TRUE(validate_problem(*random_problem(1, 3, 4, 1, 2)).empty());
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    EXPECT_TRUE(validate_problem(*random_problem(seed, 1 + seed % 20, 1 + seed % 13, seed % 4,
                                                 1 + seed % 10))
                    .empty());
  EXPECT_THROW(random_problem(1, 2, 2, 0, 0), ConfigError);
}

TEST(ValidateProblem, ReportsViolations) {
  QuadraticData q = tiny_data();
  q.h_lo = {1};
  q.h_up = {1};
  auto msgs = validate_problem(QuadraticMdsProblem("bad", q));
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_NE(msgs[0].find("h bounds not strictly ordered"), std::string::npos);

  q.h_lo = {-kInfBound};
  q.h_up = {kInfBound};
  msgs = validate_problem(QuadraticMdsProblem("bad", q));
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0], "no finite bound on inequality 0");

  q = tiny_data();
  q.xs_lo = {2};
  q.xs_up = {1};
  EXPECT_FALSE(validate_problem(QuadraticMdsProblem("bad", q)).empty());

  q = tiny_data();
  q.q = {-1};
  EXPECT_FALSE(validate_problem(QuadraticMdsProblem("bad", q)).empty());
}

TEST(ParseProblem, Specs) {
  EXPECT_EQ(parse_problem("synthetic:3")->dims().n_d, 3u);
  const auto r = parse_problem("random:5:2:3:1:4");
  EXPECT_EQ(r->dims().n_d, 2u);
  EXPECT_EQ(r->dims().n_s, 3u);
  EXPECT_EQ(r->dims().m_E, 1u);
  EXPECT_EQ(r->dims().m_I, 4u);
  EXPECT_EQ(r->name(), "random:5:2:3:1:4");
  for (const char* bad : {"synthetic:0", "synthetic:", "synthetic:x", "random:1:2", "foo:3", "",
                          "synthetic:-1", "random:1:2:3:0:0"})
    EXPECT_THROW(parse_problem(bad), ConfigError) << bad;
}
