#include <gtest/gtest.h>

#include <set>

#include "radonlab/common.hpp"
#include "radonlab/poly.hpp"

using namespace radonlab;

TEST(Gamma, CanonicalSetsInLexOrder) {
  auto g1 = build_gamma(1, 3);
  ASSERT_EQ(g1.size(), 3u);
  EXPECT_EQ(g1[0].exps, std::vector<int>{1});
  EXPECT_EQ(g1[2].exps, std::vector<int>{3});
  auto g2 = build_gamma(2, 2);
  ASSERT_EQ(g2.size(), 8u);  // [0,2]^2 without the origin
  EXPECT_EQ(g2.front().exps, (std::vector<int>{0, 1}));
  EXPECT_EQ(g2.back().exps, (std::vector<int>{2, 2}));
  EXPECT_TRUE(std::is_sorted(g2.begin(), g2.end()));
  EXPECT_THROW(build_gamma(0, 2), std::invalid_argument);
}

TEST(Monomial, OverflowIsDetected) {
  std::vector<long> y{1L << 40};
  EXPECT_EQ(monomial(y, MultiIndex{{2}}), static_cast<i128>(1) << 80);
  EXPECT_THROW(monomial(y, MultiIndex{{4}}), std::overflow_error);
}

TEST(Mapping, MergesTermsAndRejectsConstants) {
  PolynomialMapping P(1, {{Term{{{2}}, 3}, Term{{{2}}, -3}, Term{{{1}}, 5}}});
  ASSERT_EQ(P.components()[0].size(), 1u);
  std::vector<long> y{7};
  EXPECT_EQ(P.eval(y)[0], 35);
  EXPECT_THROW(PolynomialMapping(1, {{Term{{{0}}, 1}}}), std::invalid_argument);
  EXPECT_THROW(PolynomialMapping(2, {{Term{{{1}}, 1}}}), std::invalid_argument);
}

TEST(Mapping, LiftingReproducesThePolynomial) {
  PolynomialMapping P(2, {{Term{{{2, 0}}, 3}, Term{{{1, 1}}, -2}}, {Term{{{0, 3}}, 1}, Term{{{1, 0}}, 4}}});
  auto lifted = lift(P);
  EXPECT_EQ(lifted.canonical.d(), 15);  // [0,3]^2 minus the origin
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<long> y{rng.integer(-50, 50), rng.integer(-50, 50)};
    auto q = lifted.canonical.eval(y);
    EXPECT_EQ(lifted.L.apply(q), P.eval(y));
  }
}

TEST(Dilation, ScalesByDegree) {
  DilationMatrix A(build_gamma(1, 3));
  std::vector<double> x{1, 1, 1};
  EXPECT_EQ(A.apply(2.0, x), (std::vector<double>{2, 4, 8}));
  EXPECT_DOUBLE_EQ(A.sup_norm(3.0, x), 27.0);
}

namespace {
long brute_ball_count(int k, double t) {
  long R = static_cast<long>(std::ceil(t)), n = 0;
  if (k == 1) {
    for (long x = -R; x <= R; ++x) n += (x * x <= t * t);
  } else {
    for (long x = -R; x <= R; ++x)
      for (long y = -R; y <= R; ++y) n += (static_cast<double>(x * x + y * y) <= t * t);
  }
  return n;
}
}  // namespace

TEST(Lattice, BallCountsMatchBruteForce) {
  EXPECT_EQ(lattice_count(ConvexBody::ball(2), 10.0), 317u);
  for (double t : {1.0, 2.5, 7.0, 13.0, 31.0})
    for (int k : {1, 2}) EXPECT_EQ(static_cast<long>(lattice_count(ConvexBody::ball(k), t)), brute_ball_count(k, t)) << k << " " << t;
}

TEST(Lattice, BoxAndPolytopeIncludeTheBoundary) {
  EXPECT_EQ(lattice_count(ConvexBody::box({1.0, 2.0}), 3.0), 7u * 13u);
  // |x| + |y| <= 1 dilated by 4
  auto diamond = ConvexBody::polytope(2, {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}, {1, 1, 1, 1});
  EXPECT_NEAR(diamond.sup_bound(), 1.0, 1e-9);
  EXPECT_EQ(lattice_count(diamond, 4.0), 41u);
  EXPECT_NEAR(diamond.volume(), 2.0, 1e-8);
  EXPECT_THROW(ConvexBody::polytope(2, {{1, 0}, {-1, 0}}, {1, 1}), std::invalid_argument);
}

TEST(Lattice, PointsAreLexicographicAndUnique) {
  auto pts = lattice_points(ConvexBody::ball(2), 5.0);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_EQ(std::set<IVec>(pts.begin(), pts.end()).size(), pts.size());
}

TEST(Phase, ExactReductionMatchesRationalArithmetic) {
  // xi = p / 2^20 is exact in binary, so xi * n mod 1 is (p n mod 2^20) / 2^20
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    long p = rng.integer(0, (1L << 20) - 1);
    long n = rng.integer(-(1L << 40), 1L << 40);
    double xi = std::ldexp(static_cast<double>(p), -20);
    i128 num = static_cast<i128>(p) * n;
    i128 mod = static_cast<i128>(1) << 20;
    i128 r = ((num % mod) + mod) % mod;
    EXPECT_EQ(frac_product(xi, n), std::ldexp(static_cast<double>(r), -20));
  }
}

TEST(Phase, CenteredFractionRange) {
  for (double x : {-3.7, -0.5, 0.0, 0.49, 0.5, 12.25}) {
    double c = centered_frac(x);
    EXPECT_GE(c, -0.5);
    EXPECT_LT(c, 0.5);
    EXPECT_NEAR(std::remainder(c - x, 1.0), 0.0, 1e-12);
  }
}

TEST(Determinism, ParallelLoopIsThreadCountInvariant) {
  auto run = [](unsigned threads) {
    std::vector<double> out(257);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng r = Rng::for_trial(42, i);
      std::vector<cplx> v(100);
      for (auto& x : v) x = cplx(r.normal(), r.uniform());
      out[i] = std::abs(pairwise_sum(std::span<const cplx>(v)));
    }, threads);
    return out;
  };
  EXPECT_EQ(run(1), run(4));
  EXPECT_EQ(run(1), run(7));
}

TEST(Determinism, ParallelLoopPropagatesExceptions) {
  EXPECT_THROW(parallel_for(50, [](std::size_t i) { if (i == 17) throw std::runtime_error("x"); }, 4), std::runtime_error);
}

TEST(Fit, LeastSquaresRecoversLine) {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}
