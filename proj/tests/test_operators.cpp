#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radonlab/fft.hpp"
#include "radonlab/operators.hpp"

using namespace radonlab;

namespace {
PolynomialMapping parabola() { return PolynomialMapping(1, {{Term{{{1}}, 1}}, {Term{{{2}}, 1}}}); }
PolynomialMapping cubic_1d() { return PolynomialMapping(1, {{Term{{{3}}, 1}, Term{{{1}}, -2}}}); }
// (y1, y2) -> (y1 + y2^2, y1 y2)
PolynomialMapping surface() { return PolynomialMapping(2, {{Term{{{1, 0}}, 1}, Term{{{0, 2}}, 1}}, {Term{{{1, 1}}, 1}}}); }

GridFunction random_grid(Rng& rng, int dim, long R) {
  GridFunction f(IVec(static_cast<std::size_t>(dim), -R), IVec(static_cast<std::size_t>(dim), R));
  for (auto& v : f.values()) v = cplx(rng.normal(), rng.normal());
  return f;
}

std::map<std::vector<long>, cplx> as_map(const GridFunction& f) {
  std::map<std::vector<long>, cplx> m;
  for (std::size_t i = 0; i < f.size(); ++i) m[f.point(i)] = f.values()[i];
  return m;
}
}  // namespace

TEST(Grid, IndexingRoundTrip) {
  GridFunction f({-2, 3}, {1, 5});
  EXPECT_EQ(f.size(), 12u);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.index(f.point(i)), i);
  f[{0, 4}] = 2.5;
  EXPECT_EQ(f.value_at({0, 4}), cplx(2.5));
  EXPECT_EQ(f.value_at({9, 9}), cplx(0.0));
  EXPECT_THROW((f[{9, 9}]), std::invalid_argument);
  auto g = f.translated(std::vector<long>{1, -1});
  EXPECT_EQ(g.value_at({1, 3}), cplx(2.5));
}

TEST(Fft, MatchesNaiveTransform) {
  Rng rng(1);
  for (const auto& dims : {std::vector<int>{7}, std::vector<int>{4, 6}, std::vector<int>{3, 2, 5}}) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(rng.normal(), rng.normal());
    auto want = oracle::dft(v, dims);
    auto got = v;
    fft_inplace(got, dims, +1);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(got[i] - want[i]), 1e-12);
  }
}

TEST(Average, DirectMatchesLiteralDefinition) {
  Rng rng(2);
  auto P = parabola();
  auto G = ConvexBody::ball(1);
  auto f = random_grid(rng, 2, 3);
  auto t = lattice_terms(P, 4, G, OperatorKind::average, nullptr);
  auto want = oracle::average_literal(as_map(f), t.images, t.weights);
  auto got = radon_average(f, P, 4, G).output;
  for (const auto& [x, v] : want) EXPECT_LT(std::abs(got.value_at(x) - v), 1e-14);
  EXPECT_NEAR(got.norm(1.0), [&] { double s = 0; for (auto& [x, v] : want) s += std::abs(v); return s; }(), 1e-12);
}

TEST(Average, BackendsAgree) {
  Rng rng(3);
  struct Case {
    PolynomialMapping P;
    ConvexBody G;
    long N;
  };
  std::vector<Case> cases{{parabola(), ConvexBody::ball(1), 9}, {cubic_1d(), ConvexBody::ball(1), 6},
                          {surface(), ConvexBody::ball(2), 4}, {surface(), ConvexBody::box({1.0, 0.5}), 5}};
  for (const auto& c : cases) {
    auto f = random_grid(rng, c.P.target_dim(), 4);
    OperatorOptions fft;
    fft.backend = Backend::fft;
    auto a = radon_average(f, c.P, c.N, c.G).output;
    auto b = radon_average(f, c.P, c.N, c.G, fft).output;
    EXPECT_LT(relative_difference(a, b), 1e-12);
    auto K = hilbert_kernel();
    if (c.P.k() == 1) {
      auto s1 = truncated_singular(f, c.P, c.N, K, c.G).output;
      auto s2 = truncated_singular(f, c.P, c.N, K, c.G, fft).output;
      EXPECT_LT(relative_difference(s1, s2), 1e-12);
    }
  }
}

TEST(Average, MassIsPreservedAndOperatorIsLinear) {
  Rng rng(4);
  auto P = surface();
  auto G = ConvexBody::ball(2);
  auto f = random_grid(rng, 2, 5), g = random_grid(rng, 2, 3);
  auto Mf = radon_average(f, P, 3, G).output;
  EXPECT_LT(std::abs(Mf.sum() - f.sum()), 1e-12 * f.norm(1.0));
  cplx a(0.3, -1.2), b(2.0, 0.5);
  auto lhs = radon_average(combine(a, f, b, g), P, 3, G).output;
  auto rhs = combine(a, Mf, b, radon_average(g, P, 3, G).output);
  EXPECT_LT(relative_difference(lhs, rhs), 1e-12);
}

TEST(Average, DeltaGivesTheKernel) {
  auto P = parabola();
  auto G = ConvexBody::ball(1);
  auto out = radon_average(GridFunction::delta(2), P, 3, G).output;
  auto k = averaging_kernel(P, 3, G);
  EXPECT_LT(relative_difference(out, k), 1e-15);
  EXPECT_NEAR(k.value_at({2, 4}).real(), 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(k.value_at({0, 0}).real(), 1.0 / 7.0, 1e-15);
}

TEST(Average, KernelTransformIsTheMultiplier) {
  auto P = parabola();
  auto G = ConvexBody::ball(1);
  auto k = averaging_kernel(P, 5, G);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    EXPECT_LT(std::abs(fourier_coefficient(k, xi) - avg_multiplier(5, xi, P, G)), 1e-13);
  }
}

TEST(Singular, OddKernelAnnihilatesConstants) {
  auto P = cubic_1d();
  GridFunction one({-200}, {200});
  for (auto& v : one.values()) v = 1.0;
  auto out = truncated_singular(one, P, 4, hilbert_kernel(), ConvexBody::ball(1)).output;
  // deep inside the support every term pairs with its negative
  EXPECT_LT(std::abs(out.value_at({0})), 1e-14);
}

TEST(Ergodic, ShiftRealizationIsBitwiseEqual) {
  Rng rng(6);
  auto f = random_grid(rng, 2, 4);
  for (long N : {1L, 3L, 6L}) {
    auto a = radon_average(f, surface(), N, ConvexBody::ball(2)).output;
    auto b = ergodic_average(f, surface(), N, ConvexBody::ball(2));
    ASSERT_EQ(a.lo(), b.lo());
    EXPECT_EQ(a.values(), b.values());
  }
  auto s1 = truncated_singular(f, parabola(), 7, hilbert_kernel(), ConvexBody::ball(1)).output;
  auto s2 = ergodic_singular(f, parabola(), 7, hilbert_kernel(), ConvexBody::ball(1));
  EXPECT_EQ(s1.values(), s2.values());
}

TEST(Operators, ThreadCountDoesNotChangeOutput) {
  Rng rng(7);
  auto f = random_grid(rng, 2, 6);
  OperatorOptions one, many;
  one.threads = 1;
  many.threads = 5;
  auto a = radon_average(f, surface(), 5, ConvexBody::ball(2), one).output;
  auto b = radon_average(f, surface(), 5, ConvexBody::ball(2), many).output;
  EXPECT_EQ(a.values(), b.values());
}

TEST(Operators, BudgetsAreEnforced) {
  OperatorOptions tight;
  tight.max_cells = 100;
  GridFunction f({-20, -20}, {20, 20});
  EXPECT_THROW(radon_average(f, parabola(), 10, ConvexBody::ball(1), tight), budget_exceeded);
  EXPECT_THROW(radon_average(GridFunction::delta(1), parabola(), 3, ConvexBody::ball(1)), std::invalid_argument);
}

TEST(Variation, FamilyAndCurve) {
  OperatorSpec op{parabola(), ConvexBody::ball(1), {1, 2, 4, 8}, OperatorKind::average, std::nullopt, Backend::direct};
  auto fam = operator_family(GridFunction::delta(2), op);
  ASSERT_EQ(fam.size(), 4u);
  for (const auto& g : fam) EXPECT_EQ(g.lo(), fam.back().lo());
  auto curve = variation_curve(GridFunction::delta(2), op, 2.0, 2.0);
  EXPECT_GT(curve.ratio(), 0.0);
  EXPECT_TRUE(std::isfinite(curve.ratio()));
  // the variation dominates the last increment
  auto last = combine(1.0, fam[3], -1.0, fam[2]);
  EXPECT_GE(curve.variation_norm + 1e-12, last.norm(2.0));
}

TEST(Variation, NormSweepIsDeterministic) {
  OperatorSpec op{parabola(), ConvexBody::ball(1), {1, 2, 4}, OperatorKind::average, std::nullopt, Backend::direct};
  EnsembleSpec e{6, 8, 99};
  auto a = norm_sweep(2.0, {2.5, 3.0}, e, op, 1);
  auto b = norm_sweep(2.0, {2.5, 3.0}, e, op, 3);
  ASSERT_EQ(a.per_r.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.per_r[i].ratios, b.per_r[i].ratios);
  EXPECT_EQ(a.fitted_constant, b.fitted_constant);
  EXPECT_GT(a.fitted_constant, 0.0);
}
