#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radonlab/expsum.hpp"

using namespace radonlab;

namespace {
CanonicalMapping quadratic() { return CanonicalMapping::full(1, 2); }
CanonicalMapping linear() { return CanonicalMapping::full(1, 1); }

std::vector<std::vector<int>> exps_of(const CanonicalMapping& Q) {
  std::vector<std::vector<int>> e;
  for (const auto& g : Q.gamma()) e.push_back(g.exps);
  return e;
}
}  // namespace

TEST(Rational, RepresentativesAndReduction) {
  RationalPoint p({-1, 7}, 5);
  EXPECT_EQ(p.a, (std::vector<long>{4, 2}));
  EXPECT_TRUE(p.reduced());
  EXPECT_FALSE(RationalPoint({2, 4}, 6).reduced());
  auto th = torus_offset(std::vector<double>{0.81, 0.39}, p);
  EXPECT_NEAR(th[0], 0.01, 1e-15);
  EXPECT_NEAR(th[1], -0.01, 1e-15);
}

TEST(Gauss, MatchesDirectSummation) {
  for (const auto& Q : {quadratic(), CanonicalMapping::full(1, 3), CanonicalMapping::full(2, 1)})
    for (long q = 1; q <= 12; ++q)
      for_each_reduced_numerator(q, Q.d(), [&](const RationalPoint& aq) {
        cplx want = oracle::gauss_direct(exps_of(Q), aq.a, q);
        EXPECT_LT(std::abs(gauss_sum(aq, Q) - want), 1e-12) << q;
      });
}

TEST(Gauss, QuadraticModulusForOddDenominators) {
  auto Q = quadratic();
  for (long q = 3; q <= 199; q += 2)
    for (long a2 : {1L, 2L, q - 1}) {
      if (gcd_long(a2, q) != 1) continue;
      EXPECT_NEAR(std::abs(gauss_sum(RationalPoint({0, a2}, q), Q)), 1 / std::sqrt(static_cast<double>(q)), 1e-9) << q;
    }
}

TEST(Gauss, LinearSumsVanishExceptAtOne) {
  auto Q = linear();
  EXPECT_NEAR(std::abs(gauss_sum(RationalPoint({0}, 1), Q) - 1.0), 0.0, 1e-15);
  for (long q = 2; q < 20; ++q) EXPECT_LT(std::abs(gauss_sum(RationalPoint({1}, q), Q)), 1e-13);
}

TEST(Gauss, MaximumAgreesWithPointwiseSums) {
  for (const auto& Q : {quadratic(), CanonicalMapping::full(2, 1)})
    for (long q = 1; q <= 15; ++q) {
      double m = 0;
      for_each_reduced_numerator(q, Q.d(), [&](const RationalPoint& aq) { m = std::max(m, std::abs(gauss_sum(aq, Q))); });
      EXPECT_NEAR(gauss_sum_max(q, Q), m, 1e-13);
    }
}

TEST(Gauss, RejectsUnreducedAndOversizedInputs) {
  auto Q = quadratic();
  EXPECT_THROW(gauss_sum(RationalPoint({2, 4}, 6), Q), std::invalid_argument);
  EXPECT_THROW(gauss_sum(RationalPoint({1}, 5), Q), std::invalid_argument);
  auto Q3 = CanonicalMapping::full(3, 1);
  EXPECT_THROW(gauss_sum(RationalPoint({1, 0, 0, 0, 0, 0, 0}, 500), Q3), budget_exceeded);
}

TEST(Gauss, DecayFitOverSmallRange) {
  auto fit = gauss_decay_fit(60, quadratic());
  EXPECT_EQ(fit.q.size(), 60u);
  EXPECT_GT(fit.delta, 0.3);
}

TEST(Multiplier, TrivialFrequencyAndIntegerShift) {
  auto P = quadratic().as_polynomial();
  auto G = ConvexBody::ball(1);
  for (double x0 : {0.0, 1.0, -3.0}) {
    std::vector<double> xi{x0, 2.0};
    EXPECT_LT(std::abs(avg_multiplier(17, xi, P, G) - 1.0), 1e-14);
  }
}

TEST(Multiplier, AverageMatchesLiteralSum) {
  auto P = quadratic().as_polynomial();
  auto G = ConvexBody::ball(1);
  std::vector<double> xi{0.137, -0.291};
  cplx s = 0;
  for (long y = -9; y <= 9; ++y)
    s += std::polar(1.0, 2 * std::numbers::pi * (xi[0] * static_cast<double>(y) + xi[1] * static_cast<double>(y * y)));
  EXPECT_LT(std::abs(avg_multiplier(9, xi, P, G) - s / 19.0), 1e-13);
}

TEST(Multiplier, OddKernelGivesImaginarySymbol) {
  auto P = linear().as_polynomial();
  auto m = sing_multiplier(40, std::vector<double>{0.173}, P, hilbert_kernel(), ConvexBody::ball(1));
  EXPECT_LT(std::abs(m.real()), 1e-13);
  double want = 0;
  for (long y = 1; y <= 40; ++y) want += 2 * std::sin(2 * std::numbers::pi * 0.173 * static_cast<double>(y)) / static_cast<double>(y);
  EXPECT_NEAR(m.imag(), want, 1e-12);
}

TEST(Weyl, CompletePeriodsCancel) {
  // e(a n / q) over a full period of length q vanishes for q not dividing a
  RealPolynomial P(1, {RealTerm{MultiIndex{{1}}, 3.0L / 7.0L}});
  std::vector<IVec> pts;
  for (long n = 0; n < 70; ++n) pts.push_back({n});
  EXPECT_LT(std::abs(weyl_sum(P, pts)), 1e-12);
  EXPECT_NEAR(P.phase_at(std::vector<long>{5}), std::fmod(15.0 / 7.0, 1.0), 1e-15);
}

TEST(Weyl, ConvergentsOfPi) {
  auto c = convergents(std::numbers::pi_v<long double>, 40000);
  ASSERT_GE(c.size(), 4u);
  EXPECT_EQ(c[1], (std::pair<long, long>{22, 7}));
  EXPECT_EQ(c[3], (std::pair<long, long>{355, 113}));
}

TEST(Weyl, DecayProbeOnIrrationalQuadratic) {
  RealPolynomial P(1, {RealTerm{MultiIndex{{2}}, std::numbers::sqrt2_v<long double>}});
  auto probe = weyl_decay_probe(P, ConvexBody::ball(1), {64, 256, 1024, 4096}, MultiIndex{{2}}, 1.0);
  EXPECT_GT(probe.power, 0.2);
  for (const auto& pt : probe.points) EXPECT_TRUE(pt.window_q.has_value());
}

TEST(Continuous, LinearPhaseIsSinc) {
  auto Q = linear();
  for (double xi : {0.013, 0.21, 0.4}) {
    for (double N : {1.0, 5.0, 20.0}) {
      double x = 2 * std::numbers::pi * N * xi;
      auto r = phi_N(N, std::vector<double>{xi}, Q, ConvexBody::ball(1));
      EXPECT_NEAR(r.value.real(), std::sin(x) / x, 1e-8);
      EXPECT_NEAR(r.value.imag(), 0.0, 1e-8);
    }
  }
  EXPECT_EQ(phi_N(3.0, std::vector<double>{0.0}, Q, ConvexBody::ball(1)).value, cplx(1.0));
}

TEST(Continuous, QuadraticPhaseAgainstSimpson) {
  auto Q = quadratic();
  std::vector<double> xi{0.01, 0.003};
  const double N = 12;
  double re = oracle::simpson([&](double y) { return std::cos(2 * std::numbers::pi * (xi[0] * N * y + xi[1] * N * N * y * y)); }, -1, 1, 1e-13) / 2;
  double im = oracle::simpson([&](double y) { return std::sin(2 * std::numbers::pi * (xi[0] * N * y + xi[1] * N * N * y * y)); }, -1, 1, 1e-13) / 2;
  auto r = phi_N(N, xi, Q, ConvexBody::ball(1));
  EXPECT_NEAR(r.value.real(), re, 1e-8);
  EXPECT_NEAR(r.value.imag(), im, 1e-8);
}

TEST(Continuous, DiskAverageOfLinearPhase) {
  // |B|^{-1} \int_B e(N xi . y) dy = 2 J_1(2 pi N |xi|) / (2 pi N |xi|)
  auto Q = CanonicalMapping::full(2, 1);  // Gamma = {(0,1), (1,0), (1,1)}
  std::vector<double> xi{0.02, 0.03, 0.0};
  const double N = 3;
  double x = 2 * std::numbers::pi * N * std::hypot(xi[0], xi[1]);
  auto r = phi_N(N, xi, Q, ConvexBody::ball(2));
  EXPECT_NEAR(r.value.real(), 2 * std::cyl_bessel_j(1.0, x) / x, 1e-7);
  EXPECT_NEAR(r.value.imag(), 0.0, 1e-7);
}

TEST(Continuous, HilbertTruncationIsSineIntegral) {
  auto Q = linear();
  auto K = hilbert_kernel();
  auto G = ConvexBody::ball(1);
  for (double xi : {0.05, 0.17, -0.3})
    for (double t : {1.0, 4.0, 30.0}) {
      cplx v = psi_t(t, std::vector<double>{xi}, Q, K, G);
      EXPECT_NEAR(v.real(), 0.0, 1e-8);
      EXPECT_NEAR(v.imag(), 2 * oracle::sine_integral(2 * std::numbers::pi * xi * t), 1e-8) << xi << " " << t;
    }
}

TEST(Continuous, DifferenceOfTruncations) {
  auto Q = linear();
  auto K = hilbert_kernel();
  auto G = ConvexBody::ball(1);
  std::vector<double> xi{0.07};
  cplx d = psi_difference(20, 5, xi, Q, K, G);
  cplx want = psi_t(20, xi, Q, K, G) - psi_t(5, xi, Q, K, G);
  EXPECT_LT(std::abs(d - want), 1e-8);
}

TEST(Continuous, KernelWithoutCancellationIsRejected) {
  CZKernel bad{1, "even", [](std::span<const double> y) { return 1.0 / std::abs(y[0]); }};
  EXPECT_THROW(psi_t(4.0, std::vector<double>{0.1}, linear(), bad, ConvexBody::ball(1)), kernel_invalid);
}

TEST(Kernel, CertificatesForBuiltInKernels) {
  auto h = certify_kernel(hilbert_kernel(), ConvexBody::ball(1));
  EXPECT_LT(h.cancellation_max, 1e-10);
  EXPECT_NEAR(h.size_gradient_max, 2.0, 1e-4);
  auto r = certify_kernel(second_order_riesz_kernel(), ConvexBody::ball(2));
  EXPECT_LT(r.cancellation_max, 1e-8);
  EXPECT_TRUE(std::isfinite(r.size_gradient_max));
}

TEST(MajorArc, AdmissibilityIsEnforced) {
  auto Q = quadratic();
  auto G = ConvexBody::ball(1);
  RationalPoint aq({1, 2}, 5);
  auto xi = aq.as_real();
  DiophantineWindow w{100, 1, 5};
  EXPECT_NO_THROW(major_arc_average_check(100, xi, aq, w, Q, G));
  EXPECT_THROW(major_arc_average_check(100, xi, aq, DiophantineWindow{50, 1, 5}, Q, G), std::invalid_argument);
  EXPECT_THROW(major_arc_average_check(16, xi, aq, DiophantineWindow{16, 1, 5}, Q, G), std::invalid_argument);
  std::vector<double> far{xi[0] + 0.1, xi[1]};
  EXPECT_THROW(major_arc_average_check(100, far, aq, w, Q, G), std::invalid_argument);
}

TEST(MajorArc, ExactRationalsLeaveOnlyTheBoundaryError) {
  auto Q = quadratic();
  auto G = ConvexBody::ball(1);
  for (long N : {81L, 243L, 729L})
    for (long q : {3L, 5L, 7L}) {
      RationalPoint aq({1, 1}, q);
      auto c = major_arc_average_check(N, aq.as_real(), aq, DiophantineWindow{static_cast<double>(N), 1, static_cast<double>(q)}, Q, G);
      EXPECT_LT(c.error * static_cast<double>(N) / static_cast<double>(q), 4.0) << N << " " << q;
    }
}

TEST(MajorArc, SingularCheckAcceptsEqualTruncations) {
  auto Q = quadratic();
  RationalPoint aq({0, 1}, 3);
  auto c = major_arc_singular_check(64, 64, aq.as_real(), aq, DiophantineWindow{64, 1, 3}, Q, hilbert_kernel(), ConvexBody::ball(1));
  EXPECT_EQ(c.error, 0.0);
}
