#pragma once

// Complete Gauss sums, the discrete multipliers of the averaging and
// truncated singular operators, weighted Weyl sums, the continuous
// oscillatory integrals Phi_N and Psi_t, and the major-arc approximation
// checks that compare the discrete multipliers with G(a/q) times their
// continuous counterparts.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "radonlab/common.hpp"
#include "radonlab/poly.hpp"
#include "radonlab/quadrature.hpp"

namespace radonlab {

// ---------------------------------------------------------------------------
// points of the torus
// ---------------------------------------------------------------------------

/// a/q with numerators indexed by Gamma, representatives in [0, q).
struct RationalPoint {
  std::vector<long> a;
  long q = 1;

  RationalPoint() = default;
  RationalPoint(std::vector<long> num, long den) : a(std::move(num)), q(den) {
    require(q >= 1, "RationalPoint: denominator must be >= 1");
    for (long& v : a) v = ((v % q) + q) % q;
  }

  /// gcd(q, a_gamma : gamma) == 1, i.e. a in A_q.
  bool reduced() const {
    long g = q;
    for (long v : a) g = gcd_long(g, v);
    return g == 1;
  }

  std::vector<double> as_real() const {
    std::vector<double> x(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) x[i] = static_cast<double>(a[i]) / static_cast<double>(q);
    return x;
  }

  auto operator<=>(const RationalPoint&) const = default;
};

/// Frequency reduced into [-1/2, 1/2)^d.
struct FrequencyPoint {
  std::vector<double> xi;
  explicit FrequencyPoint(std::vector<double> x) : xi(std::move(x)) {
    for (double& v : xi) v = centered_frac(v);
  }
};

/// Coordinatewise torus difference xi - a/q reduced into [-1/2, 1/2).
inline std::vector<double> torus_offset(std::span<const double> xi, const RationalPoint& aq) {
  require(xi.size() == aq.a.size(), "torus_offset: dimension mismatch");
  std::vector<double> th(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i)
    th[i] = centered_frac(xi[i] - static_cast<double>(aq.a[i]) / static_cast<double>(aq.q));
  return th;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund kernels
// ---------------------------------------------------------------------------

struct CZKernel {
  int k = 1;
  std::string name;
  std::function<double(std::span<const double>)> eval;
  double operator()(std::span<const double> y) const { return eval(y); }
  double at_lattice(std::span<const long> y) const {
    std::vector<double> v(y.begin(), y.end());
    return eval(v);
  }
};

/// K(y) = c / y on R.
inline CZKernel hilbert_kernel(double c = 1.0) {
  return {1, "hilbert", [c](std::span<const double> y) { return c / y[0]; }};
}

/// K(y) = c (y1^2 - y2^2) / |y|^4 on R^2 (mean zero on every circle).
inline CZKernel second_order_riesz_kernel(double c = 1.0 / 3.0) {
  return {2, "riesz2", [c](std::span<const double> y) {
            double r2 = y[0] * y[0] + y[1] * y[1];
            return c * (y[0] * y[0] - y[1] * y[1]) / (r2 * r2);
          }};
}

struct KernelCertificate {
  double size_gradient_max = 0.0;  // max of |y|^k |K| + |y|^{k+1} |grad K| over sampled |y| >= 1
  double cancellation_max = 0.0;  // max |\int_{annulus} K| / \int_{annulus} |K|
};

/// Samples the size/gradient bound on annuli 1 <= |y| <= 64 (central finite
/// differences) and the cancellation integral on dyadic annuli.
inline KernelCertificate certify_kernel(const CZKernel& K, const ConvexBody& body) {
  require(K.k == body.dim(), "certify_kernel: kernel and body dimensions differ");
  require(K.k == 1 || K.k == 2, "certify_kernel: k must be 1 or 2");
  KernelCertificate c;
  const double h = 1e-6;
  for (int ri = 0; ri <= 24; ++ri) {
    double rad = std::pow(2.0, ri / 4.0);
    int nang = K.k == 1 ? 2 : 64;
    for (int ai = 0; ai < nang; ++ai) {
      std::vector<double> y(static_cast<std::size_t>(K.k));
      if (K.k == 1) {
        y[0] = ai == 0 ? rad : -rad;
      } else {
        double th = 2 * std::numbers::pi * (ai + 0.5) / nang;
        y[0] = rad * std::cos(th);
        y[1] = rad * std::sin(th);
      }
      double g2 = 0;
      for (int d = 0; d < K.k; ++d) {
        auto yp = y, ym = y;
        yp[static_cast<std::size_t>(d)] += h * rad;
        ym[static_cast<std::size_t>(d)] -= h * rad;
        double gd = (K(yp) - K(ym)) / (2 * h * rad);
        g2 += gd * gd;
      }
      double v = std::pow(rad, K.k) * std::abs(K(y)) + std::pow(rad, K.k + 1) * std::sqrt(g2);
      c.size_gradient_max = std::max(c.size_gradient_max, v);
    }
  }
  for (int m = 0; m < 6; ++m) {
    double s = std::ldexp(1.0, m), t = 2 * s;
    QuadOptions opt;
    opt.tol = 1e-12;
    auto ik = integrate_shell(body, s, t, [&](std::span<const double> y) { return cplx(K(y), 0); }, 1.0 / s, opt);
    auto iabs = integrate_shell(body, s, t, [&](std::span<const double> y) { return cplx(std::abs(K(y)), 0); }, 1.0 / s, opt);
    c.cancellation_max = std::max(c.cancellation_max, std::abs(ik.value) / std::abs(iabs.value));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Gauss sums
// ---------------------------------------------------------------------------

inline constexpr double kMaxGaussTerms = 1e8;

inline long powmod(long base, int e, long q) {
  i128 r = 1 % q, b = ((base % q) + q) % q;
  for (int i = 0; i < e; ++i) r = (r * b) % q;
  return static_cast<long>(r);
}

/// G(a/q) = q^{-k} sum_{y in N_q^k} e(<a/q, Q(y)>), phases from exact residues.
inline cplx gauss_sum(const RationalPoint& aq, const CanonicalMapping& Q) {
  require(static_cast<int>(aq.a.size()) == Q.d(), "gauss_sum: numerator length must equal |Gamma|");
  require(aq.reduced(), "gauss_sum: a/q must be reduced (a in A_q)");
  const long q = aq.q;
  const int k = Q.k();
  double terms = std::pow(static_cast<double>(q), k);
  if (terms > kMaxGaussTerms) throw budget_exceeded("gauss_sum: q^k above 1e8", terms);
  std::vector<long> count(static_cast<std::size_t>(q), 0);
  std::vector<long> y(static_cast<std::size_t>(k), 0);
  for (;;) {
    i128 r = 0;
    for (std::size_t g = 0; g < Q.gamma().size(); ++g) {
      if (aq.a[g] == 0) continue;
      i128 mono = 1;
      const auto& e = Q.gamma()[g].exps;
      for (int i = 0; i < k; ++i) mono = (mono * powmod(y[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)], q)) % q;
      r = (r + mono * aq.a[g]) % q;
    }
    ++count[static_cast<std::size_t>(r)];
    int i = k - 1;
    while (i >= 0 && y[static_cast<std::size_t>(i)] == q - 1) {
      y[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++y[static_cast<std::size_t>(i)];
  }
  std::vector<cplx> terms_v(static_cast<std::size_t>(q));
  for (long r = 0; r < q; ++r) {
    double ang = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(q);
    terms_v[static_cast<std::size_t>(r)] = static_cast<double>(count[static_cast<std::size_t>(r)]) * cplx(std::cos(ang), std::sin(ang));
  }
  return pairwise_sum(std::span<const cplx>(terms_v)) / terms;
}

/// Enumerates A_q = {a in [0,q)^d : gcd(q, a) = 1}.
template <class Fn>
void for_each_reduced_numerator(long q, int d, Fn&& fn) {
  std::vector<long> a(static_cast<std::size_t>(d), 0);
  for (;;) {
    long g = q;
    for (long v : a) g = gcd_long(g, v);
    if (g == 1) fn(RationalPoint(a, q));
    int i = d - 1;
    while (i >= 0 && a[static_cast<std::size_t>(i)] == q - 1) {
      a[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++a[static_cast<std::size_t>(i)];
  }
}

/// max_{a in A_q} |G(a/q)|. Monomial residues over N_q^k are tabulated once
/// and shared by every numerator.
inline double gauss_sum_max(long q, const CanonicalMapping& Q) {
  const int k = Q.k();
  const double terms = std::pow(static_cast<double>(q), k);
  if (terms > kMaxGaussTerms) throw budget_exceeded("gauss_sum_max: q^k above 1e8", terms);
  const std::size_t n = static_cast<std::size_t>(terms), d = Q.gamma().size();
  std::vector<long> mono(d * n);
  std::vector<long> y(static_cast<std::size_t>(k), 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t g = 0; g < d; ++g) {
      i128 m = 1;
      const auto& e = Q.gamma()[g].exps;
      for (int i = 0; i < k; ++i) m = (m * powmod(y[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)], q)) % q;
      mono[g * n + j] = static_cast<long>(m);
    }
    for (int i = k - 1; i >= 0; --i) {
      if (++y[static_cast<std::size_t>(i)] < q) break;
      y[static_cast<std::size_t>(i)] = 0;
    }
  }
  std::vector<cplx> roots(static_cast<std::size_t>(q));
  for (long r = 0; r < q; ++r) roots[static_cast<std::size_t>(r)] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(q));
  std::vector<long> count(static_cast<std::size_t>(q)), res(n);
  std::vector<cplx> weighted(static_cast<std::size_t>(q));
  double best = 0;
  for_each_reduced_numerator(q, Q.d(), [&](const RationalPoint& aq) {
    std::fill(res.begin(), res.end(), 0L);
    for (std::size_t g = 0; g < d; ++g) {
      const long a = aq.a[g];
      if (a == 0) continue;
      const long* m = mono.data() + g * n;
      for (std::size_t j = 0; j < n; ++j) res[j] = (res[j] + a * m[j]) % q;
    }
    std::fill(count.begin(), count.end(), 0L);
    for (long r : res) ++count[static_cast<std::size_t>(r)];
    for (long r = 0; r < q; ++r) weighted[static_cast<std::size_t>(r)] = static_cast<double>(count[static_cast<std::size_t>(r)]) * roots[static_cast<std::size_t>(r)];
    best = std::max(best, std::abs(pairwise_sum(std::span<const cplx>(weighted))) / terms);
  });
  return best;
}

struct GaussDecayFit {
  std::vector<long> q;
  std::vector<double> max_abs;
  double delta = 0.0;  // fitted decay exponent: log max|G| ~ c - delta log q
  double constant = 0.0;  // e^c
};

inline GaussDecayFit gauss_decay_fit(long q_max, const CanonicalMapping& Q, long q_min = 1) {
  require(q_min >= 1 && q_max > q_min, "gauss_decay_fit: need 1 <= q_min < q_max");
  GaussDecayFit f;
  std::vector<double> lx, ly;
  const std::size_t count = static_cast<std::size_t>(q_max - q_min + 1);
  f.max_abs.assign(count, 0.0);
  parallel_for(count, [&](std::size_t i) { f.max_abs[i] = gauss_sum_max(q_min + static_cast<long>(i), Q); });
  for (std::size_t i = 0; i < count; ++i) {
    const long q = q_min + static_cast<long>(i);
    const double m = f.max_abs[i];
    f.q.push_back(q);
    if (m > 0) {
      lx.push_back(std::log(static_cast<double>(q)));
      ly.push_back(std::log(m));
    }
  }
  auto fit = least_squares(lx, ly);
  f.delta = -fit.slope;
  f.constant = std::exp(fit.intercept);
  return f;
}

// ---------------------------------------------------------------------------
// discrete multipliers
// ---------------------------------------------------------------------------

inline constexpr double kMaxLatticePoints = 1e8;

template <class Mapping>
double lattice_phase(const Mapping& P, std::span<const double> xi, std::span<const long> y) {
  auto z = P.eval(y);
  require(z.size() == xi.size(), "multiplier: frequency dimension must equal the mapping's target dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += frac_product(xi[i], z[i]);
  return s;
}

inline void check_lattice_budget(const ConvexBody& G, double N) {
  double est = std::pow(2 * G.sup_bound() * N + 1, G.dim());
  if (est > kMaxLatticePoints) throw budget_exceeded("lattice too large (>1e8 points)", est);
}

/// m_N(xi) = |G_N|^{-1} sum_{y in G_N} e(<xi, P(y)>)
template <class Mapping>
cplx avg_multiplier(long N, std::span<const double> xi, const Mapping& P, const ConvexBody& G) {
  require(N >= 1, "avg_multiplier: N must be >= 1");
  require(G.dim() == P.k(), "avg_multiplier: body dimension must equal k");
  check_lattice_budget(G, static_cast<double>(N));
  auto pts = lattice_points(G, static_cast<double>(N));
  std::vector<cplx> terms(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) terms[i] = expi2pi(lattice_phase(P, xi, pts[i]));
  return pairwise_sum(std::span<const cplx>(terms)) / static_cast<double>(pts.size());
}

/// m_N(xi) = sum_{y in G_N \ {0}} e(<xi, P(y)>) K(y)
template <class Mapping>
cplx sing_multiplier(long N, std::span<const double> xi, const Mapping& P, const CZKernel& K, const ConvexBody& G) {
  require(N >= 1, "sing_multiplier: N must be >= 1");
  require(G.dim() == P.k() && K.k == P.k(), "sing_multiplier: dimensions of kernel, body and mapping differ");
  check_lattice_budget(G, static_cast<double>(N));
  auto pts = lattice_points(G, static_cast<double>(N));
  std::vector<cplx> terms;
  terms.reserve(pts.size());
  for (const auto& y : pts) {
    if (std::all_of(y.begin(), y.end(), [](long v) { return v == 0; })) continue;
    terms.push_back(expi2pi(lattice_phase(P, xi, y)) * K.at_lattice(y));
  }
  return pairwise_sum(std::span<const cplx>(terms));
}

// ---------------------------------------------------------------------------
// Weyl sums
// ---------------------------------------------------------------------------

struct RealTerm {
  MultiIndex gamma;
  long double coeff = 0;
};

/// Real-coefficient polynomial phase P(x) = sum_gamma xi_gamma x^gamma.
class RealPolynomial {
 public:
  RealPolynomial(int k, std::vector<RealTerm> terms) : k_(k), terms_(std::move(terms)) {
    for (const auto& t : terms_) require(t.gamma.size() == k_, "RealPolynomial: multi-index has wrong length");
  }
  /// sum_gamma xi_gamma x^gamma over a canonical Gamma with coefficients xi.
  static RealPolynomial from_frequency(const std::vector<MultiIndex>& gamma, std::span<const double> xi, double scale = 1.0) {
    require(gamma.size() == xi.size(), "RealPolynomial::from_frequency: dimension mismatch");
    std::vector<RealTerm> t;
    for (std::size_t i = 0; i < gamma.size(); ++i)
      t.push_back({gamma[i], static_cast<long double>(xi[i]) * std::pow(static_cast<long double>(scale), gamma[i].degree())});
    return RealPolynomial(gamma.front().size(), t);
  }
  int k() const { return k_; }
  const std::vector<RealTerm>& terms() const { return terms_; }

  /// P(n) mod 1 for an integer point.
  double phase_at(std::span<const long> n) const {
    long double s = 0;
    for (const auto& t : terms_) {
      long double f = std::fmod(t.coeff * static_cast<long double>(monomial(n, t.gamma)), 1.0L);
      s += f;
    }
    return static_cast<double>(s - std::floor(s));
  }

  /// P(y) at a real point.
  double value(std::span<const double> y) const {
    double s = 0;
    for (const auto& t : terms_) {
      double m = static_cast<double>(t.coeff);
      for (std::size_t i = 0; i < y.size(); ++i) m *= std::pow(y[i], t.gamma.exps[i]);
      s += m;
    }
    return s;
  }

  /// Upper bound for |grad P| on the ball of the given radius.
  double gradient_bound(double radius) const {
    double g = 0;
    for (const auto& t : terms_) {
      int deg = t.gamma.degree();
      if (deg > 0) g += std::abs(static_cast<double>(t.coeff)) * deg * std::pow(std::max(radius, 1e-300), deg - 1);
    }
    return g;
  }

 private:
  int k_;
  std::vector<RealTerm> terms_;
};

using Weight = std::function<cplx(std::span<const long>)>;

inline cplx unit_weight(std::span<const long>) { return 1.0; }

/// S = sum_{n in points} e(P(n)) phi(n)
inline cplx weyl_sum(const RealPolynomial& P, std::span<const IVec> points, const Weight& phi = unit_weight) {
  if (static_cast<double>(points.size()) > kMaxLatticePoints) throw budget_exceeded("weyl_sum: region too large", static_cast<double>(points.size()));
  std::vector<cplx> terms(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) terms[i] = expi2pi(P.phase_at(points[i])) * phi(points[i]);
  return pairwise_sum(std::span<const cplx>(terms));
}

/// Sum over Omega_N = x0 + G_N.
inline cplx weyl_sum(const RealPolynomial& P, const ConvexBody& G, double N, const IVec& center = {}, const Weight& phi = unit_weight) {
  check_lattice_budget(G, N);
  auto pts = lattice_points(G, N);
  if (!center.empty()) {
    require(center.size() == static_cast<std::size_t>(G.dim()), "weyl_sum: center dimension");
    for (auto& p : pts)
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += center[i];
  }
  return weyl_sum(P, pts, phi);
}

/// Continued-fraction convergents p/q of x with q <= q_max.
inline std::vector<std::pair<long, long>> convergents(long double x, long q_max) {
  std::vector<std::pair<long, long>> out;
  long p0 = 1, q0 = 0, p1 = static_cast<long>(std::floor(x)), q1 = 1;
  long double rem = x - std::floor(x);
  out.push_back({p1, q1});
  while (rem > 1e-18L) {
    long double inv = 1.0L / rem;
    long a = static_cast<long>(std::floor(inv));
    rem = inv - static_cast<long double>(a);
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > q_max) break;
    out.push_back({p2, q2});
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return out;
}

struct WeylDecayPoint {
  long N = 0;
  double normalized = 0.0;  // |S_N| / N^k
  std::optional<long> window_q;  // a convergent denominator inside [(log N)^beta, N^{|gamma0|} (log N)^{-beta}]
};

struct WeylDecayProbe {
  std::vector<WeylDecayPoint> points;
  double alpha = 0.0;  // fit of |S_N|/N^k ~ C (log N)^{-alpha}
  double power = 0.0;  // fit of |S_N|/N^k ~ C N^{-power}
  bool decreasing = true;
};

/// Decay sweep of |S_N| / N^k over Omega_N = G_N with unit weight; the
/// window test uses the convergents of the coefficient of gamma0.
inline WeylDecayProbe weyl_decay_probe(const RealPolynomial& P, const ConvexBody& G, const std::vector<long>& Ns,
                                       const MultiIndex& gamma0, double beta) {
  require(Ns.size() >= 2, "weyl_decay_probe: need at least two N");
  long double coeff = 0;
  bool found = false;
  for (const auto& t : P.terms())
    if (t.gamma == gamma0) {
      coeff = t.coeff;
      found = true;
    }
  require(found, "weyl_decay_probe: gamma0 is not a term of P");
  WeylDecayProbe out;
  std::vector<double> lx, llx, ly;
  for (long N : Ns) {
    WeylDecayPoint pt;
    pt.N = N;
    double s = std::abs(weyl_sum(P, G, static_cast<double>(N)));
    pt.normalized = s / std::pow(static_cast<double>(N), G.dim());
    double L = std::log(static_cast<double>(N));
    double lo = std::pow(L, beta), hi = std::pow(static_cast<double>(N), gamma0.degree()) * std::pow(L, -beta);
    for (auto [p, q] : convergents(coeff, static_cast<long>(std::min(hi, 1e15)))) {
      (void)p;
      if (q >= lo && q <= hi) {
        pt.window_q = q;
        break;
      }
    }
    if (!out.points.empty() && pt.normalized > out.points.back().normalized) out.decreasing = false;
    out.points.push_back(pt);
    lx.push_back(L);
    llx.push_back(std::log(L));
    ly.push_back(std::log(pt.normalized));
  }
  out.alpha = -least_squares(llx, ly).slope;
  out.power = -least_squares(lx, ly).slope;
  return out;
}

// ---------------------------------------------------------------------------
// continuous multipliers
// ---------------------------------------------------------------------------

/// Phi_N(xi) = |G|^{-1} \int_G e(<xi, Q(N y)>) dy
inline QuadResult phi_N(double N, std::span<const double> xi, const CanonicalMapping& Q, const ConvexBody& G, const QuadOptions& opt = {}) {
  require(N >= 1, "phi_N: N must be >= 1");
  require(G.dim() == Q.k(), "phi_N: body dimension must equal k");
  if (std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; })) return {1.0, 0.0, 0};
  auto phase = RealPolynomial::from_frequency(Q.gamma(), xi, N);
  double rate = phase.gradient_bound(G.sup_bound() * std::sqrt(static_cast<double>(G.dim())));
  auto r = integrate_shell(G, 0.0, 1.0, [&](std::span<const double> y) { return expi2pi(phase.value(y)); }, rate, opt);
  double vol = G.volume();
  return {r.value / vol, r.error / vol, r.level};
}

/// \int_{G_t \ G_s} (e(<xi, Q(y)>) - subtract) K(y) dy
inline QuadResult kernel_shell(double s, double t, std::span<const double> xi, const CanonicalMapping& Q, const CZKernel& K,
                               const ConvexBody& G, bool subtract_one, const QuadOptions& opt = {}) {
  auto phase = RealPolynomial::from_frequency(Q.gamma(), xi, 1.0);
  double rate = phase.gradient_bound(t * G.sup_bound() * std::sqrt(static_cast<double>(G.dim()))) + 1.0 / s;
  const double one = subtract_one ? 1.0 : 0.0;
  return integrate_shell(G, s, t, [&](std::span<const double> y) { return (expi2pi(phase.value(y)) - one) * K(y); }, rate, opt);
}

/// Psi_t(xi) = p.v. \int_{G_t} e(<xi, Q(y)>) K(y) dy, summed over the shells
/// G_{t 2^-m} \ G_{t 2^-m-1}. Cancellation lets each shell integrate
/// (e(...) - 1) K, so the terms decay geometrically.
inline cplx psi_t(double t, std::span<const double> xi, const CanonicalMapping& Q, const CZKernel& K, const ConvexBody& G,
                  double shell_tol = 1e-10) {
  require(t > 0, "psi_t: t must be positive");
  require(G.dim() == Q.k() && K.k == Q.k(), "psi_t: dimensions of kernel, body and mapping differ");
  if (std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; })) return 0.0;
  // the subtraction is only valid for kernels with vanishing shell integrals
  {
    QuadOptions copt;
    copt.tol = 1e-12;
    double s = t / 2;
    auto ik = integrate_shell(G, s, t, [&](std::span<const double> y) { return cplx(K(y), 0); }, 1.0 / s, copt);
    auto ia = integrate_shell(G, s, t, [&](std::span<const double> y) { return cplx(std::abs(K(y)), 0); }, 1.0 / s, copt);
    if (std::abs(ik.value) > 1e-6 * std::abs(ia.value)) throw kernel_invalid("psi_t: kernel has no cancellation on shells");
  }
  QuadOptions opt;
  opt.tol = shell_tol * 0.1;
  std::vector<cplx> parts;
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 400; ++m) {
    double hi = std::ldexp(t, -m), lo = hi / 2;
    cplx term = kernel_shell(lo, hi, xi, Q, K, G, true, opt).value;
    parts.push_back(term);
    double mag = std::abs(term);
    if (m >= 2 && mag < shell_tol) return pairwise_sum(std::span<const cplx>(parts));
    if (m >= 40 && mag > 0.9 * prev) throw kernel_invalid("psi_t: shell contributions are not decaying");
    prev = mag;
  }
  throw kernel_invalid("psi_t: shell series did not converge");
}

/// Psi_N - Psi_M = \int_{G_N \ G_M} e(<xi, Q(y)>) K(y) dy for 0 < M < N.
inline cplx psi_difference(double N, double M, std::span<const double> xi, const CanonicalMapping& Q, const CZKernel& K,
                           const ConvexBody& G, const QuadOptions& opt = {}) {
  require(N > M && M > 0, "psi_difference: need 0 < M < N");
  return kernel_shell(M, N, xi, Q, K, G, false, opt).value;
}

// ---------------------------------------------------------------------------
// major-arc approximation
// ---------------------------------------------------------------------------

struct DiophantineWindow {
  double L1 = 1, L2 = 1, L3 = 1;
};

inline void check_major_arc(long N, std::span<const double> xi, const RationalPoint& aq, const DiophantineWindow& w,
                            const CanonicalMapping& Q, const char* who) {
  const std::string p = who;
  require(static_cast<int>(xi.size()) == Q.d(), p + ": xi must have |Gamma| coordinates");
  require(aq.reduced(), p + ": a must lie in A_q");
  require(1 <= aq.q, p + ": need q >= 1");
  require(static_cast<double>(aq.q) <= w.L3, p + ": need q <= L3");
  require(w.L3 <= std::sqrt(static_cast<double>(N)), p + ": need L3 <= N^{1/2}");
  require(w.L1 >= static_cast<double>(N), p + ": need L1 >= N");
  require(w.L2 >= 1, p + ": need L2 >= 1");
  auto th = torus_offset(xi, aq);
  for (std::size_t g = 0; g < th.size(); ++g) {
    double lim = std::pow(w.L1, -Q.gamma()[g].degree()) * w.L2;
    require(std::abs(th[g]) <= lim * (1 + 1e-12), p + ": |xi_gamma - a_gamma/q| exceeds L1^{-|gamma|} L2");
  }
}

struct ApproximationCheck {
  double error = 0.0;
  double bound = 0.0;
  double ratio() const { return bound > 0 ? error / bound : 0.0; }
};

inline double major_arc_bound(long N, const DiophantineWindow& w, const CanonicalMapping& Q) {
  double s = 0;
  for (const auto& g : Q.gamma()) s += std::pow(static_cast<double>(N) / w.L1, g.degree());
  return w.L2 * w.L3 / static_cast<double>(N) * s + w.L3 / static_cast<double>(N);
}

/// |m_N(xi) - G(a/q) Phi_N(xi - a/q)| against L2 L3/N sum (N/L1)^{|gamma|} + L3/N.
inline ApproximationCheck major_arc_average_check(long N, std::span<const double> xi, const RationalPoint& aq, const DiophantineWindow& w,
                                      const CanonicalMapping& Q, const ConvexBody& G) {
  check_major_arc(N, xi, aq, w, Q, "major_arc_average_check");
  auto th = torus_offset(xi, aq);
  cplx m = avg_multiplier(N, xi, Q, G);
  cplx approx = gauss_sum(aq, Q) * phi_N(static_cast<double>(N), th, Q, G).value;
  return {std::abs(m - approx), major_arc_bound(N, w, Q)};
}

/// |m_N - m_M - G(a/q)(Psi_N - Psi_M)(xi - a/q)| for the singular multipliers.
inline ApproximationCheck major_arc_singular_check(long N, long M, std::span<const double> xi, const RationalPoint& aq,
                                      const DiophantineWindow& w, const CanonicalMapping& Q, const CZKernel& K,
                                      const ConvexBody& G) {
  check_major_arc(N, xi, aq, w, Q, "major_arc_singular_check");
  require(M >= 1 && M <= N, "major_arc_singular_check: need 1 <= M <= N");
  auto th = torus_offset(xi, aq);
  cplx diff = sing_multiplier(N, xi, Q, K, G) - sing_multiplier(M, xi, Q, K, G);
  cplx approx = M == N ? cplx(0.0) : gauss_sum(aq, Q) * psi_difference(static_cast<double>(N), static_cast<double>(M), th, Q, K, G);
  return {std::abs(diff - approx), major_arc_bound(N, w, Q)};
}

}  // namespace radonlab
