#pragma once

// Dyadic martingales on [0,1)^m: conditional expectations E_k, differences
// D_k, square and maximal functions, jump counts and r-variation along the
// martingale, a good-lambda measure comparison, plus continuous averages over
// dilated bodies with their t-derivative.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "radonlab/common.hpp"
#include "radonlab/expsum.hpp"
#include "radonlab/poly.hpp"
#include "radonlab/quadrature.hpp"
#include "radonlab/variation.hpp"

namespace radonlab {

// ---------------------------------------------------------------------------
// dyadic fields
// ---------------------------------------------------------------------------

/// Cell values on the level-L dyadic grid of [0,1)^m (2^{mL} cells), row-major.
class DyadicField {
 public:
  DyadicField(int m, int L) : m_(m), L_(L) {
    require(m >= 1 && L >= 0, "DyadicField: need m >= 1 and L >= 0");
    require(m * L <= 26, "DyadicField: more than 2^26 cells");
    values_.assign(std::size_t{1} << (m * L), 0.0);
  }
  DyadicField(int m, int L, std::vector<double> v) : DyadicField(m, L) {
    require(v.size() == values_.size(), "DyadicField: value count must be 2^{mL}");
    values_ = std::move(v);
  }
  /// Cell averages approximated by the cell-center values of g.
  static DyadicField sample(int m, int L, const std::function<double(std::span<const double>)>& g) {
    DyadicField f(m, L);
    const double h = std::ldexp(1.0, -L);
    std::vector<double> x(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto c = f.cell(i);
      for (int j = 0; j < m; ++j) x[static_cast<std::size_t>(j)] = (static_cast<double>(c[static_cast<std::size_t>(j)]) + 0.5) * h;
      f.values_[i] = g(x);
    }
    return f;
  }

  int dim() const { return m_; }
  int depth() const { return L_; }
  std::size_t size() const { return values_.size(); }
  double cell_measure() const { return std::ldexp(1.0, -m_ * L_); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Integer cell coordinates of the flat index.
  std::vector<long> cell(std::size_t i) const {
    std::vector<long> c(static_cast<std::size_t>(m_));
    const std::size_t side = std::size_t{1} << L_;
    for (int j = m_ - 1; j >= 0; --j) {
      c[static_cast<std::size_t>(j)] = static_cast<long>(i % side);
      i /= side;
    }
    return c;
  }
  /// Flat index of the level-k ancestor of finest cell i, within the 2^{mk} grid.
  std::size_t ancestor(std::size_t i, int k) const {
    auto c = cell(i);
    std::size_t out = 0;
    for (int j = 0; j < m_; ++j) out = (out << k) | static_cast<std::size_t>(c[static_cast<std::size_t>(j)] >> (L_ - k));
    return out;
  }

  /// (integral |f|^p)^{1/p} with respect to Lebesgue measure.
  double norm(double p) const {
    if (std::isinf(p)) {
      double mx = 0;
      for (double v : values_) mx = std::max(mx, std::abs(v));
      return mx;
    }
    CompensatedSum s;
    for (double v : values_) s.add(std::pow(std::abs(v), p));
    return std::pow(s.value() * cell_measure(), 1.0 / p);
  }
  double integral() const {
    CompensatedSum s;
    for (double v : values_) s.add(v);
    return s.value() * cell_measure();
  }

 private:
  int m_, L_;
  std::vector<double> values_;
};

/// Per-level averages E_0 .. E_L; level k holds 2^{mk} cell values, each
/// the mean of its 2^m children at level k + 1.
class MartingaleSequence {
 public:
  explicit MartingaleSequence(const DyadicField& f) : f_(&f), levels_(static_cast<std::size_t>(f.depth()) + 1) {
    const int m = f.dim(), L = f.depth();
    levels_[static_cast<std::size_t>(L)] = f.values();
    for (int k = L - 1; k >= 0; --k) {
      const auto& fine = levels_[static_cast<std::size_t>(k + 1)];
      auto& coarse = levels_[static_cast<std::size_t>(k)];
      coarse.assign(std::size_t{1} << (m * k), 0.0);
      const std::size_t side_f = std::size_t{1} << (k + 1);
      const double inv = std::ldexp(1.0, -m);
      // children are visited in a fixed order, so sums are reproducible
      for (std::size_t i = 0; i < fine.size(); ++i) {
        std::size_t rest = i, parent = 0, mul = 1;
        for (int j = 0; j < m; ++j) {
          parent += ((rest % side_f) >> 1) * mul;
          rest /= side_f;
          mul <<= k;
        }
        coarse[parent] += fine[i];
      }
      for (auto& v : coarse) v *= inv;
    }
  }

  int depth() const { return f_->depth(); }
  const DyadicField& field() const { return *f_; }
  const std::vector<double>& level(int k) const { return levels_[static_cast<std::size_t>(k)]; }

  /// E_k f on the finest grid.
  DyadicField expectation(int k) const {
    require(k >= 0 && k <= depth(), "conditional_expectation: level out of range");
    DyadicField out(f_->dim(), depth());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = value(k, i);
    return out;
  }
  /// E_k f at finest cell i
  double value(int k, std::size_t i) const { return levels_[static_cast<std::size_t>(k)][f_->ancestor(i, k)]; }
  /// D_k f = E_k f - E_{k-1} f at finest cell i, k >= 1
  double difference(int k, std::size_t i) const { return value(k, i) - value(k - 1, i); }
  /// (E_0 f(x), ..., E_L f(x))
  std::vector<double> path(std::size_t i) const {
    std::vector<double> p(static_cast<std::size_t>(depth()) + 1);
    for (int k = 0; k <= depth(); ++k) p[static_cast<std::size_t>(k)] = value(k, i);
    return p;
  }

 private:
  const DyadicField* f_;
  std::vector<std::vector<double>> levels_;
};

inline DyadicField conditional_expectation(const DyadicField& f, int k) {
  require(k >= 0 && k <= f.depth(), "conditional_expectation: level out of range");
  return MartingaleSequence(f).expectation(k);
}

/// E_j applied to a field that is itself given on the finest grid.
inline DyadicField conditional_expectation(const DyadicField& f, int j, int k) {
  return conditional_expectation(conditional_expectation(f, k), j);
}

struct SquareMaximal {
  DyadicField square;  // (sum_{k=1}^L |D_k f|^2)^{1/2}
  DyadicField maximal;  // max_{0<=k<=L} |E_k f|
};

inline SquareMaximal square_and_maximal(const DyadicField& f) {
  MartingaleSequence ms(f);
  SquareMaximal out{DyadicField(f.dim(), f.depth()), DyadicField(f.dim(), f.depth())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = 0, mx = std::abs(ms.value(0, i));
    for (int k = 1; k <= f.depth(); ++k) {
      double d = ms.difference(k, i);
      s += d * d;
      mx = std::max(mx, std::abs(ms.value(k, i)));
    }
    out.square.values()[i] = std::sqrt(s);
    out.maximal.values()[i] = mx;
  }
  return out;
}

/// Orthogonality: ||f||_2^2 against ||E_0 f||_2^2 + sum_k ||D_k f||_2^2.
struct OrthogonalityCheck {
  double total = 0.0;
  double decomposed = 0.0;
  double square_norm = 0.0;  // ||Sf||_2
  double centered_norm = 0.0;  // ||f - E_0 f||_2
};

inline OrthogonalityCheck orthogonality(const DyadicField& f) {
  MartingaleSequence ms(f);
  OrthogonalityCheck c;
  c.total = std::pow(f.norm(2), 2);
  CompensatedSum dec, cen;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double e0 = ms.value(0, i);
    dec.add(e0 * e0);
    for (int k = 1; k <= f.depth(); ++k) {
      double d = ms.difference(k, i);
      dec.add(d * d);
    }
    cen.add((f[i] - e0) * (f[i] - e0));
  }
  c.decomposed = dec.value() * f.cell_measure();
  c.square_norm = square_and_maximal(f).square.norm(2);
  c.centered_norm = std::sqrt(cen.value() * f.cell_measure());
  return c;
}

/// |Q^{k+1}| <= R |Q^k| for parent Q^k and child Q^{k+1} on standard
/// dyadic cubes: the ratio of parent to child measure.
inline double doubling_constant(int m, int level = 0) { return std::ldexp(1.0, -m * level) / std::ldexp(1.0, -m * (level + 1)); }

// ---------------------------------------------------------------------------
// jumps, variation, good-lambda
// ---------------------------------------------------------------------------

struct JumpField {
  DyadicField count;  // J_lambda(E_k f(x) : 0 <= k <= L)
  double lambda = 0.0;
  double norm(double p) const {  // || lambda sqrt(J_lambda) ||_p
    DyadicField g = count;
    for (auto& v : g.values()) v = lambda * std::sqrt(v);
    return g.norm(p);
  }
};

inline JumpField martingale_jump(const DyadicField& f, double lambda) {
  require(lambda > 0, "martingale_jump: lambda must be positive");
  MartingaleSequence ms(f);
  JumpField j{DyadicField(f.dim(), f.depth()), lambda};
  for (std::size_t i = 0; i < f.size(); ++i) j.count.values()[i] = static_cast<double>(jump_count(SeqSample(ms.path(i)), lambda));
  return j;
}

/// V_r(E_k f(x) : 0 <= k <= L) per cell.
inline DyadicField martingale_variation(const DyadicField& f, double r) {
  MartingaleSequence ms(f);
  DyadicField v(f.dim(), f.depth());
  for (std::size_t i = 0; i < f.size(); ++i) v.values()[i] = vr(SeqSample(ms.path(i)), r);
  return v;
}

/// ||V_r(E_k f)||_p / ||f||_p. r <= 2 is outside the inequality's range and
/// is refused unless `explore` is set.
inline double lepingle_ratio(const DyadicField& f, double p, double r, bool explore = false) {
  require(p > 1 && std::isfinite(p), "lepingle_ratio: need 1 < p < infinity");
  require(explore || r > 2, "lepingle_ratio: need r > 2");
  double fn = f.norm(p);
  return fn > 0 ? martingale_variation(f, r).norm(p) / fn : 0.0;
}

struct FieldEnsemble {
  std::size_t count = 200;
  int m = 1;
  int L = 10;
  std::uint64_t seed = 0;
};

/// Member i: i % 3 == 0 iid normal cells, 1 random Haar series with decaying
/// coefficients, 2 smooth random trigonometric profile.
inline DyadicField ensemble_field(const FieldEnsemble& e, std::size_t i) {
  Rng rng = Rng::for_trial(e.seed, i);
  DyadicField f(e.m, e.L);
  switch (i % 3) {
    case 0:
      for (auto& v : f.values()) v = rng.normal();
      break;
    case 1: {
      f.values().assign(f.size(), rng.normal());
      for (int k = 1; k <= e.L; ++k) {
        double amp = std::pow(2.0, -0.25 * k);
        std::vector<double> coef(std::size_t{1} << (e.m * (k - 1)));
        for (auto& c : coef) c = amp * rng.normal();
        for (std::size_t x = 0; x < f.size(); ++x) {
          auto c = f.cell(x);
          // the sign of a level-k Haar function is the k-th binary digit in the first coordinate
          long bit = (c[0] >> (e.L - k)) & 1;
          f.values()[x] += (bit ? -1.0 : 1.0) * coef[f.ancestor(x, k - 1)];
        }
      }
      break;
    }
    default: {
      std::vector<double> fr(static_cast<std::size_t>(e.m)), ph(static_cast<std::size_t>(e.m));
      for (int j = 0; j < e.m; ++j) {
        fr[static_cast<std::size_t>(j)] = static_cast<double>(rng.integer(1, 12));
        ph[static_cast<std::size_t>(j)] = rng.uniform(0, 1);
      }
      double c0 = rng.normal();
      f = DyadicField::sample(e.m, e.L, [&](std::span<const double> x) {
        double s = c0;
        for (std::size_t j = 0; j < x.size(); ++j) s += std::cos(2 * std::numbers::pi * (fr[j] * x[j] + ph[j]));
        return s;
      });
    }
  }
  return f;
}

struct RatioSweep {
  double p = 2.0;
  std::vector<double> rs;
  std::vector<double> max_ratio;  // over the ensemble, per r
  std::vector<double> scaled;  // max ratio * (r - 2) / r
  double fitted_constant = 0.0;  // max of scaled
  bool finite = true;
};

inline RatioSweep ratio_sweep(const FieldEnsemble& e, double p, const std::vector<double>& rs, unsigned threads = 0) {
  for (double r : rs) require(r > 2, "ratio_sweep: need r > 2");
  std::vector<std::vector<double>> ratio(e.count, std::vector<double>(rs.size()));
  parallel_for(e.count, [&](std::size_t i) {
    auto f = ensemble_field(e, i);
    for (std::size_t a = 0; a < rs.size(); ++a) ratio[i][a] = lepingle_ratio(f, p, rs[a]);
  }, threads);
  RatioSweep s;
  s.p = p;
  s.rs = rs;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    double mx = 0;
    for (std::size_t i = 0; i < e.count; ++i) mx = std::max(mx, ratio[i][a]);
    s.max_ratio.push_back(mx);
    s.scaled.push_back(mx * (rs[a] - 2) / rs[a]);
    s.fitted_constant = std::max(s.fitted_constant, s.scaled.back());
    if (!std::isfinite(mx)) s.finite = false;
  }
  return s;
}

struct GoodLambda {
  double lhs = 0.0;  // |{V_r > lambda, Mf < lambda/2}|
  double rhs = 0.0;  // |{Sf > lambda}| + lambda^{-q} (r-2)^{-q/2} \int_{Sf <= lambda} Sf^q
  double ratio() const {
    if (lhs == 0) return 0.0;
    return rhs > 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  }
};

inline GoodLambda good_lambda_check(const DyadicField& f, double lambda, double q, double r) {
  require(q >= 2, "good_lambda_check: need q >= 2");
  require(lambda > 0, "good_lambda_check: lambda must be positive");
  require(r > 2, "good_lambda_check: need r > 2");
  auto sm = square_and_maximal(f);
  auto v = martingale_variation(f, r);
  CompensatedSum lhs, big, tail;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (v[i] > lambda && sm.maximal[i] < lambda / 2) lhs.add(1.0);
    double s = sm.square[i];
    if (s > lambda)
      big.add(1.0);
    else
      tail.add(std::pow(s, q));
  }
  GoodLambda g;
  g.lhs = lhs.value() * f.cell_measure();
  g.rhs = big.value() * f.cell_measure() + std::pow(lambda, -q) * std::pow(r - 2, -q / 2) * tail.value() * f.cell_measure();
  return g;
}

// ---------------------------------------------------------------------------
// continuous averages
// ---------------------------------------------------------------------------

/// y -> (P_1(y), ..., P_m(y)) with real coefficients.
struct RealMapping {
  int k = 1;
  std::vector<RealPolynomial> components;

  int dim() const { return static_cast<int>(components.size()); }
  std::vector<double> eval(std::span<const double> y) const {
    std::vector<double> z;
    for (const auto& c : components) z.push_back(c.value(y));
    return z;
  }
  double gradient_bound(double radius) const {
    double g = 0;
    for (const auto& c : components) g += c.gradient_bound(radius);
    return g;
  }
  /// identity on R^k
  static RealMapping identity(int k) {
    RealMapping m{k, {}};
    for (int j = 0; j < k; ++j) {
      MultiIndex e{std::vector<int>(static_cast<std::size_t>(k), 0)};
      e.exps[static_cast<std::size_t>(j)] = 1;
      m.components.emplace_back(k, std::vector<RealTerm>{{e, 1.0L}});
    }
    return m;
  }
};

using RealFunction = std::function<cplx(std::span<const double>)>;

struct ContinuousOptions {
  QuadOptions quad;
  double rate = 4.0;  // expected oscillation of t -> g(x - Q(t y)) per unit length
};

inline double body_volume(const ConvexBody& G) { return G.volume(); }

/// M_t g(x) = |G_t|^{-1} \int_{G_t} g(x - Q(y)) dy
inline QuadResult continuous_average(const RealFunction& g, std::span<const double> x, const ConvexBody& G, const RealMapping& Q, double t,
                                     const ContinuousOptions& opt = {}) {
  require(t > 0, "continuous_average: t must be positive");
  require(G.dim() == Q.k && static_cast<int>(x.size()) == Q.dim(), "continuous_average: dimension mismatch");
  std::vector<double> pt(x.size());
  auto integrand = [&](std::span<const double> y) {
    auto z = Q.eval(y);
    for (std::size_t j = 0; j < pt.size(); ++j) pt[j] = x[j] - z[j];
    return g(pt);
  };
  double rate = opt.rate * (1.0 + Q.gradient_bound(t * G.sup_bound() * std::sqrt(static_cast<double>(G.dim()))));
  auto r = integrate_shell(G, 0.0, t, integrand, rate, opt.quad);
  double vol = std::pow(t, G.dim()) * body_volume(G);
  return {r.value / vol, r.error / vol, r.level};
}

/// d/dt M_t g(x) = -(k/t) M_t g(x) + (t^k |G|)^{-1} \int_{S^{k-1}} g(x - Q(r(w) t w)) r(w)^k t^{k-1} dsigma(w)
inline QuadResult ddt_average(const RealFunction& g, std::span<const double> x, const ConvexBody& G, const RealMapping& Q, double t,
                              const ContinuousOptions& opt = {}) {
  const int k = G.dim();
  auto avg = continuous_average(g, x, G, Q, t, opt);
  std::vector<double> pt(x.size());
  auto boundary = [&](std::span<const double> w) {
    double rw = G.radial(w);
    std::vector<double> y(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) y[j] = rw * t * w[j];
    auto z = Q.eval(y);
    for (std::size_t j = 0; j < pt.size(); ++j) pt[j] = x[j] - z[j];
    return g(pt) * std::pow(rw, k) * std::pow(t, k - 1);
  };
  cplx bnd;
  double err = avg.error;
  if (k == 1) {
    double wp[1] = {1.0}, wm[1] = {-1.0};
    bnd = boundary(wp) + boundary(wm);
  } else if (k == 2) {
    double rate = opt.rate * (1.0 + Q.gradient_bound(t * G.sup_bound() * std::sqrt(2.0)) * t * G.sup_bound());
    auto r = integrate_interval(0.0, 2 * std::numbers::pi, [&](double th) {
      double w[2] = {std::cos(th), std::sin(th)};
      return boundary(std::span<const double>(w, 2));
    }, rate, opt.quad);
    bnd = r.value;
    err += r.error;
  } else {
    throw std::invalid_argument("ddt_average: implemented for k = 1 and k = 2 only");
  }
  cplx val = -static_cast<double>(k) / t * avg.value + bnd / (std::pow(t, k) * body_volume(G));
  return {val, err, avg.level};
}

/// Centered difference (M_{t+h} - M_{t-h}) / 2h.
inline cplx ddt_finite_difference(const RealFunction& g, std::span<const double> x, const ConvexBody& G, const RealMapping& Q, double t, double h,
                                  const ContinuousOptions& opt = {}) {
  require(h > 0 && h < t, "ddt_finite_difference: need 0 < h < t");
  return (continuous_average(g, x, G, Q, t + h, opt).value - continuous_average(g, x, G, Q, t - h, opt).value) / (2 * h);
}

// ---------------------------------------------------------------------------
// sampling inequality for differentiable functions
// ---------------------------------------------------------------------------

struct SamplingBounds {
  double variation = 0.0;  // V_r over a fine sample of [u, v)
  double rhs_sampled = 0.0;  // (sum |a(s_j)|^r)^{1/r} + (sum (\int_{s_j}^{s_{j+1}} |a'|)^r)^{1/r}
  double rhs_holder = 0.0;  // h^{1/r-1/p} (sum |a(s_j)|^p)^{1/p} + h^{1/r-1} (v-u)^{1-1/p} (\int |a'|^p)^{1/p}
  double ratio() const { return rhs_sampled > 0 ? variation / rhs_sampled : 0.0; }
  double holder_ratio() const { return rhs_holder > 0 ? rhs_sampled / rhs_holder : 0.0; }
};

/// s_j = u + j (v - u)/h. The left side is V_r of a on `fine` equispaced
/// points of [u, v), a lower bound for the continuum variation.
inline SamplingBounds sampling_bounds(const std::function<cplx(double)>& a, const std::function<cplx(double)>& da, double u, double v,
                                      long h, double r, double p, std::size_t fine = 2048) {
  require(v > u, "sampling_bounds: need u < v");
  require(h >= 1, "sampling_bounds: h must be >= 1");
  require(r >= 1 && p >= r, "sampling_bounds: need 1 <= r <= p");
  SamplingBounds b;
  std::vector<cplx> seq(fine);
  for (std::size_t i = 0; i < fine; ++i) seq[i] = a(u + (v - u) * static_cast<double>(i) / static_cast<double>(fine));
  b.variation = vr(SeqSample(seq), r);
  QuadOptions q;
  q.tol = 1e-9;
  double sr = 0, sp = 0, ir = 0;
  for (long j = 0; j <= h; ++j) {
    double s = u + (v - u) * static_cast<double>(j) / static_cast<double>(h);
    sr += std::pow(std::abs(a(s)), r);
    sp += std::pow(std::abs(a(s)), p);
    if (j < h) {
      double s1 = u + (v - u) * static_cast<double>(j + 1) / static_cast<double>(h);
      double piece = integrate_interval(s, s1, [&](double t) { return cplx(std::abs(da(t)), 0); }, 1.0, q).value.real();
      ir += std::pow(piece, r);
    }
  }
  double ip = integrate_interval(u, v, [&](double t) { return cplx(std::pow(std::abs(da(t)), p), 0); }, 1.0, q).value.real();
  const double hd = static_cast<double>(h);
  b.rhs_sampled = std::pow(sr, 1 / r) + std::pow(ir, 1 / r);
  b.rhs_holder = std::pow(hd, 1 / r - 1 / p) * std::pow(sp, 1 / p) + std::pow(hd, 1 / r - 1) * std::pow(v - u, 1 - 1 / p) * std::pow(ip, 1 / p);
  return b;
}

}  // namespace radonlab
