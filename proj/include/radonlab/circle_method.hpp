#pragma once

// Ionescu-Wainger denominator sets P_N and their fraction sets U_N = R(P_N),
// the concrete smooth cutoff eta, multipliers assembled from sums over
// fractions of dilated cutoffs (Xi_n, nu, Delta), and application of periodic
// multipliers to functions on Z_M^m through the DFT.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "radonlab/common.hpp"
#include "radonlab/expsum.hpp"
#include "radonlab/fft.hpp"
#include "radonlab/operators.hpp"
#include "radonlab/poly.hpp"

namespace radonlab {

using u128 = unsigned __int128;
using bigint = boost::multiprecision::cpp_int;

inline std::string to_string_u128(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

inline bigint to_bigint(u128 v) {
  bigint b = static_cast<std::uint64_t>(v >> 64);
  b <<= 64;
  b += static_cast<std::uint64_t>(v);
  return b;
}

inline u128 from_bigint(const bigint& b) {
  require(b >= 0 && boost::multiprecision::msb(b > 0 ? b : bigint(1)) < 128, "from_bigint: value does not fit in 128 bits");
  return (static_cast<u128>(static_cast<std::uint64_t>(b >> 64)) << 64) | static_cast<std::uint64_t>(b & bigint(~std::uint64_t{0}));
}

inline std::vector<long> primes_in(long lo, long hi) {  // primes p with lo < p <= hi
  std::vector<long> out;
  if (hi < 2) return out;
  std::vector<bool> comp(static_cast<std::size_t>(hi) + 1, false);
  for (long p = 2; p <= hi; ++p) {
    if (comp[static_cast<std::size_t>(p)]) continue;
    if (p > lo) out.push_back(p);
    for (long m = p * p; m <= hi; m += p) comp[static_cast<std::size_t>(m)] = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ionescu-Wainger sets
// ---------------------------------------------------------------------------

struct IwParams {
  double rho = 1.0;
  long N = 1;

  IwParams(long n, double r) : rho(r), N(n) {
    require(rho > 0, "IwParams: rho must be positive");
    require(N >= 0, "IwParams: N must be nonnegative");
  }
  /// floor(N^{rho/2}) + 1, with the floor corrected in integer arithmetic
  long N0() const {
    if (N == 0) return 1;
    auto m = static_cast<long>(std::floor(std::pow(static_cast<long double>(N), rho / 2.0L)));
    auto le = [&](long v) { return std::pow(static_cast<long double>(v), 2.0L / rho) <= static_cast<long double>(N) * (1 + 1e-15L); };
    while (m > 0 && !le(m)) --m;
    while (le(m + 1)) ++m;
    return m + 1;
  }
  int D() const { return static_cast<int>(std::floor(2.0 / rho + 1e-12)) + 1; }
  /// exponent of p in Q0 = (N0!)^D
  long q0_exponent(long p) const {
    long e = 0, n0 = N0();
    for (long pk = p; pk <= n0; pk *= p) e += n0 / pk;
    return e * D();
  }
  bigint Q0() const {
    bigint f = 1;
    for (long i = 2; i <= N0(); ++i) f *= i;
    return boost::multiprecision::pow(f, static_cast<unsigned>(D()));
  }
  std::vector<long> small_primes() const { return primes_in(1, N0()); }
  std::vector<long> large_primes() const { return primes_in(N0(), N); }
};

inline constexpr double kDefaultSetBudget = 2e7;

struct IwSet {
  IwParams params;
  bigint Q0;
  std::vector<u128> members;  // sorted
  std::size_t divisor_count = 0;
  std::size_t pi_count = 0;  // |Pi(P_N)|, without the extra 1
  std::size_t duplicate_products = 0;  // products Q w that coincided (uniqueness of q = Q w)
  bool below_exp_bound = false;  // max member <= e^{N^rho}

  bool contains(u128 q) const { return std::binary_search(members.begin(), members.end(), q); }
};

/// Products of at most D distinct primes from `primes`, each to a power in 1..D.
inline std::vector<u128> pi_products(const std::vector<long>& primes, int D) {
  std::vector<u128> out;
  std::function<void(std::size_t, int, u128)> rec = [&](std::size_t from, int used, u128 acc) {
    if (used == D) return;
    for (std::size_t i = from; i < primes.size(); ++i) {
      u128 pw = acc;
      for (int e = 1; e <= D; ++e) {
        pw *= static_cast<u128>(primes[i]);
        out.push_back(pw);
        rec(i + 1, used + 1, pw);
      }
    }
  };
  rec(0, 0, 1);
  return out;
}

inline double binomial(long n, long k) {
  double b = 1;
  for (long i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
  return b;
}

/// P_N = {Q w : Q | Q0, w in Pi(P_N) u {1}}; P_0 is empty.
inline IwSet iw_pn(long N, double rho, double budget = kDefaultSetBudget) {
  IwSet s{IwParams(N, rho), 0, {}, 0, 0, 0, false};
  if (N == 0) {
    s.below_exp_bound = true;
    return s;
  }
  const IwParams& P = s.params;
  const int D = P.D();
  s.Q0 = P.Q0();
  auto small = P.small_primes();
  auto large = P.large_primes();
  double ndiv = 1;
  for (long p : small) ndiv *= static_cast<double>(P.q0_exponent(p) + 1);
  double npi = 0;
  for (int k = 1; k <= std::min<int>(D, static_cast<int>(large.size())); ++k) npi += binomial(static_cast<long>(large.size()), k) * std::pow(D, k);
  double total = ndiv * (npi + 1);
  if (total > budget) throw budget_exceeded("iw_pn: set cardinality above budget", total);
  // widest member is Q0 times the largest w
  bigint widest = s.Q0;
  {
    std::vector<long> top(large.rbegin(), large.rbegin() + std::min<long>(D, static_cast<long>(large.size())));
    for (long p : top) widest *= boost::multiprecision::pow(bigint(p), static_cast<unsigned>(D));
  }
  if (boost::multiprecision::msb(widest) >= 127) throw budget_exceeded("iw_pn: members exceed 127 bits", static_cast<double>(boost::multiprecision::msb(widest)));

  std::vector<u128> divisors{1};
  for (long p : small) {
    const long e = P.q0_exponent(p);
    const std::size_t base = divisors.size();
    u128 pk = 1;
    for (long i = 1; i <= e; ++i) {
      pk *= static_cast<u128>(p);
      for (std::size_t j = 0; j < base; ++j) divisors.push_back(divisors[j] * pk);
    }
  }
  auto ws = pi_products(large, D);
  ws.push_back(1);
  s.divisor_count = divisors.size();
  s.pi_count = ws.size() - 1;
  s.members.resize(divisors.size() * ws.size());
  parallel_for(ws.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < divisors.size(); ++j) s.members[i * divisors.size() + j] = divisors[j] * ws[i];
  });
  std::sort(s.members.begin(), s.members.end());
  auto last = std::unique(s.members.begin(), s.members.end());
  s.duplicate_products = static_cast<std::size_t>(s.members.end() - last);
  s.members.erase(last, s.members.end());
  long double lim = std::pow(static_cast<long double>(N), static_cast<long double>(rho));
  long double logmax = std::log(static_cast<long double>(s.members.back()));
  s.below_exp_bound = logmax <= lim;
  return s;
}

struct QwFactorization {
  u128 Q = 1;  // divides Q0
  u128 w = 1;  // in Pi(P_N) u {1}
};

/// Unique q = Q w with Q | Q0 and w a product of primes from (N0, N].
/// Primes and Q0 exponents are computed once; divisibility by an odd p is
/// q * p^{-1} (mod 2^128) <= (2^128 - 1) / p, which avoids 128-bit division.
class QwFactorizer {
 public:
  explicit QwFactorizer(const IwParams& P) : D_(P.D()), empty_(P.N == 0) {
    for (long p : P.small_primes()) small_.push_back({Divisor(p), P.q0_exponent(p)});
    for (long p : P.large_primes()) large_.emplace_back(p);
  }

  QwFactorization operator()(u128 q) const {
    require(q >= 1, "factor_qw: q must be >= 1");
    if (empty_) throw not_representable("factor_qw: P_0 is empty");
    QwFactorization f;
    u128 rest = q;
    for (const auto& [d, cap] : small_) {
      long e = 0;
      while (d.divides(rest)) {
        rest = d.quotient(rest);
        f.Q *= d.p;
        ++e;
      }
      if (e > cap) throw not_representable("factor_qw: " + to_string_u128(q) + " is not in P_N (Q does not divide Q0)");
    }
    int distinct = 0;
    for (const auto& d : large_) {
      int e = 0;
      while (d.divides(rest)) {
        rest = d.quotient(rest);
        f.w *= d.p;
        ++e;
      }
      if (e > D_) throw not_representable("factor_qw: " + to_string_u128(q) + " has a prime power above D");
      if (e > 0) ++distinct;
    }
    if (rest != 1) throw not_representable("factor_qw: " + to_string_u128(q) + " has a prime factor outside (1, N]");
    if (distinct > D_) throw not_representable("factor_qw: " + to_string_u128(q) + " uses more than D large primes");
    return f;
  }

 private:
  struct Divisor {
    u128 p, inv = 0, limit = 0;
    explicit Divisor(long v) : p(static_cast<u128>(v)) {
      if (v == 2) return;
      inv = p;  // Newton: each step doubles the correct low bits
      for (int i = 0; i < 7; ++i) inv *= 2 - p * inv;
      limit = ~u128{0} / p;
    }
    bool divides(u128 x) const { return p == 2 ? (x & 1) == 0 : x * inv <= limit; }
    u128 quotient(u128 x) const { return p == 2 ? x >> 1 : x * inv; }
  };
  int D_;
  bool empty_;
  std::vector<std::pair<Divisor, long>> small_;
  std::vector<Divisor> large_;
};

inline QwFactorization factor_qw(u128 q, const IwParams& P) { return QwFactorizer(P)(q); }

// ---------------------------------------------------------------------------
// fraction sets
// ---------------------------------------------------------------------------

struct FractionSet {
  int dim = 1;
  std::string generator;
  std::vector<RationalPoint> members;  // sorted, reduced, unique

  std::size_t size() const { return members.size(); }
  bool contains(const RationalPoint& r) const { return std::binary_search(members.begin(), members.end(), r); }
};

/// R(S) for a set of denominators. Reduced fractions name distinct torus
/// points, so dropping repeated denominators leaves each point once.
inline FractionSet fraction_set(std::vector<long> S, int d, double budget = kDefaultSetBudget) {
  require(d >= 1, "fraction_set: d must be >= 1");
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  double work = 0;
  for (long q : S) {
    require(q >= 1, "fraction_set: denominators must be >= 1");
    work += std::pow(static_cast<double>(q), d);
  }
  if (work > budget) throw budget_exceeded("fraction_set: sum of q^d above budget", work);
  std::vector<std::vector<RationalPoint>> per(S.size());
  parallel_for(S.size(), [&](std::size_t i) { for_each_reduced_numerator(S[i], d, [&](const RationalPoint& r) { per[i].push_back(r); }); });
  FractionSet f;
  f.dim = d;
  f.generator = "R_of_S";
  for (auto& v : per) f.members.insert(f.members.end(), v.begin(), v.end());
  std::sort(f.members.begin(), f.members.end());
  return f;
}

/// U_N = R(P_N)
inline FractionSet u_set(long N, double rho, int d, double budget = kDefaultSetBudget) {
  auto P = iw_pn(N, rho, budget);
  std::vector<long> S;
  for (u128 q : P.members) {
    if (q > static_cast<u128>(std::numeric_limits<long>::max())) throw budget_exceeded("u_set: denominator too large", static_cast<double>(q));
    S.push_back(static_cast<long>(q));
  }
  auto f = fraction_set(S, d, budget);
  f.generator = "U_N";
  return f;
}

inline FractionSet set_difference(const FractionSet& a, const FractionSet& b) {
  FractionSet out;
  out.dim = a.dim;
  out.generator = a.generator + "\\" + b.generator;
  std::set_difference(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(), std::back_inserter(out.members));
  return out;
}

// ---------------------------------------------------------------------------
// bump function
// ---------------------------------------------------------------------------

/// eta = (indicator of the ball of radius 3/(32d)) * phi, phi the normalized
/// bump exp(-1/(1 - |z|^2/eps^2)) with eps = 1/(32d). Radial, equal to 1 on
/// |x| <= 1/(16d) and 0 on |x| >= 1/(8d). Values on the transition annulus
/// are tabulated once per d and interpolated linearly.
class BumpFunction {
 public:
  explicit BumpFunction(int d) : d_(d), eps_(1.0 / (32.0 * d)), R_(3.0 / (32.0 * d)) {
    require(d >= 1, "BumpFunction: d must be >= 1");
    table_.resize(kGrid + 1);
    const double den = mass(-1.0);
    for (int i = 0; i <= kGrid; ++i) {
      double r = plateau() + (support() - plateau()) * i / kGrid;
      table_[static_cast<std::size_t>(i)] = std::clamp(mass(r) / den, 0.0, 1.0);
    }
    table_.front() = 1.0;
    table_.back() = 0.0;
  }
  int d() const { return d_; }
  double plateau() const { return R_ - eps_; }  // 1/(16d)
  double support() const { return R_ + eps_; }  // 1/(8d)

  double radial(double r) const {
    if (r <= plateau()) return 1.0;
    if (r >= support()) return 0.0;
    double u = (r - plateau()) / (support() - plateau()) * kGrid;
    auto i = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(kGrid - 1));
    double t = u - static_cast<double>(i);
    return (1 - t) * table_[i] + t * table_[i + 1];
  }
  double operator()(std::span<const double> x) const {
    double s = 0;
    for (double v : x) s += v * v;
    return radial(std::sqrt(s));
  }

 private:
  static constexpr int kGrid = 4096;
  using GL = boost::math::quadrature::gauss<double, 30>;

  double phi(double t) const {
    double u = t / eps_;
    return u * u >= 1 ? 0.0 : std::exp(-1.0 / (1.0 - u * u));
  }

  template <class F>
  static double integrate(F f, std::vector<double> cuts) {
    std::sort(cuts.begin(), cuts.end());
    double s = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i]) s += GL::integrate(f, cuts[i], cuts[i + 1]);
    return s;
  }

  /// \int phi(z) 1{|x - z| <= R} dz for |x| = r, in coordinates (z1 along x,
  /// rho = |z_perp|) up to the sphere-area factor; r < 0 drops the indicator.
  double mass(double r) const {
    const double e = eps_;
    if (d_ == 1) {
      if (r < 0) return integrate([&](double z) { return phi(z); }, {-e, 0.0, e});
      double a = std::clamp(r - R_, -e, e), b = std::clamp(r + R_, -e, e);
      return integrate([&](double z) { return phi(z); }, {a, std::clamp(0.0, a, b), b});
    }
    const int pw = d_ - 2;
    auto inner_upper = [&](double z1) {
      double up = std::sqrt(std::max(0.0, e * e - z1 * z1));
      if (r < 0) return up;
      double dz = r - z1;
      if (std::abs(dz) > R_) return 0.0;
      return std::min(up, std::sqrt(R_ * R_ - dz * dz));
    };
    auto inner = [&](double z1) {
      double up = inner_upper(z1);
      if (up <= 0) return 0.0;
      return GL::integrate([&](double rho) { return phi(std::sqrt(z1 * z1 + rho * rho)) * std::pow(rho, pw); }, 0.0, up);
    };
    std::vector<double> cuts{-e, e};
    if (r > 0) {
      cuts.push_back(std::clamp(r - R_, -e, e));
      cuts.push_back(std::clamp((e * e - R_ * R_ + r * r) / (2 * r), -e, e));
    }
    return integrate(inner, cuts);
  }

  int d_;
  double eps_, R_;
  std::vector<double> table_;
};

/// Shared table per dimension.
inline const BumpFunction& bump(int d) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<BumpFunction>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<BumpFunction>(d);
  return *slot;
}

inline double eta_eval(std::span<const double> x) { return bump(static_cast<int>(x.size()))(x); }

/// eta(E^{-1}(xi - a/q)) with coordinatewise torus reduction; E = diag(eps).
inline double eta_scaled(std::span<const double> eps, std::span<const double> xi, const RationalPoint& center) {
  require(eps.size() == xi.size() && xi.size() == center.a.size(), "eta_scaled: dimension mismatch");
  auto th = torus_offset(xi, center);
  for (std::size_t i = 0; i < th.size(); ++i) th[i] /= eps[i];
  return eta_eval(th);
}

/// eps_gamma = 2^{-(scale |gamma| + shift)}, so E^{-1} = 2^{scale A + shift I}.
inline std::vector<double> dyadic_dilation(const std::vector<int>& degrees, double scale, double shift) {
  std::vector<double> e;
  for (int g : degrees) e.push_back(std::exp2(-(scale * g + shift)));
  return e;
}

// ---------------------------------------------------------------------------
// neighbor lookup for sums over fractions
// ---------------------------------------------------------------------------

/// Buckets fractions on the torus so that all centers within eps_gamma/(8d)
/// per coordinate of a query are found from the 3^d neighboring cells.
class FractionIndex {
 public:
  FractionIndex(const FractionSet& F, std::vector<double> eps) : F_(&F), eps_(std::move(eps)) {
    require(static_cast<int>(eps_.size()) == F.dim, "FractionIndex: dilation dimension");
    const double reach = 1.0 / (8.0 * F.dim);
    for (double e : eps_) {
      double w = e * reach;
      long cells = w > 0 ? static_cast<long>(std::floor(1.0 / w)) : 1;
      cells_.push_back(std::clamp(cells, 1L, 1L << 40));
    }
    for (std::size_t i = 0; i < F.members.size(); ++i) buckets_[key(F.members[i].as_real())].push_back(i);
  }

  /// Members whose cutoff support can contain xi.
  template <class Fn>
  void for_each_near(std::span<const double> xi, Fn&& fn) const {
    const std::size_t d = eps_.size();
    bool scan_all = false;
    for (long c : cells_)
      if (c < 3) scan_all = true;
    if (scan_all) {
      for (std::size_t i = 0; i < F_->members.size(); ++i) fn(F_->members[i]);
      return;
    }
    std::vector<long> base(d), off(d, -1);
    for (std::size_t j = 0; j < d; ++j) base[j] = cell(frac(xi[j]), j);
    for (;;) {
      std::vector<long> k(d);
      for (std::size_t j = 0; j < d; ++j) k[j] = ((base[j] + off[j]) % cells_[j] + cells_[j]) % cells_[j];
      auto it = buckets_.find(encode(k));
      if (it != buckets_.end())
        for (std::size_t i : it->second) fn(F_->members[i]);
      std::size_t j = d;
      while (j > 0 && off[j - 1] == 1) off[--j] = -1;
      if (j == 0) break;
      ++off[j - 1];
    }
  }

  const std::vector<double>& eps() const { return eps_; }

 private:
  long cell(double x, std::size_t j) const { return std::min(static_cast<long>(x * static_cast<double>(cells_[j])), cells_[j] - 1); }
  std::string encode(const std::vector<long>& k) const {
    std::string s;
    for (long v : k) s.append(reinterpret_cast<const char*>(&v), sizeof v);
    return s;
  }
  std::string key(const std::vector<double>& x) const {
    std::vector<long> k(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) k[j] = cell(frac(x[j]), j);
    return encode(k);
  }

  const FractionSet* F_;
  std::vector<double> eps_;
  std::vector<long> cells_;
  std::unordered_map<std::string, std::vector<std::size_t>> buckets_;
};

/// Number of unordered pairs of fractions whose dilated cutoff supports
/// intersect: |E^{-1}(a/q - a'/q')| < 2/(8d) in torus distance.
inline std::size_t support_overlaps(const FractionSet& F, const std::vector<double>& eps) {
  FractionIndex idx(F, [&] {
    auto e2 = eps;
    for (auto& v : e2) v *= 2;
    return e2;
  }());
  const double lim = 2.0 / (8.0 * F.dim);
  std::size_t count = 0;
  for (const auto& a : F.members) {
    auto x = a.as_real();
    idx.for_each_near(x, [&](const RationalPoint& b) {
      if (!(a < b)) return;
      auto th = torus_offset(x, b);
      double s = 0;
      for (std::size_t j = 0; j < th.size(); ++j) s += (th[j] / eps[j]) * (th[j] / eps[j]);
      if (std::sqrt(s) < lim) ++count;
    });
  }
  return count;
}

// ---------------------------------------------------------------------------
// multipliers
// ---------------------------------------------------------------------------

struct MultiplierSpec {
  std::string kind;
  int dim = 1;
  std::function<cplx(std::span<const double>)> eval;
  bool model_regime = false;  // dilations too large for the stated smallness, or overlapping supports
  std::size_t fractions = 0;
  std::size_t overlaps = 0;  // pairs of fractions with intersecting cutoff supports
  cplx operator()(std::span<const double> xi) const { return eval(xi); }
};

inline MultiplierSpec constant_multiplier(int dim, cplx c) {
  return {"constant", dim, [c](std::span<const double>) { return c; }};
}

/// e(<xi, u>)
inline MultiplierSpec translation_multiplier(IVec u) {
  int dim = static_cast<int>(u.size());
  return {"translation", dim, [u](std::span<const double> xi) {
            double ph = 0;
            for (std::size_t j = 0; j < u.size(); ++j) ph += frac_product(xi[j], u[j]);
            return expi2pi(ph);
          }};
}

template <class Mapping>
MultiplierSpec averaging_multiplier(const Mapping& P, long N, const ConvexBody& G) {
  return {"avg_multiplier", P.target_dim(), [P, N, G](std::span<const double> xi) { return avg_multiplier(N, xi, P, G); }};
}

/// Sum over fractions of a per-fraction term times a cutoff; `eps` bounds the
/// support used for neighbor lookup.
struct FractionSum {
  std::shared_ptr<FractionSet> set;
  std::shared_ptr<FractionIndex> index;
  std::size_t overlaps = 0;
};

/// With require_disjoint, overlapping supports raise infeasible_configuration;
/// otherwise the overlap count is recorded and the sum is built anyway.
inline FractionSum make_fraction_sum(FractionSet F, const std::vector<double>& eps, bool require_disjoint) {
  FractionSum s;
  s.overlaps = support_overlaps(F, eps);
  if (require_disjoint && s.overlaps > 0)
    throw infeasible_configuration("cutoff supports around distinct fractions overlap (" + std::to_string(s.overlaps) + " pairs)", static_cast<double>(s.overlaps));
  s.set = std::make_shared<FractionSet>(std::move(F));
  s.index = std::make_shared<FractionIndex>(*s.set, eps);
  return s;
}

struct ArcParams {
  long l = 1;
  double rho = 1.0;
  double chi = 0.1;
};

inline long ipow(long b, long e) {
  i128 r = 1;
  for (long i = 0; i < e; ++i) r = checked_mul(r, b);
  return narrow_to_long(r);
}

/// Xi_n(xi) = sum_{a/q in U_{n^l}} eta(2^{n(A - chi I)}(xi - a/q))
inline MultiplierSpec xi_projection(long n, const ArcParams& ap, const std::vector<int>& degrees, bool strict = true,
                                    double budget = kDefaultSetBudget) {
  require(n >= 0, "xi_projection: n must be >= 0");
  const int d = static_cast<int>(degrees.size());
  auto eps = dyadic_dilation(degrees, static_cast<double>(n), -ap.chi * static_cast<double>(n));
  auto fs = make_fraction_sum(u_set(ipow(n, ap.l), ap.rho, d, budget), eps, strict);
  MultiplierSpec m;
  m.kind = "xi_projection";
  m.dim = d;
  m.fractions = fs.set->size();
  m.overlaps = fs.overlaps;
  m.model_regime = fs.overlaps > 0;
  m.eval = [fs, eps](std::span<const double> xi) {
    double s = 0;
    fs.index->for_each_near(xi, [&](const RationalPoint& r) { s += eta_scaled(eps, xi, r); });
    return cplx(s, 0.0);
  };
  return m;
}

/// nu_{2^j}: sum over U_{j^l} of G(a/q) (Psi_{2^j} - Psi_{2^{j-1}})(xi - a/q)
/// eta(2^{j(A - chi I)}(xi - a/q)). With `shell` set, the sum runs over
/// U_{(s+1)^l} \ U_{s^l} with cutoff eta(2^{s(A - chi I)} .).
inline MultiplierSpec nu_multiplier(long j, std::optional<long> shell, const ArcParams& ap, const CanonicalMapping& Q, const CZKernel& K,
                                    const ConvexBody& G, bool strict = true, double budget = kDefaultSetBudget) {
  require(j >= 1, "nu_multiplier: j must be >= 1");
  const int d = Q.d();
  std::vector<int> deg;
  for (const auto& g : Q.gamma()) deg.push_back(g.degree());
  FractionSet F;
  double scale;
  if (shell) {
    long s = *shell;
    require(s >= 0 && s < j, "nu_multiplier: need 0 <= s < j");
    F = set_difference(u_set(ipow(s + 1, ap.l), ap.rho, d, budget), u_set(ipow(s, ap.l), ap.rho, d, budget));
    scale = static_cast<double>(s);
  } else {
    F = u_set(ipow(j, ap.l), ap.rho, d, budget);
    scale = static_cast<double>(j);
  }
  auto eps = dyadic_dilation(deg, scale, -ap.chi * scale);
  auto fs = make_fraction_sum(std::move(F), eps, strict);
  MultiplierSpec m;
  m.kind = shell ? "nu_shell" : "nu";
  m.dim = d;
  m.fractions = fs.set->size();
  m.overlaps = fs.overlaps;
  m.model_regime = fs.overlaps > 0;
  const double hi = std::ldexp(1.0, static_cast<int>(j)), lo = hi / 2;
  m.eval = [fs, eps, Q, K, G, hi, lo](std::span<const double> xi) {
    cplx s = 0;
    fs.index->for_each_near(xi, [&](const RationalPoint& r) {
      double cut = eta_scaled(eps, xi, r);
      if (cut == 0.0) return;
      auto th = torus_offset(xi, r);
      s += gauss_sum(r, Q) * psi_difference(hi, lo, th, Q, K, G) * cut;
    });
    return s;
  };
  return m;
}

/// Delta_N(xi) = sum_{a/q in U_N} Theta(xi - a/q) eta(E^{-1}(xi - a/q)), with
/// the dilation E = diag(eps) given explicitly.
inline MultiplierSpec delta_multiplier(long N, double rho, const MultiplierSpec& theta, std::vector<double> eps,
                                       double budget = kDefaultSetBudget) {
  const int d = theta.dim;
  require(static_cast<int>(eps.size()) == d, "delta_multiplier: dilation dimension");
  for (double e : eps) require(e > 0, "delta_multiplier: dilations must be positive");
  const double small = std::exp(-std::pow(static_cast<double>(N), 2 * rho));
  bool model = std::any_of(eps.begin(), eps.end(), [&](double e) { return e > small; });
  auto fs = make_fraction_sum(u_set(N, rho, d, budget), eps, false);
  MultiplierSpec m;
  m.kind = "delta_N";
  m.dim = d;
  m.model_regime = model || fs.overlaps > 0;
  m.fractions = fs.set->size();
  m.overlaps = fs.overlaps;
  m.eval = [fs, eps, theta](std::span<const double> xi) {
    cplx s = 0;
    fs.index->for_each_near(xi, [&](const RationalPoint& r) {
      double cut = eta_scaled(eps, xi, r);
      if (cut != 0.0) s += theta(torus_offset(xi, r)) * cut;
    });
    return s;
  };
  return m;
}

/// Delta_{n,s}^j(xi) = sum over U_{(s+1)^l} \ U_{s^l} of
/// (eta(2^{nA + jI} th) - eta(2^{nA + (j+1)I} th)) eta(2^{s(A - chi I)} th), th = xi - a/q.
inline MultiplierSpec shell_delta_multiplier(long n, long s, long j, const ArcParams& ap, const std::vector<int>& degrees,
                                             bool strict = true, double budget = kDefaultSetBudget) {
  require(s >= 0 && s < n, "shell_delta_multiplier: need 0 <= s < n");
  const int d = static_cast<int>(degrees.size());
  auto e_outer = dyadic_dilation(degrees, static_cast<double>(n), static_cast<double>(j));
  auto e_inner = dyadic_dilation(degrees, static_cast<double>(n), static_cast<double>(j + 1));
  auto e_shell = dyadic_dilation(degrees, static_cast<double>(s), -ap.chi * static_cast<double>(s));
  auto F = set_difference(u_set(ipow(s + 1, ap.l), ap.rho, d, budget), u_set(ipow(s, ap.l), ap.rho, d, budget));
  auto fs = make_fraction_sum(std::move(F), e_shell, strict);
  MultiplierSpec m;
  m.kind = "delta_shell";
  m.dim = d;
  m.fractions = fs.set->size();
  m.overlaps = fs.overlaps;
  m.model_regime = fs.overlaps > 0;
  m.eval = [fs, e_outer, e_inner, e_shell](std::span<const double> xi) {
    double sum = 0;
    fs.index->for_each_near(xi, [&](const RationalPoint& r) {
      double c = eta_scaled(e_shell, xi, r);
      if (c != 0.0) sum += (eta_scaled(e_outer, xi, r) - eta_scaled(e_inner, xi, r)) * c;
    });
    return cplx(sum, 0.0);
  };
  return m;
}

// ---------------------------------------------------------------------------
// periodic application
// ---------------------------------------------------------------------------

/// F^{-1}(Theta F f) for f read as a function on Z_M^m (its box extents are
/// the periods). Theta is sampled at j/M reduced into [-1/2, 1/2).
inline GridFunction apply_periodic_multiplier(const GridFunction& f, const MultiplierSpec& theta) {
  require(theta.dim == f.dim(), "apply_periodic_multiplier: multiplier dimension must equal the grid dimension");
  auto dims = f.shape();
  std::vector<cplx> a = f.values();
  fft_inplace(a, dims, +1);
  GridFunction grid(IVec(dims.size(), 0), [&] {
    IVec h;
    for (int v : dims) h.push_back(v - 1);
    return h;
  }());
  std::vector<double> xi(dims.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto jv = grid.point(i);
    for (std::size_t c = 0; c < dims.size(); ++c) xi[c] = centered_frac(static_cast<double>(jv[c]) / dims[c]);
    a[i] *= theta(xi);
  }
  fft_inplace(a, dims, -1);
  const double scale = 1.0 / static_cast<double>(a.size());
  GridFunction out = f;
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a[i] * scale;
  return out;
}

}  // namespace radonlab
