#pragma once
// The named experiments of the runner. Each one declares its parameters
// (with defaults) and appends self-describing rows to a ResultSet.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "radonlab/circle_method.hpp"
#include "radonlab/expsum.hpp"
#include "radonlab/lab/config.hpp"
#include "radonlab/lab/results.hpp"
#include "radonlab/martingale.hpp"
#include "radonlab/operators.hpp"
#include "radonlab/variation.hpp"

namespace radonlab::lab {

enum class ParamKind { integer, number, numbers, text, object };

struct ParamSpec {
  std::string name;  // snake_case; the CLI flag is the kebab-case form
  ParamKind kind;
  json fallback;
  std::string help;
};

inline std::string flag_name(const std::string& param) {
  std::string f = param;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

inline std::string fmt(double v) { return format_number(v); }
inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }

class Context {
 public:
  using clock = std::chrono::steady_clock;

  Context(const ExperimentConfig& cfg, json params, ResultSet& out)
      : cfg_(cfg), params_(std::move(params)), out_(out), start_(clock::now()) {}

  std::uint64_t seed() const { return *cfg_.seed; }
  const Budgets& budgets() const { return cfg_.budgets; }
  unsigned threads() const { return cfg_.threads; }

  long integer(const std::string& k) const { return params_.at(k).get<long>(); }
  double number(const std::string& k) const { return params_.at(k).get<double>(); }
  std::vector<double> numbers(const std::string& k) const { return params_.at(k).get<std::vector<double>>(); }
  std::string text(const std::string& k) const { return params_.at(k).get<std::string>(); }
  const json& object(const std::string& k) const { return params_.at(k); }

  void add(std::string metric, Params params, double observed, std::optional<double> bound = std::nullopt,
           std::optional<double> ratio = std::nullopt, Check check = Check::info, double tolerance = 0.0) {
    ResultRow r{out_.experiment, std::move(metric), std::move(params), observed, bound, ratio, check, tolerance, elapsed()};
    out_.rows.push_back(std::move(r));
  }
  void attach(const std::string& key, json value) { out_.attachments[key] = std::move(value); }

  double elapsed() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

  /// Called between units of work; past the time budget the run stops with
  /// the rows gathered so far.
  void tick() const {
    if (cfg_.budgets.max_seconds && elapsed() > *cfg_.budgets.max_seconds)
      throw budget_exceeded("time budget of " + fmt(*cfg_.budgets.max_seconds) + " s exhausted", elapsed());
  }
  void require_points(double count, const std::string& what) const {
    if (count > cfg_.budgets.max_lattice_points)
      throw budget_exceeded(what + ": " + fmt(count) + " points exceed max_lattice_points", count);
  }

 private:
  const ExperimentConfig& cfg_;
  json params_;
  ResultSet& out_;
  clock::time_point start_;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::function<void(Context&)> run;
};

// ---------------------------------------------------------------------------
// shared parsing helpers
// ---------------------------------------------------------------------------

/// {"k": 1, "components": [[[c, e1..ek], ...], ...]}
inline PolynomialMapping parse_mapping(const json& j) {
  try {
    int k = j.at("k").get<int>();
    std::vector<std::vector<Term>> comps;
    for (const auto& comp : j.at("components")) {
      std::vector<Term> terms;
      for (const auto& t : comp) {
        if (!t.is_array() || t.size() != static_cast<std::size_t>(k) + 1)
          throw config_error("mapping term must be [coeff, e1, ..., ek]");
        MultiIndex g;
        for (int i = 1; i <= k; ++i) g.exps.push_back(t[static_cast<std::size_t>(i)].get<int>());
        terms.push_back({g, t[0].get<long>()});
      }
      comps.push_back(std::move(terms));
    }
    return PolynomialMapping(k, comps);
  } catch (const json::exception& e) {
    throw config_error(std::string("mapping: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("mapping: ") + e.what());
  }
}

inline json parabola_json() { return json::parse(R"({"k": 1, "components": [[[1, 1]], [[1, 2]]]})"); }

inline ConvexBody parse_body(const std::string& s, int k) {
  if (s == "ball") return ConvexBody::ball(k);
  if (s == "box") return ConvexBody::box(std::vector<double>(static_cast<std::size_t>(k), 1.0));
  throw config_error("body must be 'ball' or 'box' (got '" + s + "')");
}

inline CZKernel parse_kernel(const std::string& s) {
  if (s == "hilbert") return hilbert_kernel();
  if (s == "riesz2") return second_order_riesz_kernel();
  throw config_error("kernel must be 'hilbert' or 'riesz2' (got '" + s + "')");
}

/// Per-component degrees, which set the anisotropic dilation of the frequency side.
inline std::vector<int> component_degrees(const PolynomialMapping& P) {
  std::vector<int> d;
  for (int c = 0; c < P.target_dim(); ++c) {
    int m = 0;
    for (const auto& t : P.components()[static_cast<std::size_t>(c)]) m = std::max(m, t.gamma.degree());
    d.push_back(m);
  }
  return d;
}

inline std::vector<cplx> complex_normals(Rng& rng, std::size_t n) {
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(rng.normal(), rng.normal());
  return v;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::isnan(x) ? x : std::max(m, x);
  return m;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

// ---------------------------------------------------------------------------
// gauss-scan
// ---------------------------------------------------------------------------

inline void run_gauss_scan(Context& ctx) {
  const int k = static_cast<int>(ctx.integer("k")), deg = static_cast<int>(ctx.integer("deg"));
  const long q_min = ctx.integer("q_min"), q_max = ctx.integer("q_max");
  require(q_min >= 1 && q_max >= q_min, "gauss-scan: need 1 <= q_min <= q_max");
  const auto Q = CanonicalMapping::full(k, deg);
  // only Gamma = {1, 2} has the classical closed form
  const bool quadratic = k == 1 && deg == 2;
  std::vector<double> lx, ly;
  const long block = 16;
  for (long q0 = q_min; q0 <= q_max; q0 += block) {
    ctx.tick();
    const long q1 = std::min(q_max, q0 + block - 1);
    ctx.require_points(std::pow(static_cast<double>(q1), k), "gauss-scan: q^k at q = " + fmt(q1));
    const auto n = static_cast<std::size_t>(q1 - q0 + 1);
    std::vector<double> mx(n), worst(n, NAN);
    parallel_for(n, [&](std::size_t i) {
      const long q = q0 + static_cast<long>(i);
      mx[i] = gauss_sum_max(q, Q);
      if (quadratic && q % 2 == 1) {
        const double ref = 1.0 / std::sqrt(static_cast<double>(q));
        double far = ref;
        for (long a2 = 0; a2 < q; ++a2) {
          if (gcd_long(a2, q) != 1) continue;
          double g = std::abs(gauss_sum(RationalPoint({0, a2}, q), Q));
          if (std::abs(g - ref) >= std::abs(far - ref)) far = g;
        }
        worst[i] = far;
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      const long q = q0 + static_cast<long>(i);
      const double ref = 1.0 / std::sqrt(static_cast<double>(q));
      ctx.add("max_abs_gauss", {{"q", fmt(q)}}, mx[i], ref, mx[i] / ref);
      if (!std::isnan(worst[i])) ctx.add("quadratic_gauss_abs", {{"q", fmt(q)}}, worst[i], ref, worst[i] / ref, Check::eq, 1e-9);
      if (mx[i] > 0) {
        lx.push_back(std::log(static_cast<double>(q)));
        ly.push_back(std::log(mx[i]));
      }
    }
  }
  if (lx.size() >= 2) {
    auto fit = least_squares(lx, ly);
    ctx.add("decay_exponent", {}, -fit.slope, std::nullopt, std::nullopt, Check::fitted);
    ctx.add("decay_constant", {}, std::exp(fit.intercept), std::nullopt, std::nullopt, Check::fitted);
  }
}

// ---------------------------------------------------------------------------
// weyl-decay
// ---------------------------------------------------------------------------

inline void run_weyl_decay(Context& ctx) {
  const json& pj = ctx.object("poly");
  if (!pj.is_array() || pj.empty()) throw config_error("weyl-decay: poly must be a nonempty array of [coeff, e1..ek]");
  const int k = static_cast<int>(pj[0].size()) - 1;
  if (k < 1) throw config_error("weyl-decay: poly terms need at least one exponent");
  std::vector<RealTerm> terms;
  for (const auto& t : pj) {
    if (!t.is_array() || static_cast<int>(t.size()) != k + 1) throw config_error("weyl-decay: every poly term must have k + 1 entries");
    MultiIndex g;
    for (int i = 1; i <= k; ++i) g.exps.push_back(t[static_cast<std::size_t>(i)].get<int>());
    terms.push_back({g, t[0].get<long double>()});
  }
  // leading term: largest degree, first listed on ties
  MultiIndex lead = terms.front().gamma;
  for (const auto& t : terms)
    if (t.gamma.degree() > lead.degree()) lead = t.gamma;
  RealPolynomial P(k, terms);
  auto G = parse_body(ctx.text("body"), k);
  std::vector<long> Ns;
  std::string skipped;
  for (long e = ctx.integer("n_min_exp"); e <= ctx.integer("n_max_exp"); ++e) {
    long N = 1L << e;
    if (std::pow(2.0 * static_cast<double>(N) + 1, k) > ctx.budgets().max_lattice_points) {
      skipped = "N = " + fmt(N) + " exceeds max_lattice_points";
      break;
    }
    Ns.push_back(N);
  }
  if (Ns.size() < 2) throw budget_exceeded("weyl-decay: fewer than two N fit the lattice budget", 0);
  auto probe = weyl_decay_probe(P, G, Ns, lead, ctx.number("beta"));
  for (const auto& pt : probe.points)
    ctx.add("normalized_weyl_sum", {{"N", fmt(pt.N)}, {"window_q", pt.window_q ? fmt(*pt.window_q) : "none"}}, pt.normalized);
  ctx.add("log_decay_exponent", {}, probe.alpha, std::nullopt, std::nullopt, Check::fitted);
  ctx.add("power_decay_exponent", {}, probe.power, std::nullopt, std::nullopt, Check::fitted);
  ctx.add("monotone", {}, probe.decreasing ? 1.0 : 0.0);
  if (!skipped.empty()) throw budget_exceeded("weyl-decay: " + skipped, 0);
}

// ---------------------------------------------------------------------------
// vr-suite
// ---------------------------------------------------------------------------

inline void run_vr_suite(Context& ctx) {
  const long n_min = ctx.integer("n_min"), n_max = ctx.integer("n_max"), trials = ctx.integer("trials");
  require(n_min >= 1 && n_max >= n_min, "vr-suite: need 1 <= n_min <= n_max");
  require(static_cast<std::size_t>(n_max) <= kBruteForceMaxLength, "vr-suite: n_max above the brute-force limit of 16");
  require(trials >= 1 && trials < 1000000, "vr-suite: trials must be in [1, 1e6)");
  const auto rs = ctx.numbers("rs");
  const std::uint64_t seed = ctx.seed();
  double worst = 0;
  for (long n = n_min; n <= n_max; ++n) {
    ctx.tick();
    std::vector<std::vector<double>> err(static_cast<std::size_t>(trials), std::vector<double>(rs.size()));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
      Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(n) * 1000000 + i);
      SeqSample a(complex_normals(rng, static_cast<std::size_t>(n)));
      for (std::size_t j = 0; j < rs.size(); ++j) {
        double dp = vr_exact(a, rs[j]).value, bf = vr_bruteforce(a, rs[j]).value;
        err[i][j] = bf > 0 ? std::abs(dp - bf) / bf : std::abs(dp);
      }
    });
    for (std::size_t j = 0; j < rs.size(); ++j) {
      double m = 0;
      for (const auto& e : err) m = std::max(m, e[j]);
      worst = std::max(worst, m);
      ctx.add("dp_vs_bruteforce_rel_error", {{"n", fmt(n)}, {"r", fmt(rs[j])}}, m, 1e-12, std::nullopt, Check::le);
    }
  }
  ctx.add("max_rel_error", {}, worst, 1e-12, std::nullopt, Check::le);

  // explicit-constant inequalities on sequences of length 2^s + 1
  const long s_max = ctx.integer("s_max"), sq_trials = ctx.integer("square_trials");
  const auto square_rs = ctx.numbers("square_rs"), lambdas = ctx.numbers("lambdas");
  require(sq_trials >= 0 && sq_trials < 1000000, "vr-suite: square_trials must be in [0, 1e6)");
  for (double r : square_rs) require(r >= 2, "vr-suite: square_rs entries must be >= 2");
  static const std::vector<std::string> names{"dyadic_square", "split", "sup", "l2", "jump", "oscillation"};
  for (long s = 1; s <= s_max && sq_trials > 0; ++s) {
    ctx.tick();
    const std::size_t len = (std::size_t{1} << s) + 1;
    std::vector<double> lac;
    for (std::size_t p = 1; p - 1 < len; p *= 2) lac.push_back(static_cast<double>(p - 1));
    // excess[i][r][check], ratio likewise
    const std::size_t R = square_rs.size(), C = names.size();
    std::vector<std::vector<double>> excess(static_cast<std::size_t>(sq_trials), std::vector<double>(R * C, -INFINITY));
    std::vector<std::vector<double>> ratio(static_cast<std::size_t>(sq_trials), std::vector<double>(R * C, 0.0));
    parallel_for(static_cast<std::size_t>(sq_trials), [&](std::size_t i) {
      Rng rng = Rng::for_trial(seed, 1000000000ULL + static_cast<std::uint64_t>(s) * 1000000 + i);
      SeqSample a(complex_normals(rng, len));
      // sup bound is tightest at the smallest |a_j0|
      std::size_t j0 = 0;
      for (std::size_t j = 1; j < len; ++j)
        if (std::abs(a[j]) < std::abs(a[j0])) j0 = j;
      for (std::size_t ri = 0; ri < R; ++ri) {
        const double r = square_rs[ri];
        auto note = [&](std::size_t c, const InequalityCheck& ch) {
          auto& e = excess[i][ri * C + c];
          e = std::max(e, ch.lhs - ch.rhs);
          ratio[i][ri * C + c] = std::max(ratio[i][ri * C + c], ch.ratio());
        };
        note(0, dyadic_square_check(a, r));
        for (std::size_t w = 1; w < len; ++w) note(1, split_bound_check(a, r, w));
        note(2, sup_bound_check(a, r, j0));
        note(3, l2_bound_check(a, r));
        for (double lam : lambdas) note(4, jump_variation_check(a, lam, r));
        for (std::size_t J = 1; J < lac.size(); ++J) note(5, oscillation_holder_check(a, lac, static_cast<int>(J), r));
      }
    });
    for (std::size_t ri = 0; ri < R; ++ri)
      for (std::size_t c = 0; c < C; ++c) {
        double e = -INFINITY, q = 0;
        for (std::size_t i = 0; i < excess.size(); ++i) {
          e = std::max(e, excess[i][ri * C + c]);
          q = std::max(q, ratio[i][ri * C + c]);
        }
        ctx.add(names[c] + "_excess", {{"s", fmt(s)}, {"r", fmt(square_rs[ri])}}, e, 0.0, q, Check::le, kInequalitySlack);
      }
  }
}

// ---------------------------------------------------------------------------
// prop0-fit / prop2-fit (major-arc approximation of the multipliers)
// ---------------------------------------------------------------------------

inline RationalPoint random_reduced(Rng& rng, long q, int d) {
  for (;;) {
    std::vector<long> a(static_cast<std::size_t>(d));
    for (auto& v : a) v = rng.integer(0, q - 1);
    RationalPoint p(a, q);
    if (p.reduced()) return p;
  }
}

inline void run_major_arc_fit(Context& ctx, bool singular) {
  const auto Q = CanonicalMapping::full(1, 2);
  const auto G = ConvexBody::ball(1);
  const auto K = hilbert_kernel();
  const int d = Q.d();
  const long trials = ctx.integer("trials");
  const long lo = 1L << ctx.integer("n_min_exp"), hi = 1L << ctx.integer("n_max_exp");
  require(lo >= 4 && hi >= lo, "major-arc fit: need 2 <= n_min_exp <= n_max_exp");
  ctx.require_points(2.0 * static_cast<double>(hi) + 1, "major-arc fit: largest N");
  const double l2_max = ctx.number("l2_max");
  require(l2_max >= 1, "major-arc fit: l2_max must be >= 1");

  auto check = [&](long N, long M, std::span<const double> xi, const RationalPoint& aq, const DiophantineWindow& w) {
    return singular ? major_arc_singular_check(N, M, xi, aq, w, Q, K, G) : major_arc_average_check(N, xi, aq, w, Q, G);
  };

  std::vector<double> ratio(static_cast<std::size_t>(trials)), err(ratio.size()), bnd(ratio.size());
  std::vector<Params> tags(ratio.size());
  const long chunk = 20;
  for (long t0 = 0; t0 < trials; t0 += chunk) {
    ctx.tick();
    const long t1 = std::min(trials, t0 + chunk);
    parallel_for(static_cast<std::size_t>(t1 - t0), [&](std::size_t off) {
      const std::size_t i = static_cast<std::size_t>(t0) + off;
      Rng rng = Rng::for_trial(ctx.seed(), i);
      const long N = rng.integer(lo, hi);
      DiophantineWindow w;
      w.L1 = static_cast<double>(N);
      w.L3 = static_cast<double>(rng.integer(1, static_cast<long>(std::sqrt(static_cast<double>(N)))));
      w.L2 = rng.uniform(1.0, l2_max);
      const long q = rng.integer(1, static_cast<long>(w.L3));
      auto aq = random_reduced(rng, q, d);
      std::vector<double> xi = aq.as_real();
      for (int g = 0; g < d; ++g) {
        const double lim = std::pow(w.L1, -Q.gamma()[static_cast<std::size_t>(g)].degree()) * w.L2;
        xi[static_cast<std::size_t>(g)] += rng.uniform(-1.0, 1.0) * lim * (1 - 1e-6);
      }
      const long M = singular ? rng.integer(std::max(1L, N / 2), N - 1) : N;
      auto c = check(N, M, xi, aq, w);
      err[i] = c.error;
      bnd[i] = c.bound;
      ratio[i] = c.ratio();
      tags[i] = {{"trial", fmt(i)}, {"N", fmt(N)}, {"q", fmt(q)}};
      if (singular) tags[i].push_back({"M", fmt(M)});
    });
    for (long i = t0; i < t1; ++i) {
      auto u = static_cast<std::size_t>(i);
      ctx.add("approximation_error", tags[u], err[u], bnd[u], ratio[u]);
    }
  }
  ctx.add("fitted_constant", {}, max_of(ratio), std::nullopt, std::nullopt, Check::fitted);

  // xi = a/q exactly, where the bound reduces to a multiple of q/N
  const long e_lo = ctx.integer("exact_min_exp"), e_hi = ctx.integer("exact_max_exp"), q_cap = ctx.integer("exact_q_max");
  double exact_worst = 0;
  for (long e = e_lo; e <= e_hi; ++e) {
    ctx.tick();
    long N = 1;
    for (long i = 0; i < e; ++i) N *= 3;
    ctx.require_points(2.0 * static_cast<double>(N) + 1, "major-arc fit: exact N");
    const long qm = std::min(q_cap, static_cast<long>(std::sqrt(static_cast<double>(N))));
    std::vector<double> scaled(static_cast<std::size_t>(qm));
    parallel_for(scaled.size(), [&](std::size_t off) {
      const long q = static_cast<long>(off) + 1;
      Rng rng = Rng::for_trial(ctx.seed() ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(N) * 4096 + static_cast<std::uint64_t>(q));
      auto aq = random_reduced(rng, q, d);
      DiophantineWindow w{static_cast<double>(N), 1.0, static_cast<double>(q)};
      auto c = check(N, singular ? N / 3 : N, aq.as_real(), aq, w);
      scaled[off] = c.error * static_cast<double>(N) / static_cast<double>(q);
    });
    const double m = max_of(scaled);
    exact_worst = std::max(exact_worst, m);
    ctx.add("exact_scaled_error", {{"N", fmt(N)}}, m);
  }
  ctx.add("exact_fitted_constant", {}, exact_worst, std::nullopt, std::nullopt, Check::fitted);

  // decay in |N^A xi|: only the product matters, so N = 1 and xi sweeps
  const auto pts = log_spaced(ctx.number("decay_min"), ctx.number("decay_max"), static_cast<std::size_t>(ctx.integer("decay_points")));
  std::vector<double> mag(pts.size());
  const double c1 = ctx.number("linear_weight");
  int top = 0;
  for (const auto& g : Q.gamma()) top = std::max(top, g.degree());
  ctx.tick();
  parallel_for(pts.size(), [&](std::size_t i) {
    std::vector<double> xi{c1 * pts[i], pts[i]};
    mag[i] = singular ? std::abs(psi_difference(1.0, 0.5, xi, Q, K, G)) : std::abs(phi_N(1.0, xi, Q, G).value);
  });
  std::vector<double> lx, ly;
  const std::string what = singular ? "psi_difference_abs" : "phi_abs";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ctx.add(what, {{"norm", fmt(pts[i])}}, mag[i]);
    if (mag[i] > 0) {
      lx.push_back(std::log(pts[i]));
      ly.push_back(std::log(mag[i]));
    }
  }
  if (lx.size() >= 2)
    ctx.add(singular ? "psi_decay_slope" : "phi_decay_slope", {{"d", fmt(top)}}, least_squares(lx, ly).slope, -1.0 / top, std::nullopt,
            Check::fitted);
}

// ---------------------------------------------------------------------------
// iw-build
// ---------------------------------------------------------------------------

inline void run_iw_build(Context& ctx) {
  const double rho = ctx.number("rho");
  const long n_hi = ctx.integer("n");
  const long n_lo = ctx.integer("n_min") < 0 ? n_hi : ctx.integer("n_min");
  require(n_lo >= 0 && n_hi >= n_lo, "iw-build: need 0 <= n_min <= n");
  const auto list_limit = static_cast<std::size_t>(ctx.integer("list_limit"));
  const double budget = ctx.budgets().max_set_size;
  IwSet prev = iw_pn(std::max(0L, n_lo - 1), rho, budget);
  json lists = json::object();
  for (long N = n_lo; N <= n_hi; ++N) {
    ctx.tick();
    IwSet s = iw_pn(N, rho, budget);
    const Params tag{{"N", fmt(N)}, {"rho", fmt(rho)}};
    ctx.add("members", tag, static_cast<double>(s.members.size()));
    double missing = 0;
    for (long q = 1; q <= N; ++q) missing += s.contains(static_cast<u128>(q)) ? 0 : 1;
    ctx.add("initial_segment_missing", tag, missing, 0.0, std::nullopt, Check::le);
    double not_nested = 0;
    for (u128 q : prev.members) not_nested += s.contains(q) ? 0 : 1;
    ctx.add("nesting_missing", tag, not_nested, 0.0, std::nullopt, Check::le);
    ctx.add("duplicate_products", tag, static_cast<double>(s.duplicate_products), 0.0, std::nullopt, Check::le);
    // every member splits uniquely as Q w with Q | Q0
    const std::size_t blocks = 64;
    std::vector<std::size_t> bad(blocks, 0);
    const std::size_t n = s.members.size();
    const QwFactorizer split(s.params);
    const u128 q0 = from_bigint(s.Q0);  // Q0 divides the widest member, so it fits
    parallel_for(blocks, [&](std::size_t b) {
      for (std::size_t i = b * n / blocks; i < (b + 1) * n / blocks; ++i) {
        const u128 q = s.members[i];
        try {
          auto f = split(q);
          if (f.Q * f.w != q || q0 % f.Q != 0) ++bad[b];
        } catch (const not_representable&) {
          ++bad[b];
        }
      }
    });
    ctx.add("factorization_failures", tag, static_cast<double>(std::accumulate(bad.begin(), bad.end(), std::size_t{0})), 0.0,
            std::nullopt, Check::le);
    ctx.add("below_exp_bound", tag, s.below_exp_bound ? 1.0 : 0.0);
    if (n <= list_limit) {
      json m = json::array();
      for (u128 q : s.members) m.push_back(to_string_u128(q));
      lists[fmt(N)] = std::move(m);
    }
    prev = std::move(s);
  }
  if (!lists.empty()) ctx.attach("members", std::move(lists));
}

// ---------------------------------------------------------------------------
// operator-norm
// ---------------------------------------------------------------------------

inline void run_operator_norm(Context& ctx) {
  auto P = parse_mapping(ctx.object("mapping"));
  auto G = parse_body(ctx.text("body"), P.k());
  OperatorSpec op{P, G, {}, OperatorKind::average, std::nullopt, Backend::direct};
  const std::string kind = ctx.text("kind");
  if (kind == "sing") {
    op.kind = OperatorKind::singular;
    op.K = parse_kernel(ctx.text("kernel"));
  } else if (kind != "avg") {
    throw config_error("operator-norm: kind must be 'avg' or 'sing'");
  }
  for (long e = 0; e <= ctx.integer("n_max_exp"); ++e) op.N_set.push_back(1L << e);
  EnsembleSpec ens{static_cast<std::size_t>(ctx.integer("members")), ctx.integer("half_width"), ctx.seed()};
  const long Nmax = op.N_set.back();
  ctx.require_points(static_cast<double>(lattice_count(G, static_cast<double>(Nmax))), "operator-norm: lattice points at the largest N");
  ctx.require_points(std::pow(2.0 * static_cast<double>(ens.half_width) + 1, P.target_dim()), "operator-norm: input grid");
  const double p = ctx.number("p");
  const auto rs = ctx.numbers("rs");
  ctx.tick();
  auto sweep = norm_sweep(p, rs, ens, op);
  for (const auto& st : sweep.per_r) {
    const Params tag{{"p", fmt(p)}, {"r", fmt(st.r)}};
    ctx.add("max_ratio", tag, st.max_ratio, std::nullopt, st.scaled());
    ctx.add("mean_ratio", tag, st.mean_ratio);
  }
  ctx.add("fitted_constant", {{"p", fmt(p)}}, sweep.fitted_constant, std::nullopt, std::nullopt, Check::fitted);

  // the two backends must agree on one member at the largest N
  ctx.tick();
  auto f = ensemble_member(ens, P.target_dim(), 0);
  OperatorOptions fft;
  fft.backend = Backend::fft;
  fft.max_cells = ctx.budgets().max_lattice_points;
  OperatorOptions direct;
  direct.max_cells = ctx.budgets().max_lattice_points;
  GridFunction a, b;
  if (op.kind == OperatorKind::average) {
    a = radon_average(f, P, Nmax, G, direct).output;
    b = radon_average(f, P, Nmax, G, fft).output;
  } else {
    a = truncated_singular(f, P, Nmax, *op.K, G, direct).output;
    b = truncated_singular(f, P, Nmax, *op.K, G, fft).output;
  }
  ctx.add("backend_rel_diff", {{"N", fmt(Nmax)}}, relative_difference(a, b), 1e-10, std::nullopt, Check::le);
}

// ---------------------------------------------------------------------------
// lepingle / good-lambda
// ---------------------------------------------------------------------------

inline FieldEnsemble field_ensemble(const Context& ctx) {
  return FieldEnsemble{static_cast<std::size_t>(ctx.integer("fields")), static_cast<int>(ctx.integer("m")), static_cast<int>(ctx.integer("depth")),
                       ctx.seed()};
}

inline void run_lepingle(Context& ctx) {
  auto ens = field_ensemble(ctx);
  const auto rs = ctx.numbers("rs");
  for (double p : ctx.numbers("ps")) {
    ctx.tick();
    auto sw = ratio_sweep(ens, p, rs);
    for (std::size_t i = 0; i < rs.size(); ++i)
      ctx.add("max_ratio", {{"p", fmt(p)}, {"r", fmt(rs[i])}}, sw.max_ratio[i], std::nullopt, sw.scaled[i]);
    ctx.add("fitted_constant", {{"p", fmt(p)}}, sw.fitted_constant, std::nullopt, std::nullopt, Check::fitted);
    ctx.add("finite", {{"p", fmt(p)}}, sw.finite ? 1.0 : 0.0);
  }
}

inline void run_good_lambda(Context& ctx) {
  auto ens = field_ensemble(ctx);
  const double q = ctx.number("q"), r = ctx.number("r");
  const auto lambdas = ctx.numbers("lambdas");
  std::vector<std::vector<GoodLambda>> res(ens.count, std::vector<GoodLambda>(lambdas.size()));
  ctx.tick();
  parallel_for(ens.count, [&](std::size_t i) {
    auto f = ensemble_field(ens, i);
    for (std::size_t j = 0; j < lambdas.size(); ++j) res[i][j] = good_lambda_check(f, lambdas[j], q, r);
  });
  double fitted = 0;
  bool finite = true;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    double worst = 0, lhs = 0, rhs = 0;
    for (const auto& row : res) {
      double x = row[j].ratio();
      if (x >= worst) {
        worst = x;
        lhs = row[j].lhs;
        rhs = row[j].rhs;
      }
    }
    finite = finite && std::isfinite(worst);
    fitted = std::max(fitted, worst);
    ctx.add("max_ratio", {{"lambda", fmt(lambdas[j])}, {"q", fmt(q)}, {"r", fmt(r)}}, lhs, rhs, worst);
  }
  ctx.add("fitted_constant", {{"q", fmt(q)}, {"r", fmt(r)}}, fitted, std::nullopt, std::nullopt, Check::fitted);
  ctx.add("finite", {}, finite ? 1.0 : 0.0);
}

// ---------------------------------------------------------------------------
// multiplier-apply
// ---------------------------------------------------------------------------

inline void run_multiplier_apply(Context& ctx) {
  auto P = parse_mapping(ctx.object("mapping"));
  auto G = parse_body(ctx.text("body"), P.k());
  const long N = ctx.integer("N"), R = ctx.integer("half_width");
  const int dim = P.target_dim();
  ctx.require_points(static_cast<double>(lattice_count(G, static_cast<double>(N))), "multiplier-apply: lattice points");

  // kernel transform against the multiplier on a frequency grid
  auto kern = averaging_kernel(P, N, G);
  const long grid = ctx.integer("freq_grid");
  const std::size_t cells = static_cast<std::size_t>(std::pow(static_cast<double>(grid), dim));
  ctx.require_points(static_cast<double>(cells), "multiplier-apply: frequency grid");
  std::vector<double> diff(cells);
  parallel_for(cells, [&](std::size_t i) {
    std::vector<double> xi(static_cast<std::size_t>(dim));
    std::size_t rest = i;
    for (int j = dim; j-- > 0;) {
      xi[static_cast<std::size_t>(j)] = static_cast<double>(rest % static_cast<std::size_t>(grid)) / static_cast<double>(grid) - 0.5;
      rest /= static_cast<std::size_t>(grid);
    }
    diff[i] = std::abs(fourier_coefficient(kern, xi) - avg_multiplier(N, xi, P, G));
  });
  ctx.add("kernel_dft_vs_multiplier", {{"N", fmt(N)}, {"grid", fmt(grid)}}, max_of(diff), 1e-10, std::nullopt, Check::le);

  // periodic application on a box wide enough that nothing wraps around
  ctx.tick();
  Rng rng(ctx.seed());
  GridFunction f(IVec(static_cast<std::size_t>(dim), -R), IVec(static_cast<std::size_t>(dim), R));
  for (auto& v : f.values()) v = cplx(rng.normal(), rng.normal());
  auto direct = radon_average(f, P, N, G).output;
  auto terms = lattice_terms(P, N, G, OperatorKind::average, nullptr);
  IVec lo = direct.lo(), hi = direct.hi();
  double box = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    long span = terms.hi[j] - terms.lo[j] + 1;
    lo[j] -= span;
    hi[j] += span;
    box *= static_cast<double>(hi[j] - lo[j] + 1);
  }
  ctx.require_points(box, "multiplier-apply: padded box");
  auto periodic = apply_periodic_multiplier(f.embedded(lo, hi), averaging_multiplier(P, N, G));
  ctx.add("periodic_vs_direct_rel_diff", {{"N", fmt(N)}}, relative_difference(periodic, direct.embedded(lo, hi)), 1e-10, std::nullopt,
          Check::le);

  // model arc projection; overlapping cutoffs are reported, not refused
  ctx.tick();
  ArcParams ap{ctx.integer("l"), ctx.number("rho"), ctx.number("chi")};
  auto Xi = xi_projection(ctx.integer("n"), ap, component_degrees(P), false, ctx.budgets().max_set_size);
  const Params tag{{"n", fmt(ctx.integer("n"))}};
  ctx.add("projection_fractions", tag, static_cast<double>(Xi.fractions));
  ctx.add("projection_overlaps", tag, static_cast<double>(Xi.overlaps));
  ctx.add("projection_model_regime", tag, Xi.model_regime ? 1.0 : 0.0);
  auto g = apply_periodic_multiplier(f.embedded(lo, hi), Xi);
  ctx.add("projection_l2_ratio", tag, g.norm(2.0) / f.norm(2.0));
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

inline const std::vector<ExperimentInfo>& experiments() {
  using K = ParamKind;
  static const std::vector<ExperimentInfo> list{
      {"gauss-scan",
       "max |G(a/q)| over reduced a for every q, the quadratic closed form, and a fitted decay exponent",
       {{"k", K::integer, 1, "dimension of the variable"},
        {"deg", K::integer, 2, "largest exponent per coordinate in Gamma"},
        {"q_min", K::integer, 1, "first denominator"},
        {"q_max", K::integer, 199, "last denominator"}},
       run_gauss_scan},
      {"weyl-decay",
       "|S_N|/N^k for a real polynomial along N = 2^j with fitted log and power decay",
       {{"poly", K::object, json::parse("[[1.4142135623730951, 2], [0.6180339887498949, 1]]"), "terms [coeff, e1..ek]"},
        {"body", K::text, "ball", "ball or box"},
        {"n_min_exp", K::integer, 4, "smallest N = 2^j"},
        {"n_max_exp", K::integer, 14, "largest N = 2^j"},
        {"beta", K::number, 1.0, "exponent of the convergent window"}},
       run_weyl_decay},
      {"vr-suite",
       "dynamic program vs brute force for V_r, and the explicit-constant seminorm inequalities",
       {{"n_min", K::integer, 2, "shortest sequence"},
        {"n_max", K::integer, 12, "longest sequence (at most 16)"},
        {"trials", K::integer, 500, "random sequences per n"},
        {"rs", K::numbers, json::array({1.0, 1.5, 2.0, 3.0, 10.0}), "exponents r"},
        {"s_max", K::integer, 6, "largest s for length 2^s + 1 ensembles"},
        {"square_trials", K::integer, 1000, "sequences per s"},
        {"square_rs", K::numbers, json::array({2.0, 3.0}), "exponents r >= 2 for the inequality ensembles"},
        {"lambdas", K::numbers, json::array({0.25, 1.0, 2.5}), "jump thresholds"}},
       run_vr_suite},
      {"prop0-fit",
       "major-arc approximation of the averaging multiplier by G(a/q) Phi_N",
       {{"trials", K::integer, 200, "random admissible tuples"},
        {"n_min_exp", K::integer, 6, "smallest N = 2^j of the random tuples"},
        {"n_max_exp", K::integer, 12, "largest N = 2^j"},
        {"l2_max", K::number, 4.0, "upper end of the L2 draw"},
        {"exact_min_exp", K::integer, 4, "smallest N = 3^j for xi = a/q"},
        {"exact_max_exp", K::integer, 8, "largest N = 3^j"},
        {"exact_q_max", K::integer, 40, "largest q for xi = a/q"},
        {"decay_points", K::integer, 50, "points of the decay sweep"},
        {"decay_min", K::number, 10.0, "smallest |N^A xi|"},
        {"decay_max", K::number, 10000.0, "largest |N^A xi|"},
        {"linear_weight", K::number, 0.3, "xi_1 / xi_2 along the sweep"}},
       [](Context& c) { run_major_arc_fit(c, false); }},
      {"prop2-fit",
       "major-arc approximation of the truncated singular multipliers (K(y) = 1/y) by G(a/q)(Psi_N - Psi_M)",
       {{"trials", K::integer, 200, "random admissible tuples"},
        {"n_min_exp", K::integer, 6, "smallest N = 2^j of the random tuples"},
        {"n_max_exp", K::integer, 12, "largest N = 2^j"},
        {"l2_max", K::number, 4.0, "upper end of the L2 draw"},
        {"exact_min_exp", K::integer, 4, "smallest N = 3^j for xi = a/q (M = N/3)"},
        {"exact_max_exp", K::integer, 8, "largest N = 3^j"},
        {"exact_q_max", K::integer, 40, "largest q for xi = a/q"},
        {"decay_points", K::integer, 50, "points of the decay sweep"},
        {"decay_min", K::number, 10.0, "smallest |N^A xi|"},
        {"decay_max", K::number, 10000.0, "largest |N^A xi|"},
        {"linear_weight", K::number, 0.3, "xi_1 / xi_2 along the sweep"}},
       [](Context& c) { run_major_arc_fit(c, true); }},
      {"iw-build",
       "Ionescu-Wainger sets P_N with containment, nesting and unique factorization checks",
       {{"rho", K::number, 1.0, "rho in (0, 1]"},
        {"n", K::integer, 4, "largest N"},
        {"n_min", K::integer, -1, "first N of the sweep (-1: same as n)"},
        {"list_limit", K::integer, 5000, "member lists up to this size go into the JSON attachments"}},
       run_iw_build},
      {"operator-norm",
       "empirical ||V_r(M_N f : N dyadic)||_p / ||f||_p over a function ensemble",
       {{"mapping", K::object, parabola_json(), "polynomial mapping"},
        {"body", K::text, "ball", "ball or box"},
        {"kind", K::text, "avg", "avg or sing"},
        {"kernel", K::text, "hilbert", "hilbert or riesz2 (kind sing)"},
        {"n_max_exp", K::integer, 4, "N runs over 1, 2, ..., 2^j"},
        {"members", K::integer, 30, "ensemble size"},
        {"half_width", K::integer, 32, "inputs live on [-w, w]^d"},
        {"p", K::number, 2.0, "Lebesgue exponent"},
        {"rs", K::numbers, json::array({2.25, 2.5, 3.0, 4.0}), "variation exponents"}},
       run_operator_norm},
      {"lepingle",
       "martingale variation ratio ||V_r||_p / ||f||_p against r over random dyadic fields",
       {{"fields", K::integer, 200, "ensemble size"},
        {"m", K::integer, 1, "dimension of the dyadic grid"},
        {"depth", K::integer, 10, "number of dyadic levels"},
        {"ps", K::numbers, json::array({1.5, 2.0, 3.0}), "Lebesgue exponents"},
        {"rs", K::numbers, json::array({2.05, 2.1, 2.25, 2.5, 3.0, 3.5, 4.0}), "variation exponents r > 2"}},
       run_lepingle},
      {"good-lambda",
       "good-lambda ratio of |{V_r > lambda, Mf < lambda/2}| to its square-function bound",
       {{"fields", K::integer, 200, "ensemble size"},
        {"m", K::integer, 1, "dimension of the dyadic grid"},
        {"depth", K::integer, 10, "number of dyadic levels"},
        {"lambdas", K::numbers, json::array({0.25, 0.5, 1.0, 2.0, 4.0}), "thresholds"},
        {"q", K::number, 2.0, "exponent q >= 2"},
        {"r", K::number, 2.5, "variation exponent r > 2"}},
       run_good_lambda},
      {"multiplier-apply",
       "kernel transform vs multiplier, periodic vs direct application, and the arc projection model",
       {{"mapping", K::object, parabola_json(), "polynomial mapping"},
        {"body", K::text, "ball", "ball or box"},
        {"N", K::integer, 3, "scale of the averaging operator"},
        {"half_width", K::integer, 4, "input lives on [-w, w]^d"},
        {"freq_grid", K::integer, 16, "frequency grid points per axis"},
        {"n", K::integer, 3, "index of the arc projection"},
        {"l", K::integer, 1, "fractions come from U_{n^l}"},
        {"rho", K::number, 1.0, "rho of the fraction set"},
        {"chi", K::number, 0.1, "dilation shift"}},
       run_multiplier_apply},
  };
  return list;
}

inline const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : experiments()) known += (known.empty() ? "" : ", ") + e.name;
  throw config_error("unknown experiment '" + name + "' (known: " + known + ")");
}

/// Defaults filled in, unknown keys and wrong types rejected.
inline json resolve_params(const ExperimentInfo& info, const json& given) {
  json out = json::object();
  for (const auto& [k, v] : given.items()) {
    bool known = std::any_of(info.params.begin(), info.params.end(), [&](const ParamSpec& p) { return p.name == k; });
    if (!known) {
      std::string list;
      for (const auto& p : info.params) list += (list.empty() ? "" : ", ") + p.name;
      throw config_error(info.name + ": unknown parameter '" + k + "' (expected one of: " + list + ")");
    }
  }
  for (const auto& p : info.params) {
    json v = given.contains(p.name) ? given.at(p.name) : p.fallback;
    const std::string where = info.name + ".params." + p.name;
    switch (p.kind) {
      case ParamKind::integer:
        if (!v.is_number_integer()) throw config_error(where + ": expected an integer");
        break;
      case ParamKind::number:
        if (!v.is_number()) throw config_error(where + ": expected a number");
        v = v.get<double>();
        break;
      case ParamKind::numbers:
        if (v.is_number()) v = json::array({v});
        if (!v.is_array() || v.empty()) throw config_error(where + ": expected a nonempty list of numbers");
        for (auto& x : v) {
          if (!x.is_number()) throw config_error(where + ": expected a nonempty list of numbers");
          x = x.get<double>();
        }
        break;
      case ParamKind::text:
        if (!v.is_string()) throw config_error(where + ": expected a string");
        break;
      case ParamKind::object:
        if (!v.is_object() && !v.is_array()) throw config_error(where + ": expected a JSON object or array");
        break;
    }
    out[p.name] = v;
  }
  return out;
}

/// Runs one experiment. Budget overruns keep the rows gathered so far and
/// mark the set truncated; every other error propagates.
inline ResultSet run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& info = find_experiment(cfg.experiment);
  ResultSet rs;
  rs.experiment = cfg.experiment;
  rs.seed = *cfg.seed;
  rs.config = resolve_params(info, cfg.params);
  const unsigned saved = default_threads();
  default_threads() = cfg.threads;
  try {
    Context ctx(cfg, rs.config, rs);
    info.run(ctx);
  } catch (const budget_exceeded& e) {
    rs.truncated = true;
    rs.truncation_reason = e.what();
  } catch (...) {
    default_threads() = saved;
    throw;
  }
  default_threads() = saved;
  return rs;
}

}  // namespace radonlab::lab
