// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radonlab/lab/lab.hpp"
#include "radonlab/martingale.hpp"
#include "radonlab/operators.hpp"

using namespace radonlab;
namespace lab = radonlab::lab;
using lab::json;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << why;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

lab::ResultSet run_experiment(const std::string& id, json params, std::uint64_t seed = 1, unsigned threads = 1) {
  lab::ExperimentConfig c;
  c.experiment = id;
  c.seed = seed;
  c.params = std::move(params);
  c.threads = threads;
  return lab::run(c);
}

// every exact row passes and nothing was cut short
void all_exact_pass(Verdict& v, const lab::ResultSet& rs) {
  v.require(!rs.truncated, rs.experiment + " truncated: " + rs.truncation_reason);
  for (const auto& r : rs.rows)
    if (auto p = r.pass(); p && !*p) v.require(false, "failed row " + r.key() + " observed " + lab::format_number(r.observed));
}

std::size_t count_exact(const lab::ResultSet& rs, const std::string& metric) {
  std::size_t n = 0;
  for (const auto* r : rs.all(metric)) n += r->pass().has_value();
  return n;
}

std::optional<double> param(const lab::ResultRow& r, const std::string& key) {
  for (const auto& [k, val] : r.params)
    if (k == key) return lab::parse_number(val);
  return std::nullopt;
}

// values ordered by `key`; the upper half may not exceed twice the lower half
bool stable_in(std::vector<std::pair<double, double>> by_key, double& lower, double& upper) {
  std::sort(by_key.begin(), by_key.end());
  const std::size_t half = (by_key.size() + 1) / 2;
  lower = upper = 0;
  for (std::size_t i = 0; i < by_key.size(); ++i) (i < half ? lower : upper) = std::max(i < half ? lower : upper, by_key[i].second);
  return upper <= 2 * lower;
}

int failures = 0;

void criterion(int id, const std::string& name, std::optional<double> limit_seconds, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string timing = num(secs) + " s";
  if (limit_seconds) {
    timing += " (limit " + num(*limit_seconds) + " s)";
    v.require(secs < *limit_seconds, "runtime " + num(secs) + " s over the limit");
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " | " << v.detail.str() << " | " << timing << std::endl;
}

// ---------------------------------------------------------------------------
// random polynomial mappings for the backend comparison
// ---------------------------------------------------------------------------

PolynomialMapping random_mapping(Rng& rng, int k, int target, int max_degree) {
  std::vector<std::vector<Term>> comps;
  for (int c = 0; c < target; ++c) {
    std::vector<Term> terms;
    std::vector<MultiIndex> used;
    const long nterms = rng.integer(1, 2);
    for (long t = 0; t < nterms; ++t) {
      MultiIndex g{std::vector<int>(static_cast<std::size_t>(k), 0)};
      const long deg = rng.integer(1, max_degree);
      for (long e = 0; e < deg; ++e) ++g.exps[static_cast<std::size_t>(rng.integer(0, k - 1))];
      if (std::find(used.begin(), used.end(), g) != used.end()) continue;
      used.push_back(g);
      long coeff = rng.integer(1, 2) * (rng.integer(0, 1) ? 1 : -1);
      terms.push_back(Term{g, coeff});
    }
    comps.push_back(std::move(terms));
  }
  return PolynomialMapping(k, std::move(comps));
}

// output box cells times lattice terms, the cost of the pointwise shift realization
double pointwise_work(const PolynomialMapping& P, long N, const ConvexBody& G, long R, double& cells) {
  auto t = lattice_terms(P, N, G, OperatorKind::average, nullptr);
  cells = 1;
  for (std::size_t j = 0; j < t.lo.size(); ++j) cells *= static_cast<double>(t.hi[j] - t.lo[j] + 2 * R + 1);
  return cells * static_cast<double>(t.images.size());
}

struct BackendGap {
  double relative = 0;  // ||a - b|| / max(||a||, ||b||), sup norms
  double scaled = 0;  // ||a - b|| / (sum |w| ||f||), the operator's own scale
  bool vanishing = false;  // output is rounding noise on that scale
};

BackendGap backend_gap(const GridFunction& a, const GridFunction& b, const GridFunction& f, const std::vector<double>& weights) {
  double wsum = 0;
  for (double w : weights) wsum += std::abs(w);
  const double scale = wsum * f.norm(INFINITY);
  BackendGap g;
  g.relative = relative_difference(a, b);
  g.scaled = combine(1.0, a, -1.0, b).norm(INFINITY) / scale;
  g.vanishing = std::max(a.norm(INFINITY), b.norm(INFINITY)) <= 1e-12 * scale;
  return g;
}

}  // namespace

int main() {
  std::cout << "acceptance run, one line per criterion" << std::endl;

  criterion(1, "dynamic-programming variation equals brute force", 30.0, [](Verdict& v) {
    auto rs = run_experiment("vr-suite", json::parse(R"({"square_trials": 0})"));
    all_exact_pass(v, rs);
    const std::size_t cells = count_exact(rs, "dp_vs_bruteforce_rel_error");
    v.require(cells == 11 * 5, "expected 55 (n, r) cells, got " + std::to_string(cells));
    for (const auto* r : rs.all("dp_vs_bruteforce_rel_error")) v.require(r->tolerance == 1e-12 || r->bound == 1e-12, "tolerance drifted");
    const auto* mx = rs.find("max_rel_error");
    v.require(mx != nullptr, "missing max_rel_error");
    if (v.pass) v.detail << "500 sequences per cell, n 2..12, r {1,1.5,2,3,10}; max relative error " << num(mx->observed);
  });

  lab::ResultSet vr_full;
  criterion(2, "dyadic square-function variation bound with constant sqrt(2)", 60.0, [&](Verdict& v) {
    vr_full = run_experiment("vr-suite", json::parse(R"({"trials": 1, "n_max": 2})"));
    all_exact_pass(v, vr_full);
    const std::size_t cells = count_exact(vr_full, "dyadic_square_excess");
    v.require(cells == 12, "expected 12 (s, r) cells, got " + std::to_string(cells));
    double worst = 0;
    for (const auto* r : vr_full.all("dyadic_square_excess")) worst = std::max(worst, r->ratio.value_or(INFINITY));
    if (v.pass) v.detail << "1000 sequences per (s, r), s 1..6, r {2,3}; zero violations, worst lhs/rhs " << num(worst);
  });

  criterion(3, "explicit-constant seminorm inequalities", std::nullopt, [&](Verdict& v) {
    v.require(!vr_full.rows.empty(), "ensemble run from criterion 2 is missing");
    std::size_t checked = 0;
    std::ostringstream worst;
    for (const char* metric : {"split_excess", "sup_excess", "l2_excess", "jump_excess", "oscillation_excess"}) {
      double w = 0;
      for (const auto* r : vr_full.all(metric)) {
        ++checked;
        v.require(r->pass().value_or(false), std::string("violation in ") + r->key());
        w = std::max(w, r->ratio.value_or(INFINITY));
      }
      worst << " " << metric << " " << num(w);
    }
    v.require(checked == 5 * 12, "expected 60 rows, got " + std::to_string(checked));
    if (v.pass) v.detail << "zero violations over " << checked << " (inequality, s, r) cells, timed with criterion 2; worst lhs/rhs:" << worst.str();
  });

  criterion(4, "quadratic Gauss sums and decay exponent", 120.0, [](Verdict& v) {
    auto rs = run_experiment("gauss-scan", json::parse(R"({"q_max": 200})"));
    all_exact_pass(v, rs);
    std::size_t odd = 0;
    for (long q = 1; q <= 199; q += 2) odd += rs.find("quadratic_gauss_abs", {{"q", std::to_string(q)}}) != nullptr;
    v.require(odd == 100, "expected 100 odd moduli, got " + std::to_string(odd));
    for (const auto* r : rs.all("quadratic_gauss_abs")) v.require(r->tolerance <= 1e-9, "tolerance above 1e-9");
    const auto* delta = rs.find("decay_exponent");
    v.require(delta && std::isfinite(delta->observed), "missing decay exponent");
    if (delta) v.require(delta->observed >= 0.45, "fitted exponent " + num(delta->observed) + " below 0.45");
    if (v.pass) v.detail << "|G| = q^(-1/2) within 1e-9 for all odd q <= 199; fitted exponent " << num(delta->observed) << " >= 0.45";
  });

  lab::ResultSet prop0, prop2;
  criterion(5, "major-arc approximation errors bounded by one fitted constant", 300.0, [&](Verdict& v) {
    prop0 = run_experiment("prop0-fit", json::object());
    prop2 = run_experiment("prop2-fit", json::object());
    for (const auto* rs : {&prop0, &prop2}) {
      all_exact_pass(v, *rs);
      std::vector<std::pair<double, double>> random, exact;
      for (const auto* r : rs->all("approximation_error")) {
        double ratio = r->ratio.value_or(NAN);
        v.require(std::isfinite(ratio), rs->experiment + ": nonfinite ratio in " + r->key());
        random.emplace_back(param(*r, "N").value_or(NAN), ratio);
      }
      for (const auto* r : rs->all("exact_scaled_error")) {
        v.require(std::isfinite(r->observed), rs->experiment + ": nonfinite value in " + r->key());
        exact.emplace_back(param(*r, "N").value_or(NAN), r->observed);
      }
      v.require(random.size() == 200, rs->experiment + ": expected 200 tuples, got " + std::to_string(random.size()));
      v.require(exact.size() == 5, rs->experiment + ": expected N = 3^4..3^8, got " + std::to_string(exact.size()) + " values");
      const auto* fit = rs->find("fitted_constant");
      const auto* efit = rs->find("exact_fitted_constant");
      v.require(fit && std::isfinite(fit->observed) && efit && std::isfinite(efit->observed), rs->experiment + ": fitted constant missing or nonfinite");
      if (!fit || !efit) continue;
      for (const auto& [n, x] : random) v.require(x <= fit->observed * (1 + 1e-12), rs->experiment + ": ratio above the fitted constant");
      for (const auto& [n, x] : exact) v.require(x <= efit->observed * (1 + 1e-12), rs->experiment + ": exact value above its fitted constant");
      double lo = 0, hi = 0, elo = 0, ehi = 0;
      v.require(stable_in(random, lo, hi), rs->experiment + ": ratio grows with N (upper half " + num(hi) + " vs lower half " + num(lo) + ")");
      v.require(stable_in(exact, elo, ehi), rs->experiment + ": exact error*N/q grows with N (" + num(ehi) + " vs " + num(elo) + ")");
      v.detail << rs->experiment << " constant " << num(fit->observed) << " (lower/upper half " << num(lo) << "/" << num(hi) << "), exact "
               << num(efit->observed) << " (" << num(elo) << "/" << num(ehi) << ")" << (rs == &prop0 ? "; " : "");
    }
  });

  criterion(6, "oscillatory integral decay slopes", 120.0, [&](Verdict& v) {
    for (auto [rs, metric, series] : {std::tuple{&prop0, "phi_decay_slope", "phi_abs"}, std::tuple{&prop2, "psi_decay_slope", "psi_difference_abs"}}) {
      v.require(!rs->rows.empty(), "sweep run from criterion 5 is missing");
      const auto* s = rs->find(metric);
      v.require(s != nullptr, std::string("missing ") + metric);
      if (!s) continue;
      const double d = param(*s, "d").value_or(NAN);
      const std::size_t points = rs->all(series).size();
      v.require(points == 50, std::string(series) + ": expected 50 sweep points, got " + std::to_string(points));
      v.require(s->observed <= -1.0 / d + 0.1, std::string(metric) + " " + num(s->observed) + " above " + num(-1.0 / d + 0.1));
      v.detail << metric << " " << num(s->observed) << " <= " << num(-1.0 / d + 0.1) << ", ";
    }
    v.detail << "50-point sweeps timed with criterion 5";
  });

  criterion(7, "operator backends, mass, linearity and shift realization", std::nullopt, [](Verdict& v) {
    Rng rng(2024);
    double worst_backend = 0, worst_vanishing = 0, worst_mass = 0, worst_linear = 0;
    std::size_t singular_cases = 0, vanishing_cases = 0, ergodic_mismatch = 0;
    auto record = [&](const BackendGap& g) {
      if (g.vanishing) {
        ++vanishing_cases;
        worst_vanishing = std::max(worst_vanishing, g.scaled);
      } else {
        worst_backend = std::max(worst_backend, g.relative);
      }
    };
    for (int trial = 0; trial < 100; ++trial) {
      const int k = static_cast<int>(rng.integer(1, 2));
      const int target = static_cast<int>(rng.integer(1, 2));
      auto P = random_mapping(rng, k, target, 3);
      auto G = rng.integer(0, 1) ? ConvexBody::ball(k) : ConvexBody::box(std::vector<double>(static_cast<std::size_t>(k), 0.75));
      const long R = rng.integer(2, 6);
      long N = rng.integer(1, 32);
      double cells = 0;
      while (N > 1 && (pointwise_work(P, N, G, R, cells) > 5e7 || cells > 4e6)) N /= 2;
      GridFunction f(IVec(static_cast<std::size_t>(target), -R), IVec(static_cast<std::size_t>(target), R));
      GridFunction g = f;
      for (auto& x : f.values()) x = cplx(rng.normal(), rng.normal());
      for (auto& x : g.values()) x = cplx(rng.normal(), rng.normal());
      OperatorOptions fft;
      fft.backend = Backend::fft;

      auto Mf = radon_average(f, P, N, G).output;
      record(backend_gap(Mf, radon_average(f, P, N, G, fft).output, f, {1.0}));
      worst_mass = std::max(worst_mass, std::abs(Mf.sum() - f.sum()) / f.norm(1.0));
      const cplx a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
      auto lhs = radon_average(combine(a, f, b, g), P, N, G).output;
      worst_linear = std::max(worst_linear, relative_difference(lhs, combine(a, Mf, b, radon_average(g, P, N, G).output)));
      ergodic_mismatch += ergodic_average(f, P, N, G).values() != Mf.values();

      if (N >= 2) {
        auto K = k == 1 ? hilbert_kernel() : second_order_riesz_kernel();
        auto Tf = truncated_singular(f, P, N, K, G).output;
        record(backend_gap(Tf, truncated_singular(f, P, N, K, G, fft).output, f, lattice_terms(P, N, G, OperatorKind::singular, &K).weights));
        ergodic_mismatch += ergodic_singular(f, P, N, K, G).values() != Tf.values();
        ++singular_cases;
      }
    }
    v.require(worst_backend <= 1e-10, "direct vs FFT relative difference " + num(worst_backend));
    v.require(worst_vanishing <= 1e-10, "direct vs FFT difference " + num(worst_vanishing) + " on a vanishing output");
    v.require(worst_mass <= 1e-12, "mass defect " + num(worst_mass));
    v.require(worst_linear <= 1e-12, "linearity defect " + num(worst_linear));
    v.require(ergodic_mismatch == 0, std::to_string(ergodic_mismatch) + " shift realizations differ");
    if (v.pass)
      v.detail << "100 random inputs (" << singular_cases << " also singular); backend diff " << num(worst_backend) << " (" << vanishing_cases
               << " outputs vanish by symmetry, diff " << num(worst_vanishing) << " of the operator scale), mass "
               << num(worst_mass) << ", linearity " << num(worst_linear) << ", shift realization bitwise equal";
  });

  criterion(8, "multiplier consistency", std::nullopt, [](Verdict& v) {
    const json surface = json::parse(R"({"k": 2, "components": [[[1, 1, 0], [1, 0, 2]], [[1, 1, 1]]]})");
    std::vector<json> cases{json::object(), json::parse(R"({"N": 5, "half_width": 6})"), json{{"mapping", surface}, {"body", "box"}, {"N", 2}}};
    double kernel = 0, periodic = 0;
    for (const auto& params : cases) {
      auto rs = run_experiment("multiplier-apply", params);
      all_exact_pass(v, rs);
      const auto* a = rs.find("kernel_dft_vs_multiplier");
      const auto* b = rs.find("periodic_vs_direct_rel_diff");
      v.require(a && b, "missing comparison rows");
      if (!a || !b) continue;
      v.require(a->bound.value_or(1) <= 1e-10 && b->bound.value_or(1) <= 1e-10, "bound above 1e-10");
      kernel = std::max(kernel, a->observed);
      periodic = std::max(periodic, b->observed);
    }
    if (v.pass) v.detail << "3 settings; kernel DFT vs multiplier " << num(kernel) << ", periodic vs direct " << num(periodic) << " (<= 1e-10)";
  });

  criterion(9, "Ionescu-Wainger sets: containment, nesting, unique factorization", 30.0, [](Verdict& v) {
    for (double rho : {1.0, 0.5}) {
      auto rs = run_experiment("iw-build", json{{"rho", rho}, {"n_min", 1}, {"n", 30}, {"list_limit", 0}});
      all_exact_pass(v, rs);
      for (const char* metric : {"initial_segment_missing", "nesting_missing", "duplicate_products", "factorization_failures"}) {
        const std::size_t n = count_exact(rs, metric);
        v.require(n == 30, std::string(metric) + ": expected 30 rows, got " + std::to_string(n));
      }
      const auto* top = rs.find("members", {{"N", "30"}, {"rho", lab::format_number(rho)}});
      if (top) v.detail << (rho == 1.0 ? "" : "; ") << "rho " << lab::format_number(rho) << ": N 1..30, |P_30| = " << lab::format_number(top->observed);
    }
  });

  criterion(10, "martingale identities, Haar cases, variation and good-lambda ensembles", 300.0, [](Verdict& v) {
    // tower property and orthogonality on random fields
    double tower = 0, ortho = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      FieldEnsemble e{12, static_cast<int>(1 + i % 2), i % 2 ? 5 : 8, 99};
      auto f = ensemble_field(e, i);
      std::vector<DyadicField> E;
      for (int k = 0; k <= f.depth(); ++k) E.push_back(conditional_expectation(f, k));
      for (int j = 0; j <= f.depth(); ++j)
        for (int k = 0; k <= f.depth(); ++k) {
          auto both = conditional_expectation(E[static_cast<std::size_t>(k)], j);
          const auto& want = E[static_cast<std::size_t>(std::min(j, k))];
          for (std::size_t c = 0; c < f.size(); ++c) tower = std::max(tower, std::abs(both[c] - want[c]) / std::max(1.0, f.norm(INFINITY)));
        }
      auto oc = orthogonality(f);
      ortho = std::max(ortho, std::abs(oc.total - oc.decomposed) / std::max(oc.total, 1e-300));
      ortho = std::max(ortho, std::abs(oc.square_norm - oc.centered_norm) / std::max(oc.centered_norm, 1e-300));
    }
    v.require(tower <= 1e-10, "tower property defect " + num(tower));
    v.require(ortho <= 1e-10, "orthogonality defect " + num(ortho));

    // Haar functions: E_k h vanishes up to the support level and equals h after it
    std::size_t haar_bad = 0;
    for (int m : {1, 2})
      for (int level = 0; level < 4; ++level) {
        DyadicField h(m, 5);
        const std::size_t cell = static_cast<std::size_t>(level) % (std::size_t{1} << (m * level));
        for (std::size_t i = 0; i < h.size(); ++i) {
          if (h.ancestor(i, level) != cell) continue;
          // sign from the first coordinate of the child at level + 1
          auto c = h.cell(i);
          h.values()[i] = ((c[0] >> (5 - level - 1)) & 1) ? -1.0 : 1.0;
        }
        MartingaleSequence ms(h);
        for (std::size_t i = 0; i < h.size(); ++i)
          for (int k = 0; k <= 5; ++k) haar_bad += ms.value(k, i) != (k <= level ? 0.0 : h[i]);
        auto sm = square_and_maximal(h);
        auto var = martingale_variation(h, 3.0);
        for (std::size_t i = 0; i < h.size(); ++i) {
          haar_bad += sm.square[i] != std::abs(h[i]);
          haar_bad += sm.maximal[i] != std::abs(h[i]);
          haar_bad += var[i] != std::abs(h[i]);
        }
      }
    v.require(haar_bad == 0, std::to_string(haar_bad) + " Haar values differ");

    auto lep = run_experiment("lepingle", json::object());
    all_exact_pass(v, lep);
    for (const auto* r : lep.all("max_ratio")) v.require(std::isfinite(r->observed) && std::isfinite(r->ratio.value_or(NAN)), "nonfinite " + r->key());
    std::ostringstream fits;
    for (const auto* r : lep.all("fitted_constant")) {
      v.require(std::isfinite(r->observed), "nonfinite " + r->key());
      fits << " p=" << lab::format_number(*param(*r, "p")) << ":" << num(r->observed);
    }
    v.require(lep.all("fitted_constant").size() == 3, "expected p in {1.5, 2, 3}");
    v.require(lep.all("max_ratio").size() == 21, "expected 7 exponents r per p");

    // good-lambda: every field and level sits below the reported ratio
    auto gl = run_experiment("good-lambda", json::object());
    all_exact_pass(v, gl);
    const auto* fit = gl.find("fitted_constant");
    v.require(fit && std::isfinite(fit->observed), "good-lambda ratio missing or nonfinite");
    std::size_t checked = 0;
    if (fit) {
      FieldEnsemble e{static_cast<std::size_t>(gl.config.at("fields").get<long>()), static_cast<int>(gl.config.at("m").get<long>()),
                      static_cast<int>(gl.config.at("depth").get<long>()), gl.seed};
      const double q = gl.config.at("q").get<double>(), r = gl.config.at("r").get<double>();
      for (std::size_t i = 0; i < e.count; ++i) {
        auto f = ensemble_field(e, i);
        for (const auto& lam : gl.config.at("lambdas")) {
          auto g = good_lambda_check(f, lam.get<double>(), q, r);
          v.require(g.lhs <= fit->observed * g.rhs * (1 + 1e-12) + 1e-300, "good-lambda violated at field " + std::to_string(i));
          ++checked;
        }
      }
    }
    if (v.pass)
      v.detail << "tower " << num(tower) << ", orthogonality " << num(ortho) << ", 8 Haar cases exact; variation constants" << fits.str()
               << "; good-lambda ratio " << num(fit->observed) << " holds on " << checked << " (field, lambda) pairs";
  });

  criterion(11, "output independent of thread count", std::nullopt, [](Verdict& v) {
    const std::vector<std::pair<std::string, json>> cases = {
        {"vr-suite", json::parse(R"({"n_max": 6, "trials": 30, "square_trials": 30, "s_max": 3})")},
        {"gauss-scan", json::parse(R"({"q_max": 60})")},
        {"weyl-decay", json::parse(R"({"n_max_exp": 10})")},
        {"prop0-fit", json::object()},
        {"prop2-fit", json::object()},
        {"iw-build", json::parse(R"({"rho": 0.5, "n_min": 1, "n": 20})")},
        {"operator-norm", json::parse(R"({"members": 8, "half_width": 12})")},
        {"lepingle", json::parse(R"({"fields": 40, "depth": 8})")},
        {"good-lambda", json::parse(R"({"fields": 40, "depth": 8})")},
        {"multiplier-apply", json::object()},
    };
    for (const auto& [id, params] : cases) {
      auto one = run_experiment(id, params, 11, 1);
      auto four = run_experiment(id, params, 11, 4);
      v.require(lab::to_csv(one) == lab::to_csv(four), id + ": CSV differs");
      v.require(lab::to_json(one).dump(2) == lab::to_json(four).dump(2), id + ": JSON differs");
    }
    if (v.pass) v.detail << "all 10 experiments byte-identical in CSV and JSON at 1 and 4 threads";
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
