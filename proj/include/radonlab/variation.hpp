#pragma once

// r-variation, long/short variation, oscillation and lambda-jump functionals
// together with evaluators for the numerical inequalities they satisfy.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "radonlab/common.hpp"

namespace radonlab {

/// Finite sequence with strictly increasing real labels.
class SeqSample {
 public:
  SeqSample(std::vector<cplx> values, std::vector<double> labels) : values_(std::move(values)), labels_(std::move(labels)) {
    require(!values_.empty(), "SeqSample: empty sequence");
    require(values_.size() == labels_.size(), "SeqSample: labels and values differ in length");
    for (std::size_t i = 1; i < labels_.size(); ++i)
      require(labels_[i] > labels_[i - 1], "SeqSample: labels must be strictly increasing");
  }
  explicit SeqSample(std::vector<cplx> values) : SeqSample(values, default_labels(values.size())) {}
  explicit SeqSample(const std::vector<double>& real_values) : SeqSample(to_complex(real_values)) {}
  SeqSample(const std::vector<double>& real_values, std::vector<double> labels)
      : SeqSample(to_complex(real_values), std::move(labels)) {}

  std::size_t size() const { return values_.size(); }
  const std::vector<cplx>& values() const { return values_; }
  const std::vector<double>& labels() const { return labels_; }
  cplx operator[](std::size_t i) const { return values_[i]; }

  /// Subsequence at the given positions (must be increasing).
  SeqSample select(const std::vector<std::size_t>& pos) const {
    std::vector<cplx> v;
    std::vector<double> l;
    for (std::size_t p : pos) {
      v.push_back(values_[p]);
      l.push_back(labels_[p]);
    }
    return {v, l};
  }

  bool has_integer_labels() const {
    return std::all_of(labels_.begin(), labels_.end(), [](double x) { return x == std::floor(x); });
  }

 private:
  static std::vector<double> default_labels(std::size_t n) {
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<double>(i);
    return l;
  }
  static std::vector<cplx> to_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

  std::vector<cplx> values_;
  std::vector<double> labels_;
};

enum class VariationMethod { dp_exact, brute_force, upper_bound };

struct VariationResult {
  double value = 0.0;
  std::vector<double> witness;  // labels of a maximising subsequence
  VariationMethod method = VariationMethod::dp_exact;
};

/// Result of evaluating one side-by-side inequality lhs <= rhs.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double ratio() const { return rhs > 0 ? lhs / rhs : (lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0); }
};

inline constexpr double kInequalitySlack = 1e-9;

inline InequalityCheck make_check(double lhs, double rhs) { return {lhs, rhs, lhs <= rhs + kInequalitySlack}; }

// ---------------------------------------------------------------------------
// r-variation
// ---------------------------------------------------------------------------

/// Variation along the given labelled points re-evaluated from scratch.
inline double variation_of_chain(const SeqSample& a, const std::vector<std::size_t>& chain, double r) {
  double s = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) s += std::pow(std::abs(a[chain[i]] - a[chain[i - 1]]), r);
  return std::pow(s, 1.0 / r);
}

/// Exact r-variation by dynamic programming over the last gap:
/// B[j] = max(0, max_{i<j} B[i] + |a_j - a_i|^r), V_r = (max_j B[j])^{1/r}.
inline VariationResult vr_exact(const SeqSample& a, double r) {
  require(r >= 1.0 && std::isfinite(r), "vr_exact: r must be finite and >= 1");
  const std::size_t n = a.size();
  std::vector<double> best(n, 0.0);
  std::vector<long> pred(n, -1);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double cand = best[i] + std::pow(std::abs(a[j] - a[i]), r);
      if (cand > best[j]) {
        best[j] = cand;
        pred[j] = static_cast<long>(i);
      }
    }
  }
  std::size_t arg = static_cast<std::size_t>(std::max_element(best.begin(), best.end()) - best.begin());
  VariationResult res;
  res.value = std::pow(best[arg], 1.0 / r);
  res.method = VariationMethod::dp_exact;
  std::vector<double> w;
  for (long p = static_cast<long>(arg); p >= 0; p = pred[static_cast<std::size_t>(p)]) w.push_back(a.labels()[static_cast<std::size_t>(p)]);
  std::reverse(w.begin(), w.end());
  res.witness = std::move(w);
  return res;
}

inline double vr(const SeqSample& a, double r) { return vr_exact(a, r).value; }

inline constexpr std::size_t kBruteForceMaxLength = 16;

/// Exhaustive maximum over all subsequences (oracle).
inline VariationResult vr_bruteforce(const SeqSample& a, double r) {
  require(r >= 1.0 && std::isfinite(r), "vr_bruteforce: r must be finite and >= 1");
  const std::size_t n = a.size();
  if (n > kBruteForceMaxLength) throw budget_exceeded("vr_bruteforce: length above 16", std::ldexp(1.0, static_cast<int>(n)));
  double best = 0.0;
  std::uint32_t best_mask = 1;
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    double s = 0.0;
    long prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1U << i))) continue;
      if (prev >= 0) s += std::pow(std::abs(a[i] - a[static_cast<std::size_t>(prev)]), r);
      prev = static_cast<long>(i);
    }
    if (s > best) {
      best = s;
      best_mask = mask;
    }
  }
  VariationResult res;
  res.value = std::pow(best, 1.0 / r);
  res.method = VariationMethod::brute_force;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask & (1U << i)) res.witness.push_back(a.labels()[i]);
  return res;
}

// ---------------------------------------------------------------------------
// long and short variation
// ---------------------------------------------------------------------------

inline bool is_power_of_two(long x) { return x > 0 && (x & (x - 1)) == 0; }

struct LongShortVariation {
  double long_part = 0.0;
  double short_part = 0.0;
};

/// V_r^L over dyadic labels {2^n} and V_r^S = (sum_n V_r(block [2^n, 2^{n+1}))^r)^{1/r}.
inline LongShortVariation vr_long_short(const SeqSample& a, double r) {
  require(a.has_integer_labels(), "vr_long_short: labels must be integers");
  require(a.labels().front() >= 1, "vr_long_short: labels must be positive integers");
  std::vector<std::size_t> dyadic;
  std::map<int, std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto l = static_cast<long>(a.labels()[i]);
    if (is_power_of_two(l)) dyadic.push_back(i);
    int n = 0;
    while ((2L << n) <= l) ++n;
    blocks[n].push_back(i);
  }
  LongShortVariation out;
  if (!dyadic.empty()) out.long_part = vr(a.select(dyadic), r);
  double s = 0.0;
  for (const auto& [n, pos] : blocks) s += std::pow(vr(a.select(pos), r), r);
  out.short_part = std::pow(s, 1.0 / r);
  return out;
}

inline double vr_long(const SeqSample& a, double r) { return vr_long_short(a, r).long_part; }
inline double vr_short(const SeqSample& a, double r) { return vr_long_short(a, r).short_part; }

// ---------------------------------------------------------------------------
// oscillation
// ---------------------------------------------------------------------------

/// O_J = (sum_{j=1}^J sup_{n_j < n <= n_{j+1}} |a_n - a_{n_j}|^2)^{1/2}; the
/// lacunary entries are labels of `a`.
inline double oscillation(const SeqSample& a, const std::vector<double>& lacunary, int J) {
  require(J >= 1, "oscillation: J must be positive");
  require(static_cast<std::size_t>(J) + 1 <= lacunary.size(), "oscillation: J exceeds the available lacunary gaps");
  for (std::size_t i = 1; i < lacunary.size(); ++i)
    require(lacunary[i] > lacunary[i - 1], "oscillation: lacunary sequence must be strictly increasing");
  const auto& lab = a.labels();
  auto position = [&](double label) {
    auto it = std::lower_bound(lab.begin(), lab.end(), label);
    require(it != lab.end() && *it == label, "oscillation: lacunary entry is not a label of the sequence");
    return static_cast<std::size_t>(it - lab.begin());
  };
  double s = 0.0;
  for (int j = 0; j < J; ++j) {
    std::size_t lo = position(lacunary[static_cast<std::size_t>(j)]);
    std::size_t hi = position(lacunary[static_cast<std::size_t>(j) + 1]);
    double m = 0.0;
    for (std::size_t n = lo + 1; n <= hi; ++n) m = std::max(m, std::abs(a[n] - a[lo]));
    s += m * m;
  }
  return std::sqrt(s);
}

/// O_J <= J^{1/2 - 1/r} V_r for r >= 2.
inline InequalityCheck oscillation_holder_check(const SeqSample& a, const std::vector<double>& lacunary, int J, double r) {
  require(r >= 2.0, "oscillation_holder_check: r must be >= 2");
  return make_check(oscillation(a, lacunary, J), std::pow(J, 0.5 - 1.0 / r) * vr(a, r));
}

// ---------------------------------------------------------------------------
// lambda jumps
// ---------------------------------------------------------------------------

/// Longest chain t_1 < ... < t_J with |a_{t_{j+1}} - a_{t_j}| > lambda (strict),
/// counted in points; exact O(n^2) longest-path recursion.
inline long jump_count(const SeqSample& a, double lambda) {
  require(lambda > 0, "jump_count: lambda must be positive");
  const std::size_t n = a.size();
  std::vector<long> len(n, 1);
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (std::abs(a[j] - a[i]) > lambda) len[j] = std::max(len[j], len[i] + 1);
  return *std::max_element(len.begin(), len.end());
}

/// Exhaustive chain search (oracle).
inline long jump_count_bruteforce(const SeqSample& a, double lambda) {
  require(lambda > 0, "jump_count_bruteforce: lambda must be positive");
  const std::size_t n = a.size();
  if (n > kBruteForceMaxLength) throw budget_exceeded("jump_count_bruteforce: length above 16", std::ldexp(1.0, static_cast<int>(n)));
  long best = 1;
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    long cnt = 0;
    long prev = -1;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1U << i))) continue;
      if (prev >= 0 && !(std::abs(a[i] - a[static_cast<std::size_t>(prev)]) > lambda)) ok = false;
      prev = static_cast<long>(i);
      ++cnt;
    }
    if (ok) best = std::max(best, cnt);
  }
  return best;
}

/// Number of jumps J_lambda - 1 against lambda^{-r} V_r^r.
inline InequalityCheck jump_variation_check(const SeqSample& a, double lambda, double r) {
  double jumps = static_cast<double>(jump_count(a, lambda) - 1);
  return make_check(jumps, std::pow(vr(a, r), r) / std::pow(lambda, r));
}

// ---------------------------------------------------------------------------
// elementary seminorm inequalities
// ---------------------------------------------------------------------------

/// sup_j |a_j| <= 2 V_r + |a_{j0}|
inline InequalityCheck sup_bound_check(const SeqSample& a, double r, std::size_t j0) {
  require(j0 < a.size(), "sup_bound_check: j0 out of range");
  double sup = 0;
  for (const auto& v : a.values()) sup = std::max(sup, std::abs(v));
  return make_check(sup, 2.0 * vr(a, r) + std::abs(a[j0]));
}

/// V_r(u..v) <= 2 sup|a| + V_r(u..w) + V_r(w..v), split at position w (0 < w < n).
inline InequalityCheck split_bound_check(const SeqSample& a, double r, std::size_t w) {
  require(w > 0 && w < a.size(), "split_bound_check: split position must be interior");
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < a.size(); ++i) (i < w ? left : right).push_back(i);
  double sup = 0;
  for (const auto& v : a.values()) sup = std::max(sup, std::abs(v));
  return make_check(vr(a, r), 2.0 * sup + vr(a.select(left), r) + vr(a.select(right), r));
}

/// For r >= 2: V_r <= 2 (sum |a_j|^2)^{1/2}
inline InequalityCheck l2_bound_check(const SeqSample& a, double r) {
  require(r >= 2.0, "l2_bound_check: r must be >= 2");
  double s = 0;
  for (const auto& v : a.values()) s += std::norm(v);
  return make_check(vr(a, r), 2.0 * std::sqrt(s));
}

// ---------------------------------------------------------------------------
// dyadic square-sum bound
// ---------------------------------------------------------------------------

/// V_r(a_0..a_{2^s}) <= sqrt(2) sum_{i=0}^{s} (sum_j |a_{(j+1)2^i} - a_{j 2^i}|^2)^{1/2}
inline InequalityCheck dyadic_square_check(const SeqSample& a, double r) {
  require(r >= 2.0, "dyadic_square_check: r must be >= 2");
  const std::size_t n = a.size();
  require(n >= 2 && is_power_of_two(static_cast<long>(n - 1)), "dyadic_square_check: length must be 2^s + 1");
  int s = 0;
  while ((std::size_t{1} << s) < n - 1) ++s;
  double rhs = 0.0;
  for (int i = 0; i <= s; ++i) {
    const std::size_t step = std::size_t{1} << i;
    double q = 0.0;
    for (std::size_t j = 0; (j + 1) * step <= n - 1; ++j) q += std::norm(a[(j + 1) * step] - a[j * step]);
    rhs += std::sqrt(q);
  }
  return make_check(vr(a, r), std::sqrt(2.0) * rhs);
}

// ---------------------------------------------------------------------------
// partition into h nearly equal steps
// ---------------------------------------------------------------------------

/// t_j = u + round(j (v - u) / h), rounding halves up.
inline std::vector<long> even_partition(long u, long v, long h) {
  require(v > u, "even_partition: need u < v");
  require(h >= 1 && h <= v - u, "even_partition: h must lie in [1, v - u]");
  std::vector<long> t(static_cast<std::size_t>(h) + 1);
  for (long j = 0; j <= h; ++j) t[static_cast<std::size_t>(j)] = u + (2 * j * (v - u) + h) / (2 * h);
  return t;
}

struct PartitionBounds {
  std::vector<long> partition;
  double variation = 0.0;  // V_r(a_j : u <= j <= v)
  double rhs_sampled = 0.0;  // first display: sampled values + summed increments
  double rhs_holder = 0.0;  // second display with exponent p >= r
  double ratio() const { return rhs_sampled > 0 ? variation / rhs_sampled : 0.0; }
};

/// Evaluates both right-hand sides for a sequence indexed by the integer labels u..v.
inline PartitionBounds partition_bounds(const SeqSample& a, long u, long v, long h, double r, double p) {
  require(p >= r && r >= 1, "partition_bounds: need 1 <= r <= p");
  require(a.has_integer_labels(), "partition_bounds: integer labels required");
  const auto& lab = a.labels();
  auto value_at = [&](long label) {
    auto it = std::lower_bound(lab.begin(), lab.end(), static_cast<double>(label));
    require(it != lab.end() && *it == static_cast<double>(label), "partition_bounds: labels u..v must be present");
    return a[static_cast<std::size_t>(it - lab.begin())];
  };
  PartitionBounds out;
  out.partition = even_partition(u, v, h);
  std::vector<cplx> window;
  for (long j = u; j <= v; ++j) window.push_back(value_at(j));
  out.variation = vr(SeqSample(window), r);
  double s_r = 0, s_p = 0, inc_r = 0, diff_p = 0;
  for (long t : out.partition) {
    s_r += std::pow(std::abs(value_at(t)), r);
    s_p += std::pow(std::abs(value_at(t)), p);
  }
  for (std::size_t j = 0; j + 1 < out.partition.size(); ++j) {
    double inc = 0;
    for (long k = out.partition[j]; k < out.partition[j + 1]; ++k) inc += std::abs(value_at(k + 1) - value_at(k));
    inc_r += std::pow(inc, r);
  }
  for (long j = u; j < v; ++j) diff_p += std::pow(std::abs(value_at(j + 1) - value_at(j)), p);
  out.rhs_sampled = std::pow(s_r, 1.0 / r) + std::pow(inc_r, 1.0 / r);
  double hh = static_cast<double>(h);
  out.rhs_holder = std::pow(hh, 1.0 / r - 1.0 / p) * std::pow(s_p, 1.0 / p) +
                   std::pow(hh, 1.0 / r - 1.0) * std::pow(static_cast<double>(v - u), 1.0 - 1.0 / p) * std::pow(diff_p, 1.0 / p);
  return out;
}

// ---------------------------------------------------------------------------
// variation of a family of functions
// ---------------------------------------------------------------------------

inline double lp_norm(std::span<const cplx> f, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
  }
  CompensatedSum s;
  for (const auto& v : f) s.add(std::pow(std::abs(v), p));
  return std::pow(s.value(), 1.0 / p);
}

struct FamilyBound {
  double lhs_norm = 0.0;  // || V_r(f_j : u <= j <= v) ||_p
  double U = 0.0;  // max_j ||f_j||_p
  double V = 0.0;  // max_j ||f_{j+1} - f_j||_p
  double bound = 0.0;  // max{U, (v-u)^{1/r} U^{1-1/r} V^{1/r}}
  double ratio() const { return bound > 0 ? lhs_norm / bound : 0.0; }
};

/// family[j - u] holds f_j on a common finite grid.
inline FamilyBound family_variation_bound(const std::vector<std::vector<cplx>>& family, double p, double r) {
  require(r >= 1 && r <= p, "family_variation_bound: need 1 <= r <= p");
  require(family.size() >= 3, "family_variation_bound: need v - u >= 2");
  const std::size_t m = family.front().size();
  for (const auto& f : family) require(f.size() == m, "family_variation_bound: functions must share a grid");
  FamilyBound out;
  std::vector<cplx> vfield(m);
  for (std::size_t x = 0; x < m; ++x) {
    std::vector<cplx> seq;
    for (const auto& f : family) seq.push_back(f[x]);
    vfield[x] = vr(SeqSample(seq), r);
  }
  out.lhs_norm = lp_norm(vfield, p);
  for (std::size_t j = 0; j < family.size(); ++j) {
    out.U = std::max(out.U, lp_norm(family[j], p));
    if (j + 1 < family.size()) {
      std::vector<cplx> d(m);
      for (std::size_t x = 0; x < m; ++x) d[x] = family[j + 1][x] - family[j][x];
      out.V = std::max(out.V, lp_norm(d, p));
    }
  }
  double len = static_cast<double>(family.size() - 1);
  out.bound = std::max(out.U, std::pow(len, 1.0 / r) * std::pow(out.U, 1.0 - 1.0 / r) * std::pow(out.V, 1.0 / r));
  return out;
}

// ---------------------------------------------------------------------------
// variation over real labels split at breakpoints
// ---------------------------------------------------------------------------

struct MixedVariation {
  double lhs = 0.0;  // V_r over all labels
  double along_breakpoints = 0.0;  // V_r(a_{w_k})
  double block_square_sum = 0.0;  // (sum_k V_r(block [w_k, w_{k+1}))^2)^{1/2}
  double rhs() const { return along_breakpoints + block_square_sum; }
  double ratio() const { return rhs() > 0 ? lhs / rhs() : 0.0; }
};

/// Breakpoints inside the label range must themselves be labels; the last
/// block is [w_K, infinity).
inline MixedVariation mixed_variation_bound(const SeqSample& a, const std::vector<double>& w, double r) {
  require(!w.empty(), "mixed_variation_bound: no breakpoints");
  for (std::size_t i = 1; i < w.size(); ++i) require(w[i] > w[i - 1], "mixed_variation_bound: breakpoints must be increasing");
  const auto& lab = a.labels();
  require(w.front() <= lab.front() && w.back() >= lab.back(), "mixed_variation_bound: breakpoints must cover the label range");
  MixedVariation out;
  out.lhs = vr(a, r);
  std::vector<std::size_t> at_w;
  for (double wk : w) {
    if (wk < lab.front() || wk > lab.back()) continue;
    auto it = std::lower_bound(lab.begin(), lab.end(), wk);
    require(it != lab.end() && *it == wk, "mixed_variation_bound: breakpoint inside the range is not a label");
    at_w.push_back(static_cast<std::size_t>(it - lab.begin()));
  }
  if (!at_w.empty()) out.along_breakpoints = vr(a.select(at_w), r);
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    double lo = w[k];
    double hi = k + 1 < w.size() ? w[k + 1] : std::numeric_limits<double>::infinity();
    std::vector<std::size_t> block;
    for (std::size_t i = 0; i < lab.size(); ++i)
      if (lab[i] >= lo && lab[i] < hi) block.push_back(i);
    if (!block.empty()) {
      double v = vr(a.select(block), r);
      s += v * v;
    }
  }
  out.block_square_sum = std::sqrt(s);
  return out;
}

}  // namespace radonlab
