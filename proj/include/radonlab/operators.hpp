#pragma once

// Discrete Radon averages M_N f(x) = |G_N|^{-1} sum_{y in G_N} f(x - P(y)) and
// truncated singular transforms T_N f(x) = sum_{y in G_N \ 0} f(x - P(y)) K(y)
// on finitely supported functions over Z^{d0}, with a direct and an FFT
// backend, the same operators realized on the shift system of Z^{d0},
// pointwise variation curves in N and empirical operator norms.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "radonlab/common.hpp"
#include "radonlab/expsum.hpp"
#include "radonlab/fft.hpp"
#include "radonlab/poly.hpp"
#include "radonlab/variation.hpp"

namespace radonlab {

// ---------------------------------------------------------------------------
// grid functions
// ---------------------------------------------------------------------------

/// Dense complex values on the integer box [lo, hi] (inclusive), zero outside.
/// Storage is row-major with the last coordinate fastest.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(IVec lo, IVec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    require(!lo_.empty() && lo_.size() == hi_.size(), "GridFunction: bad box");
    std::size_t n = 1;
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      require(hi_[j] >= lo_[j], "GridFunction: empty box");
      n *= static_cast<std::size_t>(hi_[j] - lo_[j] + 1);
    }
    values_.assign(n, cplx(0.0));
  }
  static GridFunction delta(int m) {
    GridFunction g(IVec(static_cast<std::size_t>(m), 0), IVec(static_cast<std::size_t>(m), 0));
    g.values_[0] = 1.0;
    return g;
  }

  int dim() const { return static_cast<int>(lo_.size()); }
  const IVec& lo() const { return lo_; }
  const IVec& hi() const { return hi_; }
  long extent(int j) const { return hi_[static_cast<std::size_t>(j)] - lo_[static_cast<std::size_t>(j)] + 1; }
  std::vector<int> shape() const {
    std::vector<int> s;
    for (int j = 0; j < dim(); ++j) s.push_back(static_cast<int>(extent(j)));
    return s;
  }
  std::size_t size() const { return values_.size(); }
  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }

  bool inside(std::span<const long> x) const {
    for (std::size_t j = 0; j < lo_.size(); ++j)
      if (x[j] < lo_[j] || x[j] > hi_[j]) return false;
    return true;
  }
  std::size_t index(std::span<const long> x) const {
    std::size_t i = 0;
    for (std::size_t j = 0; j < lo_.size(); ++j) i = i * static_cast<std::size_t>(hi_[j] - lo_[j] + 1) + static_cast<std::size_t>(x[j] - lo_[j]);
    return i;
  }
  IVec point(std::size_t i) const {
    IVec x(lo_.size());
    for (std::size_t j = lo_.size(); j-- > 0;) {
      auto e = static_cast<std::size_t>(hi_[j] - lo_[j] + 1);
      x[j] = lo_[j] + static_cast<long>(i % e);
      i /= e;
    }
    return x;
  }
  cplx value_at(std::span<const long> x) const { return inside(x) ? values_[index(x)] : cplx(0.0); }
  cplx& operator[](std::span<const long> x) {
    require(inside(x), "GridFunction: point outside the stored box");
    return values_[index(x)];
  }
  cplx& operator[](std::initializer_list<long> x) { return (*this)[std::span<const long>(x.begin(), x.size())]; }
  cplx value_at(std::initializer_list<long> x) const { return value_at(std::span<const long>(x.begin(), x.size())); }

  /// f(. - z)
  GridFunction translated(std::span<const long> z) const {
    GridFunction g = *this;
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      g.lo_[j] += z[j];
      g.hi_[j] += z[j];
    }
    return g;
  }
  /// Same function stored on a larger box.
  GridFunction embedded(const IVec& lo, const IVec& hi) const {
    GridFunction g(lo, hi);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      auto x = point(i);
      require(g.inside(x), "GridFunction::embedded: target box does not cover the support");
      g.values_[g.index(x)] = values_[i];
    }
    return g;
  }

  cplx sum() const { return pairwise_sum(std::span<const cplx>(values_)); }
  /// l^p norm over the stored box; p = infinity gives the sup norm.
  double norm(double p) const { return lp_norm(values_, p); }

 private:
  IVec lo_, hi_;
  std::vector<cplx> values_;
};

inline GridFunction operator*(cplx a, const GridFunction& f) {
  GridFunction g = f;
  for (auto& v : g.values()) v *= a;
  return g;
}

/// Pointwise alpha f + beta g on the union box.
inline GridFunction combine(cplx alpha, const GridFunction& f, cplx beta, const GridFunction& g) {
  require(f.dim() == g.dim(), "combine: dimension mismatch");
  IVec lo(f.lo()), hi(f.hi());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] = std::min(lo[j], g.lo()[j]);
    hi[j] = std::max(hi[j], g.hi()[j]);
  }
  GridFunction out(lo, hi);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto x = out.point(i);
    out.values()[i] = alpha * f.value_at(x) + beta * g.value_at(x);
  }
  return out;
}

/// max |f - g| / max(|f|, |g|) over the union of supports.
inline double relative_difference(const GridFunction& f, const GridFunction& g) {
  auto d = combine(1.0, f, -1.0, g);
  double scale = std::max(f.norm(INFINITY), g.norm(INFINITY));
  return scale > 0 ? d.norm(INFINITY) / scale : d.norm(INFINITY);
}

/// sum_z g(z) e(<xi, z>)
inline cplx fourier_coefficient(const GridFunction& g, std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == g.dim(), "fourier_coefficient: dimension mismatch");
  std::vector<cplx> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto z = g.point(i);
    double ph = 0;
    for (std::size_t j = 0; j < z.size(); ++j) ph += frac_product(xi[j], z[j]);
    t[i] = g.values()[i] * expi2pi(ph);
  }
  return pairwise_sum(std::span<const cplx>(t));
}

// ---------------------------------------------------------------------------
// operator plumbing
// ---------------------------------------------------------------------------

enum class Backend { direct, fft };
enum class OperatorKind { average, singular };

inline std::string to_string(Backend b) { return b == Backend::direct ? "direct" : "fft"; }
inline std::string to_string(OperatorKind k) { return k == OperatorKind::average ? "avg" : "sing"; }

struct OperatorOptions {
  Backend backend = Backend::direct;
  double max_cells = 1 << 26;  // output box and FFT buffers
  unsigned threads = 0;  // 0: default_threads()
};

struct OperatorResult {
  GridFunction output;
  Backend backend = Backend::direct;
  long N = 0;
};

/// Images P(y) and weights of the defining sum, in lattice order.
struct LatticeTerms {
  std::vector<IVec> images;
  std::vector<double> weights;
  IVec lo, hi;  // coordinatewise extent of the images
};

template <class Mapping>
LatticeTerms lattice_terms(const Mapping& P, long N, const ConvexBody& G, OperatorKind kind, const CZKernel* K) {
  require(N >= 1, "operator: N must be >= 1");
  require(G.dim() == P.k(), "operator: body dimension must equal k");
  if (kind == OperatorKind::singular) {
    require(K != nullptr, "operator: singular transform needs a kernel");
    require(K->k == P.k(), "operator: kernel dimension must equal k");
  }
  check_lattice_budget(G, static_cast<double>(N));
  auto pts = lattice_points(G, static_cast<double>(N));
  LatticeTerms t;
  const auto m = static_cast<std::size_t>(P.target_dim());
  t.lo.assign(m, std::numeric_limits<long>::max());
  t.hi.assign(m, std::numeric_limits<long>::min());
  const double inv = 1.0 / static_cast<double>(pts.size());
  for (const auto& y : pts) {
    bool origin = std::all_of(y.begin(), y.end(), [](long v) { return v == 0; });
    if (kind == OperatorKind::singular && origin) continue;
    auto z = P.eval(y);
    IVec img(m);
    for (std::size_t j = 0; j < m; ++j) {
      img[j] = narrow_to_long(z[j]);
      t.lo[j] = std::min(t.lo[j], img[j]);
      t.hi[j] = std::max(t.hi[j], img[j]);
    }
    t.images.push_back(std::move(img));
    t.weights.push_back(kind == OperatorKind::average ? inv : K->at_lattice(y));
  }
  require(!t.images.empty(), "operator: no lattice terms");
  return t;
}

inline void check_cells(const IVec& lo, const IVec& hi, double budget, const char* what) {
  double cells = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) cells *= static_cast<double>(hi[j] - lo[j] + 1);
  if (cells > budget) throw budget_exceeded(std::string(what) + ": memory budget exceeded", cells);
}

/// Scatter over y in lattice order, parallel over slabs of the first output
/// coordinate; each output point receives its terms in lattice order.
inline GridFunction apply_direct(const GridFunction& f, const LatticeTerms& t, unsigned threads) {
  const std::size_t m = static_cast<std::size_t>(f.dim());
  IVec lo(m), hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    lo[j] = f.lo()[j] + t.lo[j];
    hi[j] = f.hi()[j] + t.hi[j];
  }
  GridFunction out(lo, hi);
  // flat output index is affine in the point, so each image is a fixed offset
  std::vector<long> stride(m);
  long s = 1;
  for (std::size_t j = m; j-- > 0;) {
    stride[j] = s;
    s *= hi[j] - lo[j] + 1;
  }
  std::vector<long> base(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = f.point(i);
    long o = 0;
    for (std::size_t j = 0; j < m; ++j) o += (x[j] - f.lo()[j]) * stride[j];
    base[i] = o;
  }
  std::vector<long> shift(t.images.size());
  for (std::size_t y = 0; y < t.images.size(); ++y) {
    long o = 0;
    for (std::size_t j = 0; j < m; ++j) o += (t.images[y][j] - t.lo[j]) * stride[j];
    shift[y] = o;
  }
  const long inner = static_cast<long>(f.size()) / f.extent(0);
  const long out0 = out.extent(0);
  const long slabs = std::min<long>(out0, 4L * std::max<unsigned>(1, threads == 0 ? default_threads() : threads));
  auto& vals = out.values();
  const auto& fv = f.values();
  parallel_for(static_cast<std::size_t>(slabs), [&](std::size_t c) {
    long c0 = lo[0] + out0 * static_cast<long>(c) / slabs;
    long c1 = lo[0] + out0 * (static_cast<long>(c) + 1) / slabs;  // exclusive
    for (std::size_t y = 0; y < t.images.size(); ++y) {
      long a = std::max(f.lo()[0], c0 - t.images[y][0]);
      long b = std::min(f.hi()[0], c1 - 1 - t.images[y][0]);
      if (a > b) continue;
      const double w = t.weights[y];
      auto i0 = static_cast<std::size_t>((a - f.lo()[0]) * inner);
      auto i1 = static_cast<std::size_t>((b - f.lo()[0] + 1) * inner);
      for (std::size_t i = i0; i < i1; ++i) vals[static_cast<std::size_t>(base[i] + shift[y])] += w * fv[i];
    }
  }, threads);
  return out;
}

/// Dense pushforward kernel on the image box, accumulated in lattice order.
inline GridFunction pushforward_kernel(const LatticeTerms& t) {
  GridFunction k(t.lo, t.hi);
  for (std::size_t y = 0; y < t.images.size(); ++y) k[t.images[y]] += t.weights[y];
  return k;
}

/// Zero-padded cyclic convolution of size len_f + len_kernel - 1 per
/// coordinate, which equals the linear convolution.
inline GridFunction apply_fft(const GridFunction& f, const GridFunction& kernel, double max_cells) {
  const std::size_t m = static_cast<std::size_t>(f.dim());
  IVec lo(m), hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    lo[j] = f.lo()[j] + kernel.lo()[j];
    hi[j] = f.hi()[j] + kernel.hi()[j];
  }
  check_cells(lo, hi, max_cells / 2, "fft backend");
  GridFunction out(lo, hi);
  auto dims = out.shape();
  std::vector<cplx> a(out.size()), b(out.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = f.point(i);
    for (std::size_t j = 0; j < m; ++j) x[j] += lo[j] - f.lo()[j];
    a[out.index(x)] = f.values()[i];
  }
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    auto x = kernel.point(i);
    for (std::size_t j = 0; j < m; ++j) x[j] += lo[j] - kernel.lo()[j];
    b[out.index(x)] = kernel.values()[i];
  }
  out.values() = cyclic_convolve(std::move(a), std::move(b), dims);
  return out;
}

template <class Mapping>
OperatorResult apply_operator(const GridFunction& f, const Mapping& P, long N, const ConvexBody& G, OperatorKind kind,
                              const CZKernel* K, const OperatorOptions& opt) {
  require(f.dim() == P.target_dim(), "operator: function dimension must equal the mapping's target dimension");
  auto t = lattice_terms(P, N, G, kind, K);
  IVec lo(f.lo()), hi(f.hi());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] += t.lo[j];
    hi[j] += t.hi[j];
  }
  check_cells(lo, hi, opt.max_cells, "operator output");
  if (opt.backend == Backend::direct) return {apply_direct(f, t, opt.threads), Backend::direct, N};
  check_cells(t.lo, t.hi, opt.max_cells, "pushforward kernel");
  return {apply_fft(f, pushforward_kernel(t), opt.max_cells), Backend::fft, N};
}

template <class Mapping>
OperatorResult radon_average(const GridFunction& f, const Mapping& P, long N, const ConvexBody& G, const OperatorOptions& opt = {}) {
  return apply_operator(f, P, N, G, OperatorKind::average, nullptr, opt);
}

template <class Mapping>
OperatorResult truncated_singular(const GridFunction& f, const Mapping& P, long N, const CZKernel& K, const ConvexBody& G,
                                  const OperatorOptions& opt = {}) {
  return apply_operator(f, P, N, G, OperatorKind::singular, &K, opt);
}

/// Pushforward kernel of the averaging operator: |G_N|^{-1} #{y : P(y) = z}.
template <class Mapping>
GridFunction averaging_kernel(const Mapping& P, long N, const ConvexBody& G) {
  return pushforward_kernel(lattice_terms(P, N, G, OperatorKind::average, nullptr));
}

template <class Mapping>
GridFunction singular_kernel(const Mapping& P, long N, const CZKernel& K, const ConvexBody& G) {
  return pushforward_kernel(lattice_terms(P, N, G, OperatorKind::singular, &K));
}

// ---------------------------------------------------------------------------
// shift-system realization
// ---------------------------------------------------------------------------

/// X = Z^{d0} with the commuting invertible shifts S_j x = x - e_j; the
/// counting measure is preserved by each S_j.
struct ShiftSystem {
  int dim;
  /// S_j^n x
  void power(int j, long n, IVec& x) const { x[static_cast<std::size_t>(j)] -= n; }
  /// S_1^{z_1} ... S_{d0}^{z_{d0}} x
  IVec compose(std::span<const long> z, IVec x) const {
    for (int j = dim - 1; j >= 0; --j) power(j, z[static_cast<std::size_t>(j)], x);
    return x;
  }
};

/// A f(x) = sum_y w_y f(S^{P(y)} x) evaluated pointwise on the output box.
inline GridFunction ergodic_apply(const GridFunction& f, const LatticeTerms& t, unsigned threads) {
  const std::size_t m = static_cast<std::size_t>(f.dim());
  IVec lo(m), hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    lo[j] = f.lo()[j] + t.lo[j];
    hi[j] = f.hi()[j] + t.hi[j];
  }
  GridFunction out(lo, hi);
  ShiftSystem S{static_cast<int>(m)};
  parallel_for(out.size(), [&](std::size_t i) {
    const IVec x = out.point(i);
    cplx acc = 0.0;
    for (std::size_t y = 0; y < t.images.size(); ++y) {
      IVec z = S.compose(t.images[y], x);
      if (f.inside(z)) acc += t.weights[y] * f.values()[f.index(z)];
    }
    out.values()[i] = acc;
  }, threads);
  return out;
}

template <class Mapping>
GridFunction ergodic_average(const GridFunction& f, const Mapping& P, long N, const ConvexBody& G, const OperatorOptions& opt = {}) {
  require(f.dim() == P.target_dim(), "ergodic_average: dimension mismatch");
  auto t = lattice_terms(P, N, G, OperatorKind::average, nullptr);
  IVec lo(f.lo()), hi(f.hi());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] += t.lo[j];
    hi[j] += t.hi[j];
  }
  check_cells(lo, hi, opt.max_cells, "ergodic_average output");
  return ergodic_apply(f, t, opt.threads);
}

template <class Mapping>
GridFunction ergodic_singular(const GridFunction& f, const Mapping& P, long N, const CZKernel& K, const ConvexBody& G,
                              const OperatorOptions& opt = {}) {
  require(f.dim() == P.target_dim(), "ergodic_singular: dimension mismatch");
  auto t = lattice_terms(P, N, G, OperatorKind::singular, &K);
  IVec lo(f.lo()), hi(f.hi());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] += t.lo[j];
    hi[j] += t.hi[j];
  }
  check_cells(lo, hi, opt.max_cells, "ergodic_singular output");
  return ergodic_apply(f, t, opt.threads);
}

// ---------------------------------------------------------------------------
// variation in N
// ---------------------------------------------------------------------------

struct OperatorSpec {
  PolynomialMapping P;
  ConvexBody G;
  std::vector<long> N_set;
  OperatorKind kind = OperatorKind::average;
  std::optional<CZKernel> K;
  Backend backend = Backend::direct;
};

/// Outputs for every N in N_set, all stored on the box of the largest N.
inline std::vector<GridFunction> operator_family(const GridFunction& f, const OperatorSpec& op, unsigned threads = 0) {
  require(!op.N_set.empty(), "variation_curve: empty N set");
  require(std::is_sorted(op.N_set.begin(), op.N_set.end()) &&
              std::adjacent_find(op.N_set.begin(), op.N_set.end()) == op.N_set.end(),
          "variation_curve: N set must be strictly increasing");
  std::vector<GridFunction> outs(op.N_set.size());
  OperatorOptions o;
  o.backend = op.backend;
  o.threads = 1;
  parallel_for(op.N_set.size(), [&](std::size_t i) {
    const CZKernel* K = op.K ? &*op.K : nullptr;
    outs[i] = apply_operator(f, op.P, op.N_set[i], op.G, op.kind, K, o).output;
  }, threads);
  IVec lo = outs.front().lo(), hi = outs.front().hi();
  for (const auto& g : outs)
    for (std::size_t j = 0; j < lo.size(); ++j) {
      lo[j] = std::min(lo[j], g.lo()[j]);
      hi[j] = std::max(hi[j], g.hi()[j]);
    }
  for (auto& g : outs)
    if (g.lo() != lo || g.hi() != hi) g = g.embedded(lo, hi);
  return outs;
}

/// Pointwise V_r across a family sharing one box.
inline GridFunction variation_field(const std::vector<GridFunction>& family, double r, unsigned threads = 0) {
  require(!family.empty(), "variation_field: empty family");
  GridFunction v(family.front().lo(), family.front().hi());
  parallel_for(v.size(), [&](std::size_t i) {
    std::vector<cplx> seq(family.size());
    for (std::size_t n = 0; n < family.size(); ++n) seq[n] = family[n].values()[i];
    v.values()[i] = vr(SeqSample(seq), r);
  }, threads);
  return v;
}

struct VariationCurve {
  GridFunction pointwise;
  double variation_norm = 0.0;  // ||V_r||_p
  double input_norm = 0.0;  // ||f||_p
  double ratio() const { return input_norm > 0 ? variation_norm / input_norm : 0.0; }
};

inline VariationCurve variation_curve(const GridFunction& f, const OperatorSpec& op, double r, double p, unsigned threads = 0) {
  require(r >= 1, "variation_curve: r must be >= 1");
  VariationCurve c;
  c.pointwise = variation_field(operator_family(f, op, threads), r, threads);
  c.variation_norm = c.pointwise.norm(p);
  c.input_norm = f.norm(p);
  return c;
}

// ---------------------------------------------------------------------------
// empirical norms
// ---------------------------------------------------------------------------

struct EnsembleSpec {
  std::size_t count = 50;
  long half_width = 64;  // functions live on [-half_width, half_width]^{d0}
  std::uint64_t seed = 0;
};

/// Member i: i % 3 == 0 sparse spikes, 1 Gaussian bump, 2 Rademacher field.
inline GridFunction ensemble_member(const EnsembleSpec& e, int dim, std::size_t i) {
  Rng rng = Rng::for_trial(e.seed, i);
  const long R = e.half_width;
  GridFunction f(IVec(static_cast<std::size_t>(dim), -R), IVec(static_cast<std::size_t>(dim), R));
  switch (i % 3) {
    case 0: {
      long spikes = rng.integer(1, 3);
      for (long s = 0; s < spikes; ++s) {
        IVec x(static_cast<std::size_t>(dim));
        for (auto& v : x) v = rng.integer(-R, R);
        f[x] += rng.sign() * rng.uniform(0.5, 1.5);
      }
      break;
    }
    case 1: {
      std::vector<double> c(static_cast<std::size_t>(dim));
      for (auto& v : c) v = rng.uniform(-R / 2.0, R / 2.0);
      double sigma = rng.uniform(std::max(1.0, R / 8.0), std::max(1.5, R / 3.0));
      for (std::size_t k = 0; k < f.size(); ++k) {
        auto x = f.point(k);
        double d2 = 0;
        for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - c[j]) * (x[j] - c[j]);
        f.values()[k] = std::exp(-d2 / (2 * sigma * sigma));
      }
      break;
    }
    default:
      for (auto& v : f.values()) v = rng.sign();
  }
  return f;
}

struct NormStats {
  double r = 0.0;
  std::vector<double> ratios;  // ||V_r||_p / ||f||_p per member
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double scaled() const { return max_ratio * (r - 2.0) / r; }  // max ratio * (r-2)/r
};

struct NormSweep {
  double p = 2.0;
  std::vector<NormStats> per_r;
  double fitted_constant = 0.0;  // max_r max ratio * (r-2)/r over r > 2
};

/// Operator outputs are computed once per member and reused for every r.
inline NormSweep norm_sweep(double p, const std::vector<double>& rs, const EnsembleSpec& e, const OperatorSpec& op, unsigned threads = 0) {
  require(!rs.empty(), "norm_sweep: no r values");
  const int dim = op.P.target_dim();
  std::vector<std::vector<double>> ratio(e.count, std::vector<double>(rs.size()));
  parallel_for(e.count, [&](std::size_t i) {
    auto f = ensemble_member(e, dim, i);
    auto fam = operator_family(f, op, 1);
    double fn = f.norm(p);
    for (std::size_t a = 0; a < rs.size(); ++a) {
      double vn = variation_field(fam, rs[a], 1).norm(p);
      ratio[i][a] = fn > 0 ? vn / fn : 0.0;
    }
  }, threads);
  NormSweep s;
  s.p = p;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    NormStats st;
    st.r = rs[a];
    CompensatedSum acc;
    for (std::size_t i = 0; i < e.count; ++i) {
      st.ratios.push_back(ratio[i][a]);
      st.max_ratio = std::max(st.max_ratio, ratio[i][a]);
      acc.add(ratio[i][a]);
    }
    st.mean_ratio = e.count ? acc.value() / static_cast<double>(e.count) : 0.0;
    if (st.r > 2.0) s.fitted_constant = std::max(s.fitted_constant, st.scaled());
    s.per_r.push_back(std::move(st));
  }
  return s;
}

inline NormStats empirical_norm(double p, double r, const EnsembleSpec& e, const OperatorSpec& op, unsigned threads = 0) {
  return norm_sweep(p, {r}, e, op, threads).per_r.front();
}

}  // namespace radonlab
