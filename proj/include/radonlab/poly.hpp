#pragma once

// Polynomial mappings Z^k -> Z^d0, the canonical mapping x -> (x^gamma) and
// its lifting matrix, anisotropic dilations, and convex bodies with exact
// lattice enumeration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radonlab/common.hpp"

namespace radonlab {

// ---------------------------------------------------------------------------
// multi-indices
// ---------------------------------------------------------------------------

struct MultiIndex {
  std::vector<int> exps;

  int size() const { return static_cast<int>(exps.size()); }
  int degree() const {
    int s = 0;
    for (int e : exps) s += e;
    return s;
  }
  bool is_zero() const { return degree() == 0; }
  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < exps.size(); ++i) os << (i ? "," : "") << exps[i];
    os << ')';
    return os.str();
  }
};

/// Nonzero multi-indices with every exponent in [0, N0], lexicographic order.
inline std::vector<MultiIndex> build_gamma(int k, int N0) {
  require(k >= 1, "build_gamma: k must be positive");
  require(N0 >= 1, "build_gamma: N0 must be positive");
  std::vector<MultiIndex> out;
  std::vector<int> e(static_cast<std::size_t>(k), 0);
  // odometer over [0, N0]^k, last coordinate fastest == lexicographic order
  for (;;) {
    MultiIndex m{e};
    if (!m.is_zero()) out.push_back(m);
    int i = k - 1;
    while (i >= 0 && e[static_cast<std::size_t>(i)] == N0) {
      e[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++e[static_cast<std::size_t>(i)];
  }
  return out;
}

/// x^gamma with overflow detection.
inline i128 monomial(std::span<const long> y, const MultiIndex& g) {
  i128 v = 1;
  for (std::size_t i = 0; i < g.exps.size(); ++i)
    for (int e = 0; e < g.exps[i]; ++e) v = checked_mul(v, static_cast<i128>(y[i]));
  return v;
}

// ---------------------------------------------------------------------------
// mappings
// ---------------------------------------------------------------------------

struct Term {
  MultiIndex gamma;
  long coeff = 0;
};

/// Integer-coefficient polynomial mapping with no constant terms.
class PolynomialMapping {
 public:
  PolynomialMapping(int k, std::vector<std::vector<Term>> components)
      : k_(k), components_(std::move(components)) {
    require(k_ >= 1, "PolynomialMapping: k must be positive");
    require(!components_.empty(), "PolynomialMapping: need at least one component");
    for (auto& comp : components_) {
      std::map<MultiIndex, long> merged;
      for (const auto& t : comp) {
        require(t.gamma.size() == k_, "PolynomialMapping: multi-index has wrong length");
        require(std::all_of(t.gamma.exps.begin(), t.gamma.exps.end(), [](int e) { return e >= 0; }),
                "PolynomialMapping: negative exponent");
        require(!t.gamma.is_zero(), "PolynomialMapping: constant term not allowed (P(0) must be 0)");
        merged[t.gamma] += t.coeff;
      }
      comp.clear();
      for (auto& [g, c] : merged)
        if (c != 0) comp.push_back({g, c});
    }
  }

  /// Single-variable polynomial from coefficients c_1 x + c_2 x^2 + ...
  static PolynomialMapping univariate(std::vector<long> coeffs_from_degree_one) {
    std::vector<Term> t;
    for (std::size_t i = 0; i < coeffs_from_degree_one.size(); ++i)
      if (coeffs_from_degree_one[i] != 0) t.push_back({MultiIndex{{static_cast<int>(i + 1)}}, coeffs_from_degree_one[i]});
    return PolynomialMapping(1, {t});
  }

  /// x -> (x^{deg_1}, ..., x^{deg_d0}) for k = 1.
  static PolynomialMapping moment_curve(std::vector<int> degrees) {
    std::vector<std::vector<Term>> comps;
    for (int d : degrees) comps.push_back({Term{MultiIndex{{d}}, 1}});
    return PolynomialMapping(1, comps);
  }

  int k() const { return k_; }
  int d0() const { return static_cast<int>(components_.size()); }
  const std::vector<std::vector<Term>>& components() const { return components_; }

  int degree() const {
    int d = 0;
    for (const auto& c : components_)
      for (const auto& t : c) d = std::max(d, t.gamma.degree());
    return d;
  }

  std::vector<i128> eval(std::span<const long> y) const {
    require(static_cast<int>(y.size()) == k_, "PolynomialMapping::eval: wrong input dimension");
    std::vector<i128> out;
    out.reserve(components_.size());
    for (const auto& comp : components_) {
      i128 s = 0;
      for (const auto& t : comp) s = checked_add(s, checked_mul(t.coeff, monomial(y, t.gamma)));
      out.push_back(s);
    }
    return out;
  }

  int target_dim() const { return d0(); }

 private:
  int k_;
  std::vector<std::vector<Term>> components_;
};

/// x -> (x^gamma : gamma in Gamma).
class CanonicalMapping {
 public:
  CanonicalMapping(int k, std::vector<MultiIndex> gamma) : k_(k), gamma_(std::move(gamma)) {
    require(k_ >= 1, "CanonicalMapping: k must be positive");
    require(!gamma_.empty(), "CanonicalMapping: empty Gamma");
    for (const auto& g : gamma_) {
      require(g.size() == k_, "CanonicalMapping: multi-index has wrong length");
      require(!g.is_zero(), "CanonicalMapping: zero multi-index");
    }
  }
  static CanonicalMapping full(int k, int N0) { return CanonicalMapping(k, build_gamma(k, N0)); }

  int k() const { return k_; }
  int d() const { return static_cast<int>(gamma_.size()); }
  int target_dim() const { return d(); }
  const std::vector<MultiIndex>& gamma() const { return gamma_; }

  std::vector<i128> eval(std::span<const long> y) const {
    require(static_cast<int>(y.size()) == k_, "CanonicalMapping::eval: wrong input dimension");
    std::vector<i128> out;
    out.reserve(gamma_.size());
    for (const auto& g : gamma_) out.push_back(monomial(y, g));
    return out;
  }

  /// The mapping viewed as a PolynomialMapping with unit coefficients.
  PolynomialMapping as_polynomial() const {
    std::vector<std::vector<Term>> comps;
    for (const auto& g : gamma_) comps.push_back({Term{g, 1}});
    return PolynomialMapping(k_, comps);
  }

 private:
  int k_;
  std::vector<MultiIndex> gamma_;
};

/// d0 x d integer matrix with L Q = P.
struct LinearMap {
  int rows = 0;
  int cols = 0;
  std::vector<long> entries;  // row-major

  long at(int r, int c) const { return entries[static_cast<std::size_t>(r * cols + c)]; }

  std::vector<i128> apply(std::span<const i128> v) const {
    require(static_cast<int>(v.size()) == cols, "LinearMap::apply: dimension mismatch");
    std::vector<i128> out(static_cast<std::size_t>(rows), 0);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        out[static_cast<std::size_t>(r)] =
            checked_add(out[static_cast<std::size_t>(r)], checked_mul(at(r, c), v[static_cast<std::size_t>(c)]));
    return out;
  }
};

struct Lifting {
  CanonicalMapping canonical;
  LinearMap L;
};

inline Lifting lift(const PolynomialMapping& P) {
  int N0 = std::max(1, P.degree());
  CanonicalMapping Q = CanonicalMapping::full(P.k(), N0);
  LinearMap L;
  L.rows = P.d0();
  L.cols = Q.d();
  L.entries.assign(static_cast<std::size_t>(L.rows * L.cols), 0);
  for (int j = 0; j < P.d0(); ++j) {
    for (const auto& t : P.components()[static_cast<std::size_t>(j)]) {
      auto it = std::find(Q.gamma().begin(), Q.gamma().end(), t.gamma);
      // every monomial of degree <= N0 has exponents <= N0, hence lies in Gamma
      auto col = static_cast<int>(it - Q.gamma().begin());
      L.entries[static_cast<std::size_t>(j * L.cols + col)] += t.coeff;
    }
  }
  return {Q, L};
}

// ---------------------------------------------------------------------------
// dilations
// ---------------------------------------------------------------------------

/// Diagonal matrix A with (A v)_gamma = |gamma| v_gamma; t^A scales coordinate
/// gamma by t^{|gamma|}.
class DilationMatrix {
 public:
  explicit DilationMatrix(const std::vector<MultiIndex>& gamma) {
    for (const auto& g : gamma) degrees_.push_back(g.degree());
  }
  explicit DilationMatrix(std::vector<int> degrees) : degrees_(std::move(degrees)) {}

  const std::vector<int>& degrees() const { return degrees_; }

  std::vector<double> apply(double t, std::span<const double> x) const {
    require(t > 0, "DilationMatrix::apply: t must be positive");
    require(x.size() == degrees_.size(), "DilationMatrix::apply: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::pow(t, degrees_[i]) * x[i];
    return out;
  }

  /// |t^A xi|_inf
  double sup_norm(double t, std::span<const double> xi) const {
    double m = 0.0;
    for (double v : apply(t, xi)) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::vector<int> degrees_;
};

// ---------------------------------------------------------------------------
// convex bodies
// ---------------------------------------------------------------------------

/// Bounded convex body containing the origin. Membership is closed
/// (boundary points belong to the body), matching B_t = {|x| <= t}.
class ConvexBody {
 public:
  enum class Kind { euclidean_ball, box, polytope };

  static ConvexBody ball(int k, double radius = 1.0) {
    require(k >= 1 && radius > 0, "ConvexBody::ball: need k >= 1 and radius > 0");
    ConvexBody b(Kind::euclidean_ball, k);
    b.radius_ = radius;
    return b;
  }

  static ConvexBody box(std::vector<double> half_widths) {
    require(!half_widths.empty(), "ConvexBody::box: empty");
    for (double h : half_widths) require(h > 0, "ConvexBody::box: half widths must be positive");
    ConvexBody b(Kind::box, static_cast<int>(half_widths.size()));
    b.half_widths_ = std::move(half_widths);
    return b;
  }

  /// {x : A x <= b} with b > 0 componentwise (so the origin is interior).
  static ConvexBody polytope(int k, std::vector<std::vector<double>> A, std::vector<double> b) {
    require(k >= 1, "ConvexBody::polytope: k must be positive");
    require(!A.empty() && A.size() == b.size(), "ConvexBody::polytope: A and b must match");
    for (std::size_t i = 0; i < A.size(); ++i) {
      require(static_cast<int>(A[i].size()) == k, "ConvexBody::polytope: row length");
      require(b[i] > 0, "ConvexBody::polytope: origin must be interior (b > 0)");
    }
    ConvexBody p(Kind::polytope, k);
    p.A_ = std::move(A);
    p.b_ = std::move(b);
    for (int i = 0; i < k; ++i)
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> e(static_cast<std::size_t>(k), 0.0);
        e[static_cast<std::size_t>(i)] = sgn;
        require(std::isfinite(p.radial(e)), "ConvexBody::polytope: body is unbounded");
      }
    p.sup_bound_ = p.vertex_sup_bound();
    return p;
  }

  Kind kind() const { return kind_; }
  int dim() const { return k_; }

  bool contains(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == k_, "ConvexBody::contains: dimension mismatch");
    switch (kind_) {
      case Kind::euclidean_ball: {
        double s = 0;
        for (double v : x) s += v * v;
        return s <= radius_ * radius_ * (1.0 + 1e-15);
      }
      case Kind::box:
        for (std::size_t i = 0; i < x.size(); ++i)
          if (std::abs(x[i]) > half_widths_[i]) return false;
        return true;
      case Kind::polytope:
        for (std::size_t i = 0; i < A_.size(); ++i) {
          double s = 0;
          for (std::size_t j = 0; j < x.size(); ++j) s += A_[i][j] * x[j];
          if (s > b_[i] * (1.0 + 1e-15)) return false;
        }
        return true;
    }
    return false;
  }

  /// Is the lattice point x in the dilate G_t?
  bool contains_scaled(std::span<const long> x, double t) const {
    if (kind_ == Kind::euclidean_ball) {
      double s = 0;
      for (long v : x) s += static_cast<double>(v) * static_cast<double>(v);
      double r = radius_ * t;
      return s <= r * r;
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<double>(x[i]) / t;
    return contains(y);
  }

  /// c with G inside [-c, c]^k.
  double sup_bound() const {
    switch (kind_) {
      case Kind::euclidean_ball: return radius_;
      case Kind::box: return *std::max_element(half_widths_.begin(), half_widths_.end());
      case Kind::polytope: return sup_bound_;
    }
    return 0.0;
  }

  /// Radial function r(omega) = sup{s : s omega in G} for a unit vector omega.
  double radial(std::span<const double> omega) const {
    switch (kind_) {
      case Kind::euclidean_ball: return radius_;
      case Kind::box: {
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < omega.size(); ++i)
          if (omega[i] != 0.0) r = std::min(r, half_widths_[i] / std::abs(omega[i]));
        return r;
      }
      case Kind::polytope: {
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < A_.size(); ++i) {
          double s = 0;
          for (std::size_t j = 0; j < omega.size(); ++j) s += A_[i][j] * omega[j];
          if (s > 0) r = std::min(r, b_[i] / s);
        }
        return r;
      }
    }
    return 0.0;
  }

  /// Lebesgue measure of G.
  double volume() const {
    switch (kind_) {
      case Kind::euclidean_ball:
        return std::pow(std::numbers::pi, k_ / 2.0) / std::tgamma(k_ / 2.0 + 1.0) * std::pow(radius_, k_);
      case Kind::box: {
        double v = 1;
        for (double h : half_widths_) v *= 2 * h;
        return v;
      }
      case Kind::polytope: {
        require(k_ <= 2, "ConvexBody::volume: polytope volume implemented for k <= 2");
        if (k_ == 1) return radial(std::vector<double>{1.0}) + radial(std::vector<double>{-1.0});
        // area = 1/2 \int r(theta)^2 dtheta, piecewise smooth; fine midpoint rule
        const int n = 1 << 16;
        CompensatedSum s;
        for (int i = 0; i < n; ++i) {
          double th = 2 * std::numbers::pi * (i + 0.5) / n;
          double r = radial(std::vector<double>{std::cos(th), std::sin(th)});
          s.add(0.5 * r * r);
        }
        return s.value() * 2 * std::numbers::pi / n;
      }
    }
    return 0.0;
  }

 private:
  ConvexBody(Kind kind, int k) : kind_(kind), k_(k) {}

  /// max |x_i| over vertices: every k-subset of active constraints is solved
  /// and kept when feasible.
  double vertex_sup_bound() const {
    const std::size_t m = A_.size();
    const auto k = static_cast<std::size_t>(k_);
    double c = 0.0;
    std::vector<std::size_t> idx(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
      if (depth == k) {
        std::vector<std::vector<double>> M(k, std::vector<double>(k + 1));
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t j = 0; j < k; ++j) M[r][j] = A_[idx[r]][j];
          M[r][k] = b_[idx[r]];
        }
        for (std::size_t col = 0; col < k; ++col) {
          std::size_t piv = col;
          for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
          if (std::abs(M[piv][col]) < 1e-12) return;
          std::swap(M[piv], M[col]);
          for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = M[r][col] / M[col][col];
            for (std::size_t j = col; j <= k; ++j) M[r][j] -= f * M[col][j];
          }
        }
        std::vector<double> x(k);
        for (std::size_t j = 0; j < k; ++j) x[j] = M[j][k] / M[j][j];
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0;
          for (std::size_t j = 0; j < k; ++j) s += A_[i][j] * x[j];
          if (s > b_[i] * (1 + 1e-9) + 1e-12) return;
        }
        for (double v : x) c = std::max(c, std::abs(v));
        return;
      }
      for (std::size_t i = start; i < m; ++i) {
        idx[depth] = i;
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
    return c * (1 + 1e-12);
  }

  Kind kind_;
  int k_;
  double radius_ = 1.0;
  std::vector<double> half_widths_;
  std::vector<std::vector<double>> A_;
  std::vector<double> b_;
  double sup_bound_ = 0.0;
};

/// All integer points of G_t, lexicographic order.
inline std::vector<IVec> lattice_points(const ConvexBody& G, double t) {
  require(t > 0, "lattice_points: t must be positive");
  const int k = G.dim();
  const long R = static_cast<long>(std::ceil(G.sup_bound() * t));
  std::vector<IVec> out;
  IVec x(static_cast<std::size_t>(k), -R);
  for (;;) {
    if (G.contains_scaled(x, t)) out.push_back(x);
    int i = k - 1;
    while (i >= 0 && x[static_cast<std::size_t>(i)] == R) {
      x[static_cast<std::size_t>(i)] = -R;
      --i;
    }
    if (i < 0) break;
    ++x[static_cast<std::size_t>(i)];
  }
  return out;
}

/// Number of lattice points of G_t without materialising them.
inline std::size_t lattice_count(const ConvexBody& G, double t) { return lattice_points(G, t).size(); }

}  // namespace radonlab
