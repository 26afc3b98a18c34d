#pragma once

// Independent reference computations used only by the tests. Each one is
// the most literal transcription of a definition that is still cheap at
// test sizes; none shares code paths with the library beyond basic types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// V_r by enumerating every subset of positions (n <= 20).
inline double vr_subsets(const std::vector<cplx>& a, double r) {
  const std::size_t n = a.size();
  double best = 0;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    double s = 0;
    long prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1UL)) continue;
      if (prev >= 0) s += std::pow(std::abs(a[i] - a[static_cast<std::size_t>(prev)]), r);
      prev = static_cast<long>(i);
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / r);
}

/// Longest chain with consecutive gaps > lambda, by subset enumeration.
inline long jumps_subsets(const std::vector<cplx>& a, double lambda) {
  const std::size_t n = a.size();
  long best = 0;
  for (unsigned long mask = 1; mask < (1UL << n); ++mask) {
    long len = 0, prev = -1;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1UL)) continue;
      if (prev >= 0 && std::abs(a[i] - a[static_cast<std::size_t>(prev)]) <= lambda) ok = false;
      prev = static_cast<long>(i);
      ++len;
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

/// q^{-k} sum over y in {1..q}^k of exp(2 pi i sum_g a_g y^g / q), with the
/// exponent reduced mod q in 64-bit integers.
inline cplx gauss_direct(const std::vector<std::vector<int>>& gamma, const std::vector<long>& a, long q) {
  const std::size_t k = gamma.front().size();
  std::vector<long> y(k, 1);
  cplx s = 0;
  for (;;) {
    long e = 0;
    for (std::size_t g = 0; g < gamma.size(); ++g) {
      long m = 1;
      for (std::size_t i = 0; i < k; ++i)
        for (int p = 0; p < gamma[g][i]; ++p) m = (m * y[i]) % q;
      e = (e + a[g] % q * m) % q;
    }
    s += std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(q));
    std::size_t i = 0;
    while (i < k && y[i] == q) y[i++] = 1;
    if (i == k) break;
    ++y[i];
  }
  return s / std::pow(static_cast<double>(q), static_cast<double>(k));
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13, int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        double mid = (lo + hi) / 2, lm = (lo + mid) / 2, rm = (mid + hi) / 2;
        double flm = f(lm), frm = f(rm);
        double left = (mid - lo) / 6 * (flo + 4 * flm + fmid), right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

/// Si(x) = \int_0^x sin(t)/t dt
inline double sine_integral(double x) {
  if (x == 0) return 0;
  double s = 0;
  const double step = 4.0;
  double lo = 0;
  while (lo < std::abs(x)) {
    double hi = std::min(std::abs(x), lo + step);
    s += simpson([](double t) { return t == 0 ? 1.0 : std::sin(t) / t; }, lo, hi);
    lo = hi;
  }
  return x < 0 ? -s : s;
}

/// Radon average on Z^m by literal definition: every output point in the
/// support sums f(x - P(y)) over y.
inline std::map<std::vector<long>, cplx> average_literal(const std::map<std::vector<long>, cplx>& f,
                                                         const std::vector<std::vector<long>>& images,
                                                         const std::vector<double>& weights) {
  std::map<std::vector<long>, cplx> out;
  for (const auto& [z, v] : f)
    for (std::size_t y = 0; y < images.size(); ++y) {
      auto x = z;
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += images[y][j];
      out[x] += weights[y] * v;
    }
  return out;
}

/// Naive multidimensional DFT with the + sign convention.
inline std::vector<cplx> dft(const std::vector<cplx>& v, const std::vector<int>& dims) {
  std::size_t n = v.size();
  std::vector<cplx> out(n);
  auto unflat = [&](std::size_t i) {
    std::vector<long> c(dims.size());
    for (std::size_t j = dims.size(); j-- > 0;) {
      c[j] = static_cast<long>(i % static_cast<std::size_t>(dims[j]));
      i /= static_cast<std::size_t>(dims[j]);
    }
    return c;
  };
  for (std::size_t a = 0; a < n; ++a) {
    auto fa = unflat(a);
    cplx s = 0;
    for (std::size_t b = 0; b < n; ++b) {
      auto xb = unflat(b);
      double ph = 0;
      for (std::size_t j = 0; j < dims.size(); ++j) ph += static_cast<double>(fa[j] * xb[j] % dims[j]) / dims[j];
      s += v[b] * std::polar(1.0, 2 * std::numbers::pi * ph);
    }
    out[a] = s;
  }
  return out;
}

/// Integer members of P_N up to `limit` by testing the definition directly.
inline std::vector<long> iw_members_upto(long N, double rho, long limit) {
  long n0 = static_cast<long>(std::floor(std::pow(static_cast<double>(N), rho / 2) + 1e-12)) + 1;
  long D = static_cast<long>(std::floor(2 / rho + 1e-12)) + 1;
  auto legendre = [&](long p) {
    long e = 0;
    for (long pk = p; pk <= n0; pk *= p) e += n0 / pk;
    return e * D;
  };
  auto is_prime = [](long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
      if (p % d == 0) return false;
    return true;
  };
  std::vector<long> out;
  for (long q = 1; q <= limit; ++q) {
    long rest = q, large = 0;
    bool ok = true;
    for (long p = 2; p <= std::max<long>(rest, 2) && ok; ++p) {
      if (!is_prime(p) || rest % p != 0) continue;
      long e = 0;
      while (rest % p == 0) {
        rest /= p;
        ++e;
      }
      if (p <= n0)
        ok = e <= legendre(p);
      else if (p <= N) {
        ok = e <= D;
        ++large;
      } else
        ok = false;
    }
    if (ok && large <= D) out.push_back(q);
  }
  return out;
}

/// 1-D or 2-D mollified indicator by plain tensor Simpson on a fine grid.
inline double bump_reference(int d, double r) {
  const double eps = 1.0 / (32.0 * d), R = 3.0 / (32.0 * d);
  auto phi = [&](double t) {
    double u = t / eps;
    return u * u >= 1 ? 0.0 : std::exp(-1.0 / (1.0 - u * u));
  };
  const int n = 2000;
  const double h = 2 * eps / n;
  auto w = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double num = 0, den = 0;
  if (d == 1) {
    for (int i = 0; i <= n; ++i) {
      double z = -eps + i * h;
      double p = phi(z) * w(i);
      den += p;
      if (std::abs(r - z) <= R) num += p;
    }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        double z1 = -eps + i * h, z2 = -eps + j * h;
        double p = phi(std::hypot(z1, z2)) * w(i) * w(j);
        den += p;
        if (std::hypot(r - z1, z2) <= R) num += p;
      }
  }
  return num / den;
}

}  // namespace oracle
