#pragma once

// Composite midpoint quadrature over dilated convex bodies and their shells,
// in polar form, refined dyadically with a Richardson check. Used for the
// oscillatory integrals of the continuous model and the continuous averages.

#include <cmath>
#include <functional>
#include <numbers>

#include "radonlab/common.hpp"
#include "radonlab/poly.hpp"

namespace radonlab {

struct QuadResult {
  cplx value;
  double error = 0.0;  // |R_n - R_{n-1}| at the accepted level
  int level = 0;
};

struct QuadOptions {
  double tol = 1e-8;
  int max_refinements = 20;
  int max_level = 25;  // hard cap on 2^level cells per direction
  long max_cells = 1L << 27;
};

/// Midpoint approximation at refinement level n of
///   \int_{G_t \ G_s} g(y) dy
/// in polar coordinates y = rho * omega, rho in [s r(omega), t r(omega)].
/// Supported for k = 1 and k = 2.
template <class G>
cplx shell_midpoint(const ConvexBody& body, double s, double t, G&& g, int n) {
  const int k = body.dim();
  const long nr = 1L << n;
  if (k == 1) {
    cplx total = 0;
    for (double dir : {1.0, -1.0}) {
      double rw = body.radial(std::vector<double>{dir});
      double a = s * rw, b = t * rw;
      double h = (b - a) / static_cast<double>(nr);
      std::vector<cplx> vals(static_cast<std::size_t>(nr));
      double y[1];
      for (long i = 0; i < nr; ++i) {
        y[0] = dir * (a + (static_cast<double>(i) + 0.5) * h);
        vals[static_cast<std::size_t>(i)] = g(std::span<const double>(y, 1));
      }
      total += pairwise_sum(std::span<const cplx>(vals)) * h;
    }
    return total;
  }
  if (k == 2) {
    const long nth = 8 * nr;
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(nth);
    std::vector<cplx> rows(static_cast<std::size_t>(nth));
    std::vector<cplx> vals(static_cast<std::size_t>(nr));
    for (long j = 0; j < nth; ++j) {
      double th = (static_cast<double>(j) + 0.5) * dth;
      double w[2] = {std::cos(th), std::sin(th)};
      double rw = body.radial(std::span<const double>(w, 2));
      double a = s * rw, b = t * rw;
      double h = (b - a) / static_cast<double>(nr);
      double y[2];
      for (long i = 0; i < nr; ++i) {
        double rho = a + (static_cast<double>(i) + 0.5) * h;
        y[0] = rho * w[0];
        y[1] = rho * w[1];
        vals[static_cast<std::size_t>(i)] = g(std::span<const double>(y, 2)) * rho;
      }
      rows[static_cast<std::size_t>(j)] = pairwise_sum(std::span<const cplx>(vals)) * h;
    }
    return pairwise_sum(std::span<const cplx>(rows)) * dth;
  }
  throw std::invalid_argument("shell quadrature implemented for k = 1 and k = 2 only");
}

/// Dyadic refinement with Richardson extrapolation R_n = (4 M_n - M_{n-1}) / 3,
/// accepted when successive R_n differ by less than tol.
/// `rate` bounds |grad phase| (cycles per unit length) so the first level
/// resolves the oscillation.
template <class G>
QuadResult integrate_shell(const ConvexBody& body, double s, double t, G&& g, double rate, const QuadOptions& opt = {}) {
  require(t > s && s >= 0, "integrate_shell: need 0 <= s < t");
  const int k = body.dim();
  require(k == 1 || k == 2, "integrate_shell: k must be 1 or 2");
  double extent = t * body.sup_bound() * std::sqrt(static_cast<double>(k));
  double cells = std::max(8.0, 8.0 * rate * extent);
  int n0 = std::max(3, static_cast<int>(std::ceil(std::log2(cells))));
  if (k == 2) n0 = std::max(3, n0 - 2);
  auto too_big = [&](int n) {
    if (n > opt.max_level) return true;
    double c = std::ldexp(1.0, n);
    if (k == 2) c *= 8.0 * c;
    return c > static_cast<double>(opt.max_cells);
  };
  if (too_big(n0)) throw quadrature_failure("integrate_shell: oscillation too fast for the cell budget", 0.0, std::numeric_limits<double>::infinity());
  cplx prev_m = shell_midpoint(body, s, t, g, n0);
  cplx prev_r = prev_m;
  double err = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= opt.max_refinements; ++i) {
    int n = n0 + i;
    if (too_big(n)) break;
    cplx m = shell_midpoint(body, s, t, g, n);
    cplx r = (4.0 * m - prev_m) / 3.0;
    if (i >= 2) {
      err = std::abs(r - prev_r);
      if (err < opt.tol) return {r, err, n};
    }
    prev_m = m;
    prev_r = r;
  }
  throw quadrature_failure("integrate_shell: refinement did not converge", prev_r, err);
}

/// Plain 1-D integral of a smooth function on [a, b] with the same scheme.
template <class F>
QuadResult integrate_interval(double a, double b, F&& f, double rate, const QuadOptions& opt = {}) {
  require(b > a, "integrate_interval: need a < b");
  double cells = std::max(8.0, 8.0 * rate * (b - a));
  int n0 = std::max(3, static_cast<int>(std::ceil(std::log2(cells))));
  auto level = [&](int n) {
    long m = 1L << n;
    double h = (b - a) / static_cast<double>(m);
    std::vector<cplx> v(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = f(a + (static_cast<double>(i) + 0.5) * h);
    return pairwise_sum(std::span<const cplx>(v)) * h;
  };
  if (n0 > opt.max_level) throw quadrature_failure("integrate_interval: oscillation too fast", 0.0, std::numeric_limits<double>::infinity());
  cplx prev_m = level(n0), prev_r = prev_m;
  double err = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= opt.max_refinements && n0 + i <= opt.max_level; ++i) {
    cplx m = level(n0 + i);
    cplx r = (4.0 * m - prev_m) / 3.0;
    if (i >= 2) {
      err = std::abs(r - prev_r);
      if (err < opt.tol) return {r, err, n0 + i};
    }
    prev_m = m;
    prev_r = r;
  }
  throw quadrature_failure("integrate_interval: refinement did not converge", prev_r, err);
}

}  // namespace radonlab
