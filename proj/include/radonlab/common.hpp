#pragma once

// Shared numeric plumbing: error types, checked wide integers, exact phase
// reduction, deterministic summation, seeded random streams and a small
// deterministic parallel loop.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace radonlab {

using cplx = std::complex<double>;
using i128 = __int128;
using IVec = std::vector<long>;

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

/// Work would exceed a configured size budget; `required` is the size asked for.
class budget_exceeded : public std::runtime_error {
 public:
  budget_exceeded(const std::string& what, double required)
      : std::runtime_error(what + " (required size " + std::to_string(required) + ")"),
        required_(required) {}
  double required() const noexcept { return required_; }

 private:
  double required_;
};

class quadrature_failure : public std::runtime_error {
 public:
  quadrature_failure(const std::string& what, cplx estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
  cplx estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  cplx estimate_;
  double error_bound_;
};

class kernel_invalid : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class not_representable : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class infeasible_configuration : public std::runtime_error {
 public:
  infeasible_configuration(const std::string& what, std::size_t overlaps)
      : std::runtime_error(what), overlaps_(overlaps) {}
  std::size_t overlaps() const noexcept { return overlaps_; }

 private:
  std::size_t overlaps_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// checked 128-bit arithmetic
// ---------------------------------------------------------------------------

inline i128 checked_mul(i128 a, i128 b) {
  i128 out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("128-bit multiplication overflow");
  return out;
}

inline i128 checked_add(i128 a, i128 b) {
  i128 out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("128-bit addition overflow");
  return out;
}

inline long narrow_to_long(i128 v) {
  if (v > std::numeric_limits<long>::max() || v < std::numeric_limits<long>::min())
    throw std::overflow_error("value does not fit in 64 bits");
  return static_cast<long>(v);
}

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

// ---------------------------------------------------------------------------
// phases
// ---------------------------------------------------------------------------

/// Fractional part of xi * n in [0, 1), computed exactly from the binary
/// expansion of xi before the single final rounding to double.
inline double frac_product(double xi, i128 n) {
  if (xi == 0.0 || n == 0) return 0.0;
  int exp = 0;
  double m = std::frexp(xi, &exp);  // xi = m * 2^exp, 0.5 <= |m| < 1
  auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  int shift = 53 - exp;  // xi = mant * 2^-shift
  if (shift <= 0) return 0.0;
  unsigned __int128 un = n < 0 ? static_cast<unsigned __int128>(-n) : static_cast<unsigned __int128>(n);
  bool neg = (mant < 0) != (n < 0);
  auto umant = static_cast<unsigned __int128>(mant < 0 ? -mant : mant);
  if (un >> 70 != 0) throw std::overflow_error("phase argument too large for exact reduction");
  // umant < 2^53 and un < 2^70 so the product fits in 123 bits.
  unsigned __int128 prod = umant * un;
  long double f;
  if (shift >= 127) {
    f = std::ldexp(static_cast<long double>(prod), -shift);
  } else {
    unsigned __int128 mod = static_cast<unsigned __int128>(1) << shift;
    unsigned __int128 rem = prod & (mod - 1);
    f = std::ldexp(static_cast<long double>(rem), -shift);
  }
  if (neg && f != 0.0L) f = 1.0L - f;
  double out = static_cast<double>(f);
  return out >= 1.0 ? 0.0 : out;
}

/// Reduce a real number into [0, 1).
inline double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

/// Reduce into the fundamental domain [-1/2, 1/2).
inline double centered_frac(double x) {
  double f = frac(x + 0.5) - 0.5;
  return f;
}

/// e^{2 pi i t}
inline cplx expi2pi(double t) {
  double a = 2.0 * std::numbers::pi * frac(t);
  return {std::cos(a), std::sin(a)};
}

// ---------------------------------------------------------------------------
// deterministic summation
// ---------------------------------------------------------------------------

/// Pairwise (tree) sum with a fixed split pattern, independent of threading.
template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 16) {
    T s{};
    for (const auto& x : xs) s += x;
    return s;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// random streams
// ---------------------------------------------------------------------------

/// splitmix64 based stream; trial streams are derived from (seed, index) so
/// results do not depend on how trials are scheduled across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  static Rng for_trial(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    r.next();
    return r;
  }
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  long integer(long lo, long hi) {  // inclusive
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next() % span);
  }
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double sign() { return (next() & 1U) ? 1.0 : -1.0; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// parallel loop
// ---------------------------------------------------------------------------

inline unsigned& default_threads() {
  static unsigned n = 1;
  return n;
}

/// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
/// the result is independent of the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

inline long gcd_long(long a, long b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Least-squares slope and intercept of y against x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares needs two or more paired points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  require(den != 0.0, "least_squares: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace radonlab
