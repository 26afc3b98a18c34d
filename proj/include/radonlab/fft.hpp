#pragma once

// Thin FFTW wrapper for dense complex arrays in row-major order.
// exponent_sign = +1 computes sum_x f(x) e^{+2 pi i <j, x> / L} (the
// transform matching the multiplier convention), -1 the conjugate one.
// Neither direction normalizes.

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "radonlab/common.hpp"

namespace radonlab {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline void fft_inplace(std::vector<cplx>& data, const std::vector<int>& dims, int exponent_sign) {
  require(!dims.empty(), "fft_inplace: no dimensions");
  std::size_t total = 1;
  for (int d : dims) {
    require(d >= 1, "fft_inplace: nonpositive dimension");
    total *= static_cast<std::size_t>(d);
  }
  require(total == data.size(), "fft_inplace: data size does not match dims");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                         exponent_sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  require(plan != nullptr, "fft_inplace: FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

/// Cyclic convolution of two arrays of identical shape.
inline std::vector<cplx> cyclic_convolve(std::vector<cplx> a, std::vector<cplx> b, const std::vector<int>& dims) {
  fft_inplace(a, dims, -1);
  fft_inplace(b, dims, -1);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  fft_inplace(a, dims, +1);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
  return a;
}

}  // namespace radonlab
