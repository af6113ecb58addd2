// Thin FFTW wrapper: in-place rank-d complex transforms on row-major data.
#pragma once

#include <fftw3.h>

#include <cstdint>
#include <mutex>
#include <vector>

#include "frostlab/core.hpp"

namespace frostlab {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// In-place DFT. Forward uses the e^{-2 pi i x xi} convention; the inverse is
// normalized by 1/prod(shape).
inline void fft_inplace(std::vector<cplx>& data,
                        const std::vector<std::int64_t>& shape, bool inverse) {
  std::int64_t total = 1;
  for (auto s : shape) total *= s;
  require(static_cast<std::int64_t>(data.size()) == total,
          "fft_inplace: data size does not match shape");
  std::vector<int> dims(shape.begin(), shape.end());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // FFTW planning is not thread-safe; execution of a ready plan is.
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                         inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(total);
    for (auto& v : data) v *= scale;
  }
}

}  // namespace frostlab
