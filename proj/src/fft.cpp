#include "whittle/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace whittle::fft {

namespace {

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

ArrayXXcd transform(const ArrayXXcd& in, int sign) {
  const int r = static_cast<int>(in.rows());
  const int c = static_cast<int>(in.cols());
  std::vector<std::complex<double>> buf(static_cast<size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) buf[static_cast<size_t>(i) * c + j] = in(i, j);

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_2d(r, c, reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }

  ArrayXXcd out(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out(i, j) = buf[static_cast<size_t>(i) * c + j];
  return out;
}

}  // namespace

ArrayXXcd forward(const ArrayXXcd& in) { return transform(in, FFTW_FORWARD); }

ArrayXXcd inverse(const ArrayXXcd& in) { return transform(in, FFTW_BACKWARD); }

}  // namespace whittle::fft
