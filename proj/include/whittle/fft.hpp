#ifndef WHITTLE_FFT_HPP
#define WHITTLE_FFT_HPP

#include <complex>
#include <Eigen/Dense>

namespace whittle::fft {

using Eigen::ArrayXXcd;

// Unnormalized 2-D DFT over both array dimensions, e^{-i 2 pi ...} sign
// convention. Rows transform with their own length, columns likewise.
ArrayXXcd forward(const ArrayXXcd& in);

// Unnormalized inverse (e^{+i} sign); divide by size(in) for a true inverse.
ArrayXXcd inverse(const ArrayXXcd& in);

// Reorder a standard-DFT-layout array so that the zero frequency sits at
// (floor(rows/2), floor(cols/2)), the centered wavenumber-grid layout.
template <typename Derived>
auto fftshift(const Eigen::ArrayBase<Derived>& in) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index r = in.rows(), c = in.cols();
  const Eigen::Index rh = r / 2, ch = c / 2;
  Plain out(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      out(i, j) = in((i - rh + r) % r, (j - ch + c) % c);
  return out;
}

// Inverse of fftshift (they differ for odd sizes).
template <typename Derived>
auto ifftshift(const Eigen::ArrayBase<Derived>& in) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index r = in.rows(), c = in.cols();
  const Eigen::Index rh = r / 2, ch = c / 2;
  Plain out(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      out((i - rh + r) % r, (j - ch + c) % c) = in(i, j);
  return out;
}

}  // namespace whittle::fft

#endif
