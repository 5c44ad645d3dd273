#ifndef WHITTLE_SPECTRAL_HPP
#define WHITTLE_SPECTRAL_HPP

#include <array>
#include <Eigen/Dense>

#include "whittle/grid.hpp"
#include "whittle/matern.hpp"

namespace whittle {

/// Windowed discrete Fourier transform on the centered wavenumber layout,
/// H(k) = (1/2pi) sqrt(dx dy / MN) sum_x w(x) h(x) e^{-i k.x}.
Eigen::ArrayXXcd windowed_dft(const Eigen::ArrayXXd& field, const Window& w);

/// Reconstruct w(x) h(x) from centered-layout coefficients (inverse of
/// windowed_dft up to the window factor).
Eigen::ArrayXXd inverse_windowed_dft(const Eigen::ArrayXXcd& coeffs,
                                     const GridSpec& spec);

/// |H(k)|^2 on the centered wavenumber grid.
Eigen::ArrayXXd periodogram(const Eigen::ArrayXXcd& coeffs);

/// Exactly blurred spectral density S-bar(k) = var{H(k)}: the lag sum
/// (1/2pi)^2 (dx dy / MN) sum_y W(y) C(y) e^{-i k.y}, evaluated by folding
/// the (2M-1)(2N-1) lag sequence modulo (M,N) and one M x N transform.
/// `wacf` is the window autocorrelation from window_autocorrelation().
Eigen::ArrayXXd blurred_sdf(const MaternParams& theta,
                            const Eigen::ArrayXXd& wacf, const GridSpec& spec);

/// Convenience overload computing the window autocorrelation internally.
Eigen::ArrayXXd blurred_sdf(const MaternParams& theta, const Window& w);

struct BlurredSdfGradient {
  Eigen::ArrayXXd value;                  // S-bar(k)
  std::array<Eigen::ArrayXXd, 3> grad;    // dS-bar/d(sigma2, nu, rho)
  /// Logarithmic derivative m-bar_theta(k) = grad[i] / value.
  Eigen::ArrayXXd log_grad(int i) const { return grad[i] / value; }
};

/// Blurred density together with its exact parameter gradient (same folded
/// pipeline applied to W(y) dC/dtheta(y)).
BlurredSdfGradient blurred_sdf_gradient(const MaternParams& theta,
                                        const Eigen::ArrayXXd& wacf,
                                        const GridSpec& spec);

/// The blurred density under its statistical name: the expectation of the
/// windowed periodogram.
inline Eigen::ArrayXXd expected_periodogram(const MaternParams& theta,
                                            const Window& w) {
  return blurred_sdf(theta, w);
}

}  // namespace whittle

#endif
