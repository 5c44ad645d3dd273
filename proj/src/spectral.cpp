#include "whittle/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "whittle/fft.hpp"

namespace whittle {

namespace {
constexpr double kPi = 3.14159265358979323846;

double dft_norm(const GridSpec& spec) {
  return 1.0 / (2.0 * kPi) *
         std::sqrt(spec.dx * spec.dy / static_cast<double>(spec.size()));
}

// Fold the mirrored lag sequence modulo (M, N) and transform once; the grid
// exponential e^{-i k.y} is periodic with period M (resp. N) in the lag
// indices, so the folded sum is exact at every grid wavenumber.
Eigen::ArrayXXcd fold_transform(const Eigen::ArrayXXcd& lag,
                                const GridSpec& spec) {
  const Eigen::Index m = spec.m, n = spec.n;
  Eigen::ArrayXXcd folded = Eigen::ArrayXXcd::Zero(n, m);
  for (Eigen::Index j = -(n - 1); j <= n - 1; ++j)
    for (Eigen::Index i = -(m - 1); i <= m - 1; ++i)
      folded((j + n) % n, (i + m) % m) += lag(j + n - 1, i + m - 1);
  return fft::fftshift(fft::forward(folded));
}

Eigen::ArrayXXd mirror_lags(const Eigen::ArrayXXd& quarter,
                            const GridSpec& spec) {
  const Eigen::Index m = spec.m, n = spec.n;
  Eigen::ArrayXXd full(2 * n - 1, 2 * m - 1);
  for (Eigen::Index j = -(n - 1); j <= n - 1; ++j)
    for (Eigen::Index i = -(m - 1); i <= m - 1; ++i)
      full(j + n - 1, i + m - 1) = quarter(std::abs(j), std::abs(i));
  return full;
}
}  // namespace

Eigen::ArrayXXcd windowed_dft(const Eigen::ArrayXXd& field, const Window& w) {
  if (field.rows() != w.spec.n || field.cols() != w.spec.m)
    throw std::invalid_argument("windowed_dft: field/window shape mismatch");
  const Eigen::ArrayXXcd tapered =
      (w.values * field).cast<std::complex<double>>();
  return fft::fftshift(fft::forward(tapered)) * dft_norm(w.spec);
}

Eigen::ArrayXXd inverse_windowed_dft(const Eigen::ArrayXXcd& coeffs,
                                     const GridSpec& spec) {
  if (coeffs.rows() != spec.n || coeffs.cols() != spec.m)
    throw std::invalid_argument("inverse_windowed_dft: shape mismatch");
  return fft::inverse(fft::ifftshift(coeffs)).real() / dft_norm(spec) /
         static_cast<double>(spec.size());
}

Eigen::ArrayXXd periodogram(const Eigen::ArrayXXcd& coeffs) {
  return coeffs.abs2();
}

Eigen::ArrayXXd blurred_sdf(const MaternParams& theta,
                            const Eigen::ArrayXXd& wacf, const GridSpec& spec) {
  theta.require_valid();
  const Eigen::Index m = spec.m, n = spec.n;
  if (wacf.rows() != 2 * n - 1 || wacf.cols() != 2 * m - 1)
    throw std::invalid_argument("blurred_sdf: autocorrelation shape mismatch");
  Eigen::ArrayXXd cq(n, m);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      cq(j, i) = covariance(theta, std::hypot(i * spec.dx, j * spec.dy));
  const Eigen::ArrayXXcd lag =
      (wacf * mirror_lags(cq, spec)).cast<std::complex<double>>();
  const double scale = spec.dx * spec.dy /
                       (4.0 * kPi * kPi * static_cast<double>(spec.size()));
  return fold_transform(lag, spec).real() * scale;
}

Eigen::ArrayXXd blurred_sdf(const MaternParams& theta, const Window& w) {
  return blurred_sdf(theta, window_autocorrelation(w), w.spec);
}

BlurredSdfGradient blurred_sdf_gradient(const MaternParams& theta,
                                        const Eigen::ArrayXXd& wacf,
                                        const GridSpec& spec) {
  theta.require_valid();
  const Eigen::Index m = spec.m, n = spec.n;
  if (wacf.rows() != 2 * n - 1 || wacf.cols() != 2 * m - 1)
    throw std::invalid_argument(
        "blurred_sdf_gradient: autocorrelation shape mismatch");
  Eigen::ArrayXXd cq(n, m), gq0(n, m), gq1(n, m), gq2(n, m);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r = std::hypot(i * spec.dx, j * spec.dy);
      cq(j, i) = covariance(theta, r);
      const Eigen::Vector3d g = covariance_gradient(theta, r);
      gq0(j, i) = g[0];
      gq1(j, i) = g[1];
      gq2(j, i) = g[2];
    }
  const double scale = spec.dx * spec.dy /
                       (4.0 * kPi * kPi * static_cast<double>(spec.size()));
  auto blur = [&](const Eigen::ArrayXXd& quarter) {
    const Eigen::ArrayXXcd lag =
        (wacf * mirror_lags(quarter, spec)).cast<std::complex<double>>();
    return (fold_transform(lag, spec).real() * scale).eval();
  };
  BlurredSdfGradient out;
  out.value = blur(cq);
  out.grad[0] = blur(gq0);
  out.grad[1] = blur(gq1);
  out.grad[2] = blur(gq2);
  return out;
}

}  // namespace whittle
