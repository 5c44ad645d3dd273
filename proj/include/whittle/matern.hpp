#ifndef WHITTLE_MATERN_HPP
#define WHITTLE_MATERN_HPP

#include <Eigen/Dense>

namespace whittle {

/// The Matern parameter triple (variance, smoothness, range), all > 0.
struct MaternParams {
  double sigma2 = 1.0;  ///< variance, field-units^2
  double nu = 1.0;      ///< smoothness, dimensionless
  double rho = 1.0;     ///< range, length units

  bool valid() const;
  void require_valid() const;  // throws std::invalid_argument
};

/// Unconstrained log-parameters; exp-maps bijectively onto the positive octant.
struct LogParams {
  double log_sigma2 = 0.0, log_nu = 0.0, log_rho = 0.0;

  static LogParams from(const MaternParams& p);
  MaternParams to_params() const;
  Eigen::Vector3d vec() const { return {log_sigma2, log_nu, log_rho}; }
  static LogParams from_vec(const Eigen::Vector3d& v) {
    return {v[0], v[1], v[2]};
  }
};

/// Per-wavenumber auxiliary mu = a/(a + k^2) with a = 4 nu / (pi^2 rho^2);
/// mu(0) = 1 and 0 < mu <= 1 for finite k.
double aux_mu(const MaternParams& p, double k);

/// Modified Bessel function of the second kind, fractional order nu >= 0,
/// argument z > 0. In-repo Temme-series / continued-fraction implementation.
double bessel_k(double nu, double z);

/// Isotropic two-dimensional Matern spectral density S(k).
double spectral_density(const MaternParams& p, double k);

/// Isotropic Matern spatial covariance C(r); C(0) = sigma2 analytically.
double covariance(const MaternParams& p, double r);

/// Cumulative isotropic power P(k) = 2 pi int_0^k S(k') k' dk', closed form.
double power_distribution(const MaternParams& p, double k);

/// Wavenumber k_alpha at which the cumulative power reaches alpha * sigma2.
/// alpha in [0, 1); diverges as alpha -> 1.
double quantile_wavenumber(const MaternParams& p, double alpha);

/// Logarithmic spectral derivatives m_theta(k) = S^-1 dS/dtheta,
/// ordered (sigma2, nu, rho).
Eigen::Vector3d log_spectral_gradient(const MaternParams& p, double k);

/// Entries d m_{theta'} / d theta; row = differentiating parameter theta,
/// column = theta'. Symmetric in the (nu, rho) cross terms.
Eigen::Matrix3d spectral_gradient_hessian_terms(const MaternParams& p,
                                                double k);

/// Gradient of the spatial covariance, ordered (sigma2, nu, rho).
/// r = 0 returns the analytic limits (C/sigma2, 0, 0).
Eigen::Vector3d covariance_gradient(const MaternParams& p, double r);

}  // namespace whittle

#endif
