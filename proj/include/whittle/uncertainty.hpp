#ifndef WHITTLE_UNCERTAINTY_HPP
#define WHITTLE_UNCERTAINTY_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "whittle/likelihood.hpp"

namespace whittle {

enum class ScoreCovMethod { sampling, dft_matrix, per_diagonal };

struct ScoreCovariance {
  Eigen::Matrix3d value = Eigen::Matrix3d::Zero();
  ScoreCovMethod method = ScoreCovMethod::per_diagonal;
  Eigen::Index effort = 0;  // replicates sampled or offset classes visited
};

/// Dense periodogram covariance split into its two Gaussian fourth-moment
/// terms. Wavenumbers are flattened in centered layout, index = row * m + col.
struct PeriodogramCovariance {
  Eigen::MatrixXd hermitian;  // |<H(k) H*(k')>|^2
  Eigen::MatrixXd pseudo;     // |<H(k) H(k')>|^2
  Eigen::MatrixXd total() const { return hermitian + pseudo; }
};

/// Exact covariance of the windowed Fourier coefficients by dense transform
/// matrices; O((MN)^2) storage, guarded to grids of at most `guard` points.
PeriodogramCovariance periodogram_covariance_dense(const MaternParams& theta,
                                                   const Window& w,
                                                   Eigen::Index guard = 64 *
                                                                        64);

/// Monte Carlo score covariance: sample covariance of the blurred score at
/// theta0 over R >= 50 circulant-embedding simulations.
ScoreCovariance score_cov_sampling(const MaternParams& theta0, const Window& w,
                                   Eigen::Index R, std::uint64_t seed,
                                   std::optional<MaskArray> mask = {});

/// Exact score covariance assembled from the dense periodogram covariance;
/// same size guard as periodogram_covariance_dense.
ScoreCovariance score_cov_dft_matrix(const MaternParams& theta0,
                                     const Window& w,
                                     std::optional<MaskArray> mask = {},
                                     Eigen::Index guard = 64 * 64);

/// Exact score covariance streaming over wavenumber-offset classes, one
/// fold-and-transform per class; never materializes the (MN)^2 matrix.
/// `truncation` in [0,1) skips classes whose window-correlation mass is below
/// that fraction of the zero-offset mass (0 = exact).
ScoreCovariance score_cov_per_diagonal(const MaternParams& theta0,
                                       const Window& w,
                                       std::optional<MaskArray> mask = {},
                                       double truncation = 0.0);

/// F^-1 cov{score} F^-1, symmetrized.
Eigen::Matrix3d sandwich_covariance(const Eigen::Matrix3d& fisher,
                                    const ScoreCovariance& score_cov);

/// Normalize a covariance to unit diagonal.
Eigen::Matrix3d correlation_matrix(const Eigen::Matrix3d& cov);

}  // namespace whittle

#endif
