#ifndef WHITTLE_ESTIMATOR_HPP
#define WHITTLE_ESTIMATOR_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "whittle/diagnostics.hpp"
#include "whittle/likelihood.hpp"
#include "whittle/uncertainty.hpp"

namespace whittle {

enum class UqMethod { per_diagonal, dft_matrix, sampling, none };

struct FitConfig {
  std::optional<MaternParams> init;  // empty: initial_guess()
  DetrendMode detrend = DetrendMode::mean;
  double taper_fraction = 0.0;  // 0: unit window
  bool use_disk_mask = false;
  double grad_tol = 1e-6;
  double step_tol = 1e-8;
  int max_iterations = 500;
  int restarts = 3;  // perturbed reinitializations on non-convergence
  /// Finite-difference gradient of the objective instead of the analytic
  /// score; the two agree to optimizer tolerance, analytic is the default.
  bool finite_difference_gradient = false;
  UqMethod uq = UqMethod::per_diagonal;
  Eigen::Index sampling_replicates = 200;
  double level = 0.95;  // confidence level for the reported intervals
  std::uint64_t seed = 0;

  bool valid() const {
    return grad_tol > 0 && step_tol > 0 && max_iterations > 0 &&
           restarts >= 0 && taper_fraction >= 0 && taper_fraction < 0.5 &&
           level > 0 && level < 1 && sampling_replicates >= 50;
  }
};

struct OptimizerTrace {
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  double final_grad_norm = 0.0;  // infinity norm, log-parameter space
  bool converged = false;
  std::vector<double> loglik_path;
};

struct FitResult {
  MaternParams theta_hat;
  double loglik = 0.0;
  double score_norm = 0.0;  // infinity norm of the log-space score at theta_hat
  bool converged = false;
  OptimizerTrace trace;

  Eigen::Matrix3d fisher = Eigen::Matrix3d::Zero();
  bool has_uncertainty = false;
  Eigen::Matrix3d cov_theta = Eigen::Matrix3d::Zero();
  Eigen::Vector3d std_errors = Eigen::Vector3d::Zero();
  Eigen::Matrix3d correlations = Eigen::Matrix3d::Identity();
  double level = 0.95;
  Eigen::Matrix<double, 3, 2> ci = Eigen::Matrix<double, 3, 2>::Zero();
  std::array<bool, 3> ci_degenerate{false, false, false};

  ResidualReport residual_test;

  // provenance
  DetrendMode detrend = DetrendMode::mean;
  double taper_fraction = 0.0;
  bool use_disk_mask = false;
};

/// Moment-based starting point: sample variance, unit smoothness, a tenth of
/// the grid diagonal as range. Throws on a constant field ("zero variance").
MaternParams initial_guess(const Eigen::ArrayXXd& field, const GridSpec& spec);

/// Maximize the debiased objective over log-parameters by BFGS with
/// backtracking line search; positivity holds by construction. Non-convergence
/// triggers up to `restarts` perturbed reinitializations.
FitResult fit(const Eigen::ArrayXXd& field, const GridSpec& spec,
              const FitConfig& config = {});

/// Same, on a prebuilt context (preprocessing already applied); the starting
/// point is passed explicitly since the raw field is no longer available.
FitResult fit(const LikelihoodContext& ctx, const FitConfig& config,
              const MaternParams& init);

/// theta +/- z * sqrt(diag cov) at the given confidence level; rows ordered
/// (sigma2, nu, rho), columns (lower, upper).
Eigen::Matrix<double, 3, 2> confidence_intervals(const MaternParams& theta,
                                                 const Eigen::Matrix3d& cov,
                                                 double level);

}  // namespace whittle

#endif
