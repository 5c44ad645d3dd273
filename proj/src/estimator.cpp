#include "whittle/estimator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "whittle/simulate.hpp"
#include "whittle/stats.hpp"

namespace whittle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double objective(const LikelihoodContext& ctx, const Eigen::Vector3d& v,
                 int& evaluations) {
  ++evaluations;
  try {
    return -blurred_loglik(LogParams::from_vec(v).to_params(), ctx);
  } catch (const std::exception&) {
    return kInf;  // line search backtracks away from pathological parameters
  }
}

Eigen::Vector3d gradient(const LikelihoodContext& ctx, const Eigen::Vector3d& v,
                         const FitConfig& config, int& evaluations) {
  if (config.finite_difference_gradient) {
    Eigen::Vector3d g;
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d vp = v, vm = v;
      vp[i] += h;
      vm[i] -= h;
      g[i] = (objective(ctx, vp, evaluations) -
              objective(ctx, vm, evaluations)) /
             (2.0 * h);
    }
    return g;
  }
  const MaternParams theta = LogParams::from_vec(v).to_params();
  const Eigen::Vector3d score = blurred_score(theta, ctx);
  return {-score[0] * theta.sigma2, -score[1] * theta.nu,
          -score[2] * theta.rho};
}

struct OptimRun {
  Eigen::Vector3d v;
  double f = kInf;
  OptimizerTrace trace;
};

OptimRun minimize(const LikelihoodContext& ctx, const Eigen::Vector3d& v0,
                  const FitConfig& config) {
  OptimRun run;
  run.v = v0;
  run.f = objective(ctx, run.v, run.trace.evaluations);
  if (!std::isfinite(run.f))
    throw std::invalid_argument("fit: objective not finite at the start");
  Eigen::Vector3d g = gradient(ctx, run.v, config, run.trace.evaluations);
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  // inverse Hessian
  run.trace.loglik_path.push_back(-run.f);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    run.trace.iterations = iter + 1;
    if (g.lpNorm<Eigen::Infinity>() < config.grad_tol) break;

    Eigen::Vector3d d = -h * g;
    if (d.dot(g) >= 0.0) {
      h.setIdentity();
      d = -g;
    }
    const double slope = d.dot(g);
    // Never move more than one log-unit per trial step: raw gradient
    // directions can be huge early on and would vault across basins.
    double t = std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());
    Eigen::Vector3d vn;
    double fn = kInf;
    while (t > 1e-14) {
      vn = run.v + t * d;
      fn = objective(ctx, vn, run.trace.evaluations);
      if (fn <= run.f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (t <= 1e-14) break;  // line search failed

    const Eigen::Vector3d s = vn - run.v;
    const Eigen::Vector3d gn =
        gradient(ctx, vn, config, run.trace.evaluations);
    const Eigen::Vector3d y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d left =
          Eigen::Matrix3d::Identity() - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    run.v = vn;
    run.f = fn;
    g = gn;
    run.trace.loglik_path.push_back(-run.f);
    if (s.lpNorm<Eigen::Infinity>() < config.step_tol) break;
  }
  run.trace.final_grad_norm = g.lpNorm<Eigen::Infinity>();
  run.trace.converged = run.trace.final_grad_norm < config.grad_tol;
  return run;
}
}  // namespace

MaternParams initial_guess(const Eigen::ArrayXXd& field, const GridSpec& spec) {
  spec.require_valid();
  if (field.rows() != spec.n || field.cols() != spec.m)
    throw std::invalid_argument("initial_guess: field shape mismatch");
  const double s2 = sample_variance(field);
  if (!(s2 > 0.0))
    throw std::invalid_argument("initial_guess: zero variance field");
  return MaternParams{s2, 1.0, spec.diagonal() / 10.0};
}

Eigen::Matrix<double, 3, 2> confidence_intervals(const MaternParams& theta,
                                                 const Eigen::Matrix3d& cov,
                                                 double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence_intervals: level in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const Eigen::Vector3d center(theta.sigma2, theta.nu, theta.rho);
  Eigen::Matrix<double, 3, 2> ci;
  for (int i = 0; i < 3; ++i) {
    const double hw = z * std::sqrt(std::max(cov(i, i), 0.0));
    ci(i, 0) = center[i] - hw;
    ci(i, 1) = center[i] + hw;
  }
  return ci;
}

FitResult fit(const LikelihoodContext& ctx, const FitConfig& config,
              const MaternParams& init) {
  if (!config.valid()) throw std::invalid_argument("fit: invalid FitConfig");
  init.require_valid();

  OptimRun best = minimize(ctx, LogParams::from(init).vec(), config);
  int restarts_used = 0;
  std::mt19937_64 rng(derive_seed(config.seed, 0, 2));
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  while (!best.trace.converged && restarts_used < config.restarts) {
    ++restarts_used;
    Eigen::Vector3d v0 = LogParams::from(init).vec();
    for (int i = 0; i < 3; ++i) v0[i] += jitter(rng);
    OptimRun attempt = minimize(ctx, v0, config);
    if (attempt.trace.converged || attempt.f < best.f) best = attempt;
  }
  best.trace.restarts_used = restarts_used;

  FitResult out;
  out.theta_hat = LogParams::from_vec(best.v).to_params();
  out.loglik = -best.f;
  out.converged = best.trace.converged;
  out.trace = best.trace;
  out.level = config.level;
  out.detrend = config.detrend;
  out.taper_fraction = config.taper_fraction;
  out.use_disk_mask = config.use_disk_mask;

  const Eigen::Vector3d score = blurred_score(out.theta_hat, ctx);
  out.score_norm =
      Eigen::Vector3d(score[0] * out.theta_hat.sigma2,
                      score[1] * out.theta_hat.nu,
                      score[2] * out.theta_hat.rho)
          .lpNorm<Eigen::Infinity>();
  out.fisher = blurred_fisher(out.theta_hat, ctx);
  out.residual_test = model_test(out.theta_hat, ctx, config.level);

  if (out.converged && config.uq != UqMethod::none) {
    ScoreCovariance sc;
    switch (config.uq) {
      case UqMethod::per_diagonal:
        sc = score_cov_per_diagonal(out.theta_hat, ctx.window(), ctx.mask());
        break;
      case UqMethod::dft_matrix:
        sc = score_cov_dft_matrix(out.theta_hat, ctx.window(), ctx.mask());
        break;
      case UqMethod::sampling:
        sc = score_cov_sampling(out.theta_hat, ctx.window(),
                                config.sampling_replicates,
                                derive_seed(config.seed, 0, 3), ctx.mask());
        break;
      case UqMethod::none:
        break;
    }
    try {
      out.cov_theta = sandwich_covariance(out.fisher, sc);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(
          std::string("fit: unidentifiable at optimum (") + e.what() + ")");
    }
    out.has_uncertainty = true;
    bool all_positive = true;
    for (int i = 0; i < 3; ++i) {
      out.std_errors[i] = std::sqrt(std::max(out.cov_theta(i, i), 0.0));
      out.ci_degenerate[static_cast<size_t>(i)] = !(out.cov_theta(i, i) > 0.0);
      all_positive = all_positive && out.cov_theta(i, i) > 0.0;
    }
    if (all_positive) out.correlations = correlation_matrix(out.cov_theta);
    out.ci = confidence_intervals(out.theta_hat, out.cov_theta, config.level);
  }
  return out;
}

FitResult fit(const Eigen::ArrayXXd& field, const GridSpec& spec,
              const FitConfig& config) {
  if (!config.valid()) throw std::invalid_argument("fit: invalid FitConfig");
  spec.require_valid();
  const Eigen::ArrayXXd prepared = detrend(field, spec, config.detrend);
  const MaternParams init =
      config.init ? *config.init : initial_guess(prepared, spec);
  const Window w = config.taper_fraction > 0.0
                       ? cosine_squared_taper(spec, config.taper_fraction)
                       : unit_window(spec);
  std::optional<MaskArray> mask;
  if (config.use_disk_mask) mask = disk_mask(spec);
  const LikelihoodContext ctx(prepared, w, mask);
  return fit(ctx, config, init);
}

}  // namespace whittle
