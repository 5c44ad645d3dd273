#include "whittle/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace whittle {

MaskArray full_mask(const GridSpec& spec) {
  spec.require_valid();
  return MaskArray::Constant(spec.n, spec.m, true);
}

MaskArray disk_mask(const GridSpec& spec) {
  spec.require_valid();
  constexpr double kPi = 3.14159265358979323846;
  const double radius = std::min(kPi / spec.dx, kPi / spec.dy);
  const Eigen::ArrayXXd mag = wavenumber_magnitude(spec);
  MaskArray mask(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      mask(j, i) = mag(j, i) <= radius;
  return mask;
}

LikelihoodContext::LikelihoodContext(const Eigen::ArrayXXd& field,
                                     const Window& w,
                                     std::optional<MaskArray> mask)
    : window_(w),
      periodogram_(periodogram(windowed_dft(field, w))),
      wacf_(window_autocorrelation(w)),
      mask_(mask ? std::move(*mask) : full_mask(w.spec)) {
  if (mask_.rows() != spec().n || mask_.cols() != spec().m)
    throw std::invalid_argument("LikelihoodContext: mask shape mismatch");
  mask_count_ = mask_.count();
  if (mask_count_ == 0)
    throw std::invalid_argument("LikelihoodContext: empty wavenumber mask");
}

LikelihoodContext::LikelihoodContext(Eigen::ArrayXXd periodogram_values,
                                     Window w, std::optional<MaskArray> mask,
                                     int)
    : window_(std::move(w)),
      periodogram_(std::move(periodogram_values)),
      wacf_(window_autocorrelation(window_)),
      mask_(mask ? std::move(*mask) : full_mask(window_.spec)) {
  if (periodogram_.rows() != spec().n || periodogram_.cols() != spec().m)
    throw std::invalid_argument("LikelihoodContext: periodogram shape");
  mask_count_ = mask_.count();
  if (mask_count_ == 0)
    throw std::invalid_argument("LikelihoodContext: empty wavenumber mask");
}

std::shared_ptr<const BlurredSdfGradient> LikelihoodContext::blurred(
    const MaternParams& theta) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (cache_ && cache_key_.sigma2 == theta.sigma2 &&
      cache_key_.nu == theta.nu && cache_key_.rho == theta.rho)
    return cache_;
  auto fresh = std::make_shared<BlurredSdfGradient>(
      blurred_sdf_gradient(theta, wacf_, spec()));
  cache_key_ = theta;
  cache_ = fresh;
  return fresh;
}

namespace {
void require_positive(const MaternParams& theta) {
  if (!theta.valid())
    throw std::domain_error("likelihood: parameters must be positive");
}
}  // namespace

double blurred_loglik(const MaternParams& theta, const LikelihoodContext& ctx) {
  require_positive(theta);
  const auto blur = ctx.blurred(theta);
  const auto& sbar = blur->value;
  const auto& pgram = ctx.data_periodogram();
  const auto& mask = ctx.mask();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < sbar.rows(); ++j)
    for (Eigen::Index i = 0; i < sbar.cols(); ++i) {
      if (!mask(j, i)) continue;
      const double s = sbar(j, i);
      if (!(s > 0.0))
        throw std::domain_error("blurred_loglik: nonpositive blurred density");
      acc += std::log(s) + pgram(j, i) / s;
    }
  return -acc / static_cast<double>(ctx.spec().size());
}

Eigen::Vector3d blurred_score(const MaternParams& theta,
                              const LikelihoodContext& ctx) {
  require_positive(theta);
  const auto blur = ctx.blurred(theta);
  const auto& sbar = blur->value;
  const auto& pgram = ctx.data_periodogram();
  const auto& mask = ctx.mask();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (Eigen::Index j = 0; j < sbar.rows(); ++j)
    for (Eigen::Index i = 0; i < sbar.cols(); ++i) {
      if (!mask(j, i)) continue;
      const double s = sbar(j, i);
      const double bracket = 1.0 - pgram(j, i) / s;
      for (int t = 0; t < 3; ++t) acc[t] += blur->grad[t](j, i) / s * bracket;
    }
  return -acc / static_cast<double>(ctx.spec().size());
}

Eigen::Matrix3d blurred_fisher(const MaternParams& theta,
                               const LikelihoodContext& ctx) {
  require_positive(theta);
  const auto blur = ctx.blurred(theta);
  const auto& sbar = blur->value;
  const auto& mask = ctx.mask();
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (Eigen::Index j = 0; j < sbar.rows(); ++j)
    for (Eigen::Index i = 0; i < sbar.cols(); ++i) {
      if (!mask(j, i)) continue;
      Eigen::Vector3d mbar;
      for (int t = 0; t < 3; ++t)
        mbar[t] = blur->grad[t](j, i) / sbar(j, i);
      acc += mbar * mbar.transpose();
    }
  return acc / static_cast<double>(ctx.spec().size());
}

double unblurred_loglik(const MaternParams& theta,
                        const LikelihoodContext& ctx) {
  require_positive(theta);
  const Eigen::ArrayXXd mag = wavenumber_magnitude(ctx.spec());
  const auto& pgram = ctx.data_periodogram();
  const auto& mask = ctx.mask();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < mag.rows(); ++j)
    for (Eigen::Index i = 0; i < mag.cols(); ++i) {
      if (!mask(j, i)) continue;
      const double s = spectral_density(theta, mag(j, i));
      acc += std::log(s) + pgram(j, i) / s;
    }
  return -acc / static_cast<double>(ctx.spec().size());
}

Eigen::Vector3d unblurred_score(const MaternParams& theta,
                                const LikelihoodContext& ctx) {
  require_positive(theta);
  const Eigen::ArrayXXd mag = wavenumber_magnitude(ctx.spec());
  const auto& pgram = ctx.data_periodogram();
  const auto& mask = ctx.mask();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (Eigen::Index j = 0; j < mag.rows(); ++j)
    for (Eigen::Index i = 0; i < mag.cols(); ++i) {
      if (!mask(j, i)) continue;
      const double s = spectral_density(theta, mag(j, i));
      acc += log_spectral_gradient(theta, mag(j, i)) *
             (1.0 - pgram(j, i) / s);
    }
  return -acc / static_cast<double>(ctx.spec().size());
}

Eigen::Matrix3d unblurred_fisher(const MaternParams& theta,
                                 const LikelihoodContext& ctx) {
  require_positive(theta);
  const Eigen::ArrayXXd mag = wavenumber_magnitude(ctx.spec());
  const auto& mask = ctx.mask();
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (Eigen::Index j = 0; j < mag.rows(); ++j)
    for (Eigen::Index i = 0; i < mag.cols(); ++i) {
      if (!mask(j, i)) continue;
      const Eigen::Vector3d m = log_spectral_gradient(theta, mag(j, i));
      acc += m * m.transpose();
    }
  return acc / static_cast<double>(ctx.spec().size());
}

Eigen::Matrix3d unblurred_hessian(const MaternParams& theta,
                                  const LikelihoodContext& ctx) {
  require_positive(theta);
  const Eigen::ArrayXXd mag = wavenumber_magnitude(ctx.spec());
  const auto& pgram = ctx.data_periodogram();
  const auto& mask = ctx.mask();
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (Eigen::Index j = 0; j < mag.rows(); ++j)
    for (Eigen::Index i = 0; i < mag.cols(); ++i) {
      if (!mask(j, i)) continue;
      const double k = mag(j, i);
      const double ratio = pgram(j, i) / spectral_density(theta, k);
      const Eigen::Vector3d m = log_spectral_gradient(theta, k);
      const Eigen::Matrix3d dm = spectral_gradient_hessian_terms(theta, k);
      acc += dm + (m * m.transpose() - dm) * ratio;
    }
  return -acc / static_cast<double>(ctx.spec().size());
}

}  // namespace whittle
