#ifndef WHITTLE_LIKELIHOOD_HPP
#define WHITTLE_LIKELIHOOD_HPP

#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Dense>

#include "whittle/grid.hpp"
#include "whittle/matern.hpp"
#include "whittle/spectral.hpp"

namespace whittle {

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// All wavenumbers inside the disk of radius min(Nyquist_x, Nyquist_y),
/// centered layout. Used for data whose corner wavenumbers carry no power.
MaskArray disk_mask(const GridSpec& spec);
MaskArray full_mask(const GridSpec& spec);

/// Everything the objective needs about one data set: the windowed
/// periodogram, the window autocorrelation, and the wavenumber mask.
/// Immutable after construction except for a thread-safe cache of the last
/// blurred density evaluation.
class LikelihoodContext {
 public:
  LikelihoodContext(const Eigen::ArrayXXd& field, const Window& w,
                    std::optional<MaskArray> mask = std::nullopt);

  /// Build from a precomputed periodogram (used by simulation studies).
  LikelihoodContext(Eigen::ArrayXXd periodogram_values, Window w,
                    std::optional<MaskArray> mask, int);

  const GridSpec& spec() const { return window_.spec; }
  const Window& window() const { return window_; }
  const Eigen::ArrayXXd& data_periodogram() const { return periodogram_; }
  const MaskArray& mask() const { return mask_; }
  const Eigen::ArrayXXd& window_acf() const { return wacf_; }
  Eigen::Index mask_count() const { return mask_count_; }

  /// Blurred density and gradient at theta, cached for repeated evaluation
  /// at the same parameters (score and Fisher reuse the likelihood's blur).
  std::shared_ptr<const BlurredSdfGradient> blurred(
      const MaternParams& theta) const;

 private:
  Window window_;
  Eigen::ArrayXXd periodogram_;
  Eigen::ArrayXXd wacf_;
  MaskArray mask_;
  Eigen::Index mask_count_ = 0;

  mutable std::mutex cache_mutex_;
  mutable MaternParams cache_key_{-1.0, -1.0, -1.0};
  mutable std::shared_ptr<const BlurredSdfGradient> cache_;
};

/// Debiased Whittle objective -(1/MN) sum_mask [ln S-bar + |H|^2 / S-bar].
double blurred_loglik(const MaternParams& theta, const LikelihoodContext& ctx);

/// Exact gradient of blurred_loglik in (sigma2, nu, rho).
Eigen::Vector3d blurred_score(const MaternParams& theta,
                              const LikelihoodContext& ctx);

/// Gram matrix (1/MN) sum_mask m-bar m-bar^T; positive semi-definite.
Eigen::Matrix3d blurred_fisher(const MaternParams& theta,
                               const LikelihoodContext& ctx);

/// Large-sample counterparts that ignore blurring, using S(|k|) directly.
double unblurred_loglik(const MaternParams& theta,
                        const LikelihoodContext& ctx);
Eigen::Vector3d unblurred_score(const MaternParams& theta,
                                const LikelihoodContext& ctx);
Eigen::Matrix3d unblurred_fisher(const MaternParams& theta,
                                 const LikelihoodContext& ctx);
Eigen::Matrix3d unblurred_hessian(const MaternParams& theta,
                                  const LikelihoodContext& ctx);

}  // namespace whittle

#endif
