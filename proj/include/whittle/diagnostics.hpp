#ifndef WHITTLE_DIAGNOSTICS_HPP
#define WHITTLE_DIAGNOSTICS_HPP

#include <Eigen/Dense>

#include "whittle/likelihood.hpp"

namespace whittle {

/// Model-appropriateness report built on the residual ratio X = |H|^2 / S-bar,
/// which is chi-squared_2 / 2 (unit-mean exponential) under a correct model.
struct ResidualReport {
  Eigen::ArrayXXd x;        // residual map, centered wavenumber layout
  Eigen::Index count = 0;   // wavenumbers entering the test
  double mean_x = 0.0;
  double var_x = 0.0;
  double s2x = 0.0;     // mean-squared deviation of X from 1
  double null_sd = 0.0; // sqrt(16 / count): asymptotic SD of s2x for real
                        // data, where X(-k) = X(k) halves the independent count
  double z = 0.0;
  double p_value = 1.0;  // two-sided by default
  double level = 0.95;
  bool reject = false;
  bool one_sided = false;
  bool normal_guard_ok = true;  // count >= 100
};

/// Residual map at theta for the context's data.
Eigen::ArrayXXd residuals(const MaternParams& theta,
                          const LikelihoodContext& ctx);

/// The s2x test: s2x = mean (X-1)^2, asymptotically N(1, 8/count) under the
/// null; two-sided decision at `level` (one-sided exceedance optional).
ResidualReport model_test(const Eigen::ArrayXXd& x, const MaskArray& mask,
                          double level = 0.95, bool one_sided = false);
ResidualReport model_test(const MaternParams& theta,
                          const LikelihoodContext& ctx, double level = 0.95,
                          bool one_sided = false);

/// Demeaned mean square, 1/MN normalization.
double sample_variance(const Eigen::ArrayXXd& field);

enum class BiasMethod { full_covariance, blurred_likelihood, full_likelihood };

/// Predicted expectation of the sample variance under theta on the given
/// grid; three predictor variants of decreasing exactness.
double sample_variance_bias(const MaternParams& theta, const GridSpec& spec,
                            BiasMethod method);

enum class ReferenceDistribution { chi2_2, normal };

struct HistogramQQ {
  Eigen::ArrayX2d histogram;  // bin center, empirical density
  Eigen::ArrayX2d qq;         // theoretical quantile, order statistic
};

/// Plot-ready binned density and quantile pairs against the reference;
/// plotting positions (i - 0.5) / n. For chi2_2 the samples are compared as
/// 2X against the two-degree chi-squared law.
HistogramQQ distribution_products(const Eigen::VectorXd& samples,
                                  ReferenceDistribution reference,
                                  double mu = 0.0, double sigma2 = 1.0,
                                  Eigen::Index bins = 40);

}  // namespace whittle

#endif
