#include "whittle/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "whittle/spectral.hpp"
#include "whittle/stats.hpp"

namespace whittle {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::ArrayXXd residuals(const MaternParams& theta,
                          const LikelihoodContext& ctx) {
  theta.require_valid();
  return ctx.data_periodogram() / ctx.blurred(theta)->value;
}

ResidualReport model_test(const Eigen::ArrayXXd& x, const MaskArray& mask,
                          double level, bool one_sided) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw std::invalid_argument("model_test: residual/mask shape mismatch");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("model_test: level in (0,1)");
  ResidualReport rep;
  rep.x = x;
  rep.level = level;
  rep.one_sided = one_sided;
  double sum = 0.0, sumsq = 0.0, dev = 0.0;
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      if (!mask(j, i)) continue;
      ++rep.count;
      sum += x(j, i);
      sumsq += x(j, i) * x(j, i);
      dev += (x(j, i) - 1.0) * (x(j, i) - 1.0);
    }
  if (rep.count == 0) throw std::invalid_argument("model_test: empty mask");
  const double n = static_cast<double>(rep.count);
  rep.mean_x = sum / n;
  rep.var_x = sumsq / n - rep.mean_x * rep.mean_x;
  rep.s2x = dev / n;
  // Real data duplicates each residual at -k, halving the number of
  // independent ordinates; each exponential ordinate contributes variance 8.
  rep.null_sd = std::sqrt(16.0 / n);
  rep.z = (rep.s2x - 1.0) / rep.null_sd;
  rep.p_value = one_sided ? normal_cdf(-rep.z)
                          : 2.0 * normal_cdf(-std::abs(rep.z));
  rep.reject = rep.p_value < 1.0 - level;
  rep.normal_guard_ok = rep.count >= 100;
  return rep;
}

ResidualReport model_test(const MaternParams& theta,
                          const LikelihoodContext& ctx, double level,
                          bool one_sided) {
  return model_test(residuals(theta, ctx), ctx.mask(), level, one_sided);
}

double sample_variance(const Eigen::ArrayXXd& field) {
  if (field.size() == 0)
    throw std::invalid_argument("sample_variance: empty field");
  return (field - field.mean()).square().mean();
}

double sample_variance_bias(const MaternParams& theta, const GridSpec& spec,
                            BiasMethod method) {
  theta.require_valid();
  spec.require_valid();
  const double mn = static_cast<double>(spec.size());
  switch (method) {
    case BiasMethod::full_covariance: {
      // Triangular-weight identity: the double sum over all point pairs
      // collapses to one pass over lags weighted by (M-|ux|)(N-|uy|).
      double acc = 0.0;
      for (Eigen::Index uy = 0; uy < spec.n; ++uy)
        for (Eigen::Index ux = 0; ux < spec.m; ++ux) {
          const double c =
              covariance(theta, std::hypot(ux * spec.dx, uy * spec.dy));
          const double wgt = static_cast<double>(spec.m - ux) *
                             static_cast<double>(spec.n - uy) *
                             (ux > 0 ? 2.0 : 1.0) * (uy > 0 ? 2.0 : 1.0);
          acc += wgt * c;
        }
      return theta.sigma2 - acc / (mn * mn);
    }
    case BiasMethod::blurred_likelihood: {
      const Eigen::ArrayXXd sbar = blurred_sdf(theta, unit_window(spec));
      const double s0 = sbar(spec.n / 2, spec.m / 2);
      return theta.sigma2 -
             4.0 * kPi * kPi * s0 / (mn * spec.dx * spec.dy);
    }
    case BiasMethod::full_likelihood:
      return theta.sigma2 *
             (1.0 - kPi * (kPi * theta.rho) * (kPi * theta.rho) /
                        (mn * spec.dx * spec.dy));
  }
  throw std::logic_error("sample_variance_bias: unknown method");
}

HistogramQQ distribution_products(const Eigen::VectorXd& samples,
                                  ReferenceDistribution reference, double mu,
                                  double sigma2, Eigen::Index bins) {
  const Eigen::Index n = samples.size();
  if (n == 0)
    throw std::invalid_argument("distribution_products: empty samples");
  if (bins < 1)
    throw std::invalid_argument("distribution_products: bins >= 1");
  std::vector<double> sorted(samples.data(), samples.data() + n);
  std::sort(sorted.begin(), sorted.end());

  HistogramQQ out;
  out.qq.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double q = reference == ReferenceDistribution::chi2_2
                         ? -std::log1p(-p)  // chi2_2 / 2, unit-mean exponential
                         : mu + std::sqrt(sigma2) * normal_quantile(p);
    out.qq(i, 0) = q;
    out.qq(i, 1) = sorted[static_cast<size_t>(i)];
  }

  const double lo = sorted.front(), hi = sorted.back();
  const double width = (hi > lo ? hi - lo : 1.0) / static_cast<double>(bins);
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(bins);
  for (double v : sorted) {
    Eigen::Index b = static_cast<Eigen::Index>((v - lo) / width);
    counts[std::clamp<Eigen::Index>(b, 0, bins - 1)] += 1.0;
  }
  out.histogram.resize(bins, 2);
  for (Eigen::Index b = 0; b < bins; ++b) {
    out.histogram(b, 0) = lo + (static_cast<double>(b) + 0.5) * width;
    out.histogram(b, 1) = counts[b] / (static_cast<double>(n) * width);
  }
  return out;
}

}  // namespace whittle
