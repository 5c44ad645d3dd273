#ifndef WHITTLE_SIMULATE_HPP
#define WHITTLE_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "whittle/grid.hpp"
#include "whittle/matern.hpp"

namespace whittle {

struct SimConfig {
  enum class Method { spectral, circulant };
  enum class EmbeddingPolicy { error_on_negative, clip_eigenvalues };

  Method method = Method::spectral;
  int oversample = 4;  // spectral method grid inflation per axis
  std::uint64_t seed = 0;
  EmbeddingPolicy policy = EmbeddingPolicy::error_on_negative;
  /// Relative eigenvalue tolerance: lambda_min >= -tol * lambda_max passes.
  double eigen_tolerance = 1e-9;

  bool valid() const { return oversample >= 1 && eigen_tolerance >= 0.0; }
};

struct FieldSample {
  Eigen::ArrayXXd values;  // n rows (y) by m cols (x)
  std::uint64_t seed = 0;
  int embedding_factor = 0;    // circulant padding multiple actually used
  double clipped_mass = 0.0;   // |clipped eigenvalues| / total, if clipping
};

/// Deterministic 64-bit stream key from (master seed, replicate, purpose);
/// distinct inputs give statistically independent generator seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                          std::uint64_t purpose);

/// Draw a real Gaussian field from the square root of the blurred density on
/// an `oversample`-times larger grid (unit window), keeping the central crop.
FieldSample simulate_spectral(const MaternParams& theta, const GridSpec& spec,
                              const SimConfig& config);

/// Exact Gaussian simulation by circulant embedding of the covariance on a
/// doubled periodic grid; padding doubles again (up to 16x) while the
/// embedded spectrum has negative eigenvalues, then the policy applies.
FieldSample simulate_circulant(const MaternParams& theta, const GridSpec& spec,
                               const SimConfig& config);

FieldSample simulate(const MaternParams& theta, const GridSpec& spec,
                     const SimConfig& config);

/// R independent replicates with per-replicate derived seeds; the expensive
/// model-dependent spectra are computed once and shared.
std::vector<FieldSample> simulate_batch(const MaternParams& theta,
                                        const GridSpec& spec,
                                        const SimConfig& config,
                                        Eigen::Index R);

}  // namespace whittle

#endif
