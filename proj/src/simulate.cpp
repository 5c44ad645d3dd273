#include "whittle/simulate.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "whittle/fft.hpp"
#include "whittle/spectral.hpp"

namespace whittle {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_valid(const SimConfig& c) {
  if (!c.valid())
    throw std::invalid_argument("SimConfig: oversample >= 1, tolerance >= 0");
}

Eigen::ArrayXXd standard_normals(Eigen::Index rows, Eigen::Index cols,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::ArrayXXd z(rows, cols);
  for (Eigen::Index j = 0; j < rows; ++j)
    for (Eigen::Index i = 0; i < cols; ++i) z(j, i) = gauss(rng);
  return z;
}

struct SpectralPlan {
  GridSpec ospec;
  Eigen::ArrayXXd sqrt_std;  // sqrt of blurred density, standard DFT layout
  double scale = 0.0;
};

SpectralPlan make_spectral_plan(const MaternParams& theta, const GridSpec& spec,
                                const SimConfig& config) {
  SpectralPlan plan;
  plan.ospec = GridSpec{spec.m * config.oversample, spec.n * config.oversample,
                        spec.dx, spec.dy};
  const Eigen::ArrayXXd sbar = blurred_sdf(theta, unit_window(plan.ospec));
  plan.sqrt_std = fft::ifftshift(sbar.max(0.0).sqrt().eval());
  plan.scale = 2.0 * kPi /
               std::sqrt(static_cast<double>(plan.ospec.size()) * spec.dx *
                         spec.dy);
  return plan;
}

FieldSample draw_spectral(const SpectralPlan& plan, const GridSpec& spec,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index no = plan.ospec.n, mo = plan.ospec.m;
  const Eigen::ArrayXXd z = standard_normals(no, mo, rng);
  const Eigen::ArrayXXcd coeffs =
      plan.sqrt_std * fft::forward(z.cast<std::complex<double>>());
  // The white-noise transform carries variance MoNo per coefficient.
  const Eigen::ArrayXXd big =
      fft::inverse(coeffs).real() *
      (plan.scale / std::sqrt(static_cast<double>(no * mo)));
  FieldSample out;
  out.seed = seed;
  out.values = big.block((no - spec.n) / 2, (mo - spec.m) / 2, spec.n, spec.m);
  return out;
}

struct CirculantPlan {
  Eigen::Index P = 0, Q = 0;  // embedding rows, cols
  int factor = 0;
  double clipped_mass = 0.0;
  Eigen::ArrayXXd amplitude;  // sqrt(lambda / PQ)
};

CirculantPlan make_circulant_plan(const MaternParams& theta,
                                  const GridSpec& spec,
                                  const SimConfig& config) {
  for (int factor = 2; factor <= 16; factor *= 2) {
    const Eigen::Index P = factor * spec.n, Q = factor * spec.m;
    Eigen::ArrayXXcd circ(P, Q);
    for (Eigen::Index j = 0; j < P; ++j)
      for (Eigen::Index i = 0; i < Q; ++i) {
        const double rx = static_cast<double>(std::min(i, Q - i)) * spec.dx;
        const double ry = static_cast<double>(std::min(j, P - j)) * spec.dy;
        circ(j, i) = covariance(theta, std::hypot(rx, ry));
      }
    Eigen::ArrayXXd lambda = fft::forward(circ).real();
    const double lo = lambda.minCoeff(), hi = lambda.maxCoeff();
    const bool ok = lo >= -config.eigen_tolerance * hi;
    if (!ok && factor < 16) continue;
    CirculantPlan plan;
    plan.P = P;
    plan.Q = Q;
    plan.factor = factor;
    if (!ok) {
      if (config.policy == SimConfig::EmbeddingPolicy::error_on_negative)
        throw std::runtime_error(
            "simulate_circulant: embedding not nonnegative-definite at 16x "
            "padding; rerun with the clip-eigenvalues policy");
      plan.clipped_mass = -lambda.min(0.0).sum() / lambda.abs().sum();
      lambda = lambda.max(0.0);
    }
    plan.amplitude = (lambda.max(0.0) / static_cast<double>(P * Q)).sqrt();
    return plan;
  }
  throw std::logic_error("simulate_circulant: unreachable");
}

FieldSample draw_circulant(const CirculantPlan& plan, const GridSpec& spec,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::ArrayXXd u = standard_normals(plan.P, plan.Q, rng);
  const Eigen::ArrayXXd v = standard_normals(plan.P, plan.Q, rng);
  const Eigen::ArrayXXcd noise =
      plan.amplitude *
      (u.cast<std::complex<double>>() +
       std::complex<double>(0.0, 1.0) * v.cast<std::complex<double>>());
  const Eigen::ArrayXXd big = fft::forward(noise).real();
  FieldSample out;
  out.seed = seed;
  out.embedding_factor = plan.factor;
  out.clipped_mass = plan.clipped_mass;
  out.values = big.topLeftCorner(spec.n, spec.m);
  return out;
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                          std::uint64_t purpose) {
  std::uint64_t x = master;
  auto mix = [&x](std::uint64_t v) {
    x += 0x9E3779B97F4A7C15ull;
    x ^= v;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    x ^= x >> 31;
  };
  mix(replicate);
  mix(purpose);
  mix(0);
  return x;
}

FieldSample simulate_spectral(const MaternParams& theta, const GridSpec& spec,
                              const SimConfig& config) {
  theta.require_valid();
  spec.require_valid();
  require_valid(config);
  return draw_spectral(make_spectral_plan(theta, spec, config), spec,
                       config.seed);
}

FieldSample simulate_circulant(const MaternParams& theta, const GridSpec& spec,
                               const SimConfig& config) {
  theta.require_valid();
  spec.require_valid();
  require_valid(config);
  return draw_circulant(make_circulant_plan(theta, spec, config), spec,
                        config.seed);
}

FieldSample simulate(const MaternParams& theta, const GridSpec& spec,
                     const SimConfig& config) {
  return config.method == SimConfig::Method::spectral
             ? simulate_spectral(theta, spec, config)
             : simulate_circulant(theta, spec, config);
}

std::vector<FieldSample> simulate_batch(const MaternParams& theta,
                                        const GridSpec& spec,
                                        const SimConfig& config,
                                        Eigen::Index R) {
  theta.require_valid();
  spec.require_valid();
  require_valid(config);
  if (R < 1) throw std::invalid_argument("simulate_batch: R >= 1");
  std::vector<FieldSample> out;
  out.reserve(static_cast<size_t>(R));
  if (config.method == SimConfig::Method::spectral) {
    const SpectralPlan plan = make_spectral_plan(theta, spec, config);
    for (Eigen::Index r = 0; r < R; ++r)
      out.push_back(draw_spectral(
          plan, spec, derive_seed(config.seed, static_cast<std::uint64_t>(r),
                                  1)));
  } else {
    const CirculantPlan plan = make_circulant_plan(theta, spec, config);
    for (Eigen::Index r = 0; r < R; ++r)
      out.push_back(draw_circulant(
          plan, spec, derive_seed(config.seed, static_cast<std::uint64_t>(r),
                                  1)));
  }
  return out;
}

}  // namespace whittle
