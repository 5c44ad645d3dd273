#include "whittle/uncertainty.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "whittle/fft.hpp"
#include "whittle/simulate.hpp"
#include "whittle/spectral.hpp"

namespace whittle {

namespace {
constexpr double kPi = 3.14159265358979323846;
using Complex = std::complex<double>;

double dft_norm(const GridSpec& spec) {
  return 1.0 / (2.0 * kPi) *
         std::sqrt(spec.dx * spec.dy / static_cast<double>(spec.size()));
}

// Full (2n-1) x (2m-1) covariance lag table from the quarter-plane values.
Eigen::ArrayXXd covariance_lags(const MaternParams& theta,
                                const GridSpec& spec) {
  const Eigen::Index m = spec.m, n = spec.n;
  Eigen::ArrayXXd quarter(n, m);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      quarter(j, i) = covariance(theta, std::hypot(i * spec.dx, j * spec.dy));
  Eigen::ArrayXXd full(2 * n - 1, 2 * m - 1);
  for (Eigen::Index j = -(n - 1); j <= n - 1; ++j)
    for (Eigen::Index i = -(m - 1); i <= m - 1; ++i)
      full(j + n - 1, i + m - 1) = quarter(std::abs(j), std::abs(i));
  return full;
}

// Masked periodogram coefficients of the score, m-bar_t / S-bar, in
// standard DFT layout.
struct ScoreWeights {
  std::array<Eigen::ArrayXXd, 3> u;
};

ScoreWeights score_weights(const MaternParams& theta, const Window& w,
                           const std::optional<MaskArray>& mask) {
  const BlurredSdfGradient blur =
      blurred_sdf_gradient(theta, window_autocorrelation(w), w.spec);
  const MaskArray mk = mask ? *mask : full_mask(w.spec);
  if (mk.rows() != w.spec.n || mk.cols() != w.spec.m)
    throw std::invalid_argument("score covariance: mask shape mismatch");
  ScoreWeights sw;
  for (int t = 0; t < 3; ++t) {
    Eigen::ArrayXXd centered = blur.grad[t] / (blur.value * blur.value);
    for (Eigen::Index j = 0; j < w.spec.n; ++j)
      for (Eigen::Index i = 0; i < w.spec.m; ++i)
        if (!mk(j, i)) centered(j, i) = 0.0;
    sw.u[t] = fft::ifftshift(centered);
  }
  return sw;
}

Eigen::Matrix3d symmetrized(const Eigen::Matrix3d& a) {
  return 0.5 * (a + a.transpose());
}
}  // namespace

PeriodogramCovariance periodogram_covariance_dense(const MaternParams& theta,
                                                   const Window& w,
                                                   Eigen::Index guard) {
  theta.require_valid();
  const GridSpec& spec = w.spec;
  const Eigen::Index mn = spec.size();
  if (mn > guard)
    throw std::runtime_error(
        "periodogram_covariance_dense: grid exceeds the dense-method size "
        "guard; use the per-diagonal method");
  const Eigen::ArrayXd kx = wavenumbers_x(spec);
  const Eigen::ArrayXd ky = wavenumbers_y(spec);
  const double c = dft_norm(spec);

  Eigen::MatrixXcd q(mn, mn);  // rows: wavenumbers, cols: grid points
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) {
      const Eigen::Index kidx = j * spec.m + i;
      for (Eigen::Index y = 0; y < spec.n; ++y)
        for (Eigen::Index x = 0; x < spec.m; ++x)
          q(kidx, y * spec.m + x) =
              c * std::exp(Complex(0.0, -(kx[i] * x * spec.dx +
                                          ky[j] * y * spec.dy)));
    }

  Eigen::MatrixXd cw(mn, mn);  // w(x) w(x') C(x - x')
  for (Eigen::Index y = 0; y < spec.n; ++y)
    for (Eigen::Index x = 0; x < spec.m; ++x)
      for (Eigen::Index y2 = 0; y2 < spec.n; ++y2)
        for (Eigen::Index x2 = 0; x2 < spec.m; ++x2)
          cw(y * spec.m + x, y2 * spec.m + x2) =
              w.values(y, x) * w.values(y2, x2) *
              covariance(theta, std::hypot((x - x2) * spec.dx,
                                           (y - y2) * spec.dy));

  const Eigen::MatrixXcd qc = q * cw;
  PeriodogramCovariance out;
  out.hermitian = (qc * q.adjoint()).cwiseAbs2();
  out.pseudo = (qc * q.transpose()).cwiseAbs2();
  return out;
}

ScoreCovariance score_cov_dft_matrix(const MaternParams& theta0,
                                     const Window& w,
                                     std::optional<MaskArray> mask,
                                     Eigen::Index guard) {
  const GridSpec& spec = w.spec;
  if (spec.size() > guard)
    throw std::runtime_error(
        "score_cov_dft_matrix: grid exceeds the dense-method size guard; use "
        "the per-diagonal method");
  const PeriodogramCovariance pc = periodogram_covariance_dense(theta0, w,
                                                                guard);
  const BlurredSdfGradient blur =
      blurred_sdf_gradient(theta0, window_autocorrelation(w), spec);
  const MaskArray mk = mask ? *mask : full_mask(spec);
  const Eigen::Index mn = spec.size();

  Eigen::MatrixXd u(mn, 3);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      for (int t = 0; t < 3; ++t)
        u(j * spec.m + i, t) =
            mk(j, i) ? blur.grad[t](j, i) /
                           (blur.value(j, i) * blur.value(j, i))
                     : 0.0;

  ScoreCovariance out;
  out.method = ScoreCovMethod::dft_matrix;
  out.effort = mn;
  const double inv = 1.0 / static_cast<double>(mn);
  out.value = symmetrized(inv * inv * u.transpose() * pc.total() * u);
  return out;
}

ScoreCovariance score_cov_per_diagonal(const MaternParams& theta0,
                                       const Window& w,
                                       std::optional<MaskArray> mask,
                                       double truncation) {
  theta0.require_valid();
  if (!(truncation >= 0.0 && truncation < 1.0))
    throw std::invalid_argument("score_cov_per_diagonal: truncation in [0,1)");
  const GridSpec& spec = w.spec;
  const Eigen::Index m = spec.m, n = spec.n;
  const Eigen::Index P = 2 * n, Q = 2 * m;
  const ScoreWeights sw = score_weights(theta0, w, mask);
  const Eigen::ArrayXXd clags = covariance_lags(theta0, spec);
  const double c2 = dft_norm(spec) * dft_norm(spec);

  Eigen::ArrayXXcd wpad = Eigen::ArrayXXcd::Zero(P, Q);
  wpad.topLeftCorner(n, m) = w.values.cast<Complex>();
  const Eigen::ArrayXXcd fw = fft::forward(wpad);

  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  double zero_offset_mass = 0.0;
  Eigen::Index visited = 0;

  for (Eigen::Index q0 = 0; q0 < n; ++q0)
    for (Eigen::Index p0 = 0; p0 < m; ++p0) {
      // Cross-correlate the window against itself carrying the offset phase.
      Eigen::ArrayXXcd gpad = Eigen::ArrayXXcd::Zero(P, Q);
      for (Eigen::Index y = 0; y < n; ++y)
        for (Eigen::Index x = 0; x < m; ++x)
          gpad(y, x) =
              w.values(y, x) *
              std::exp(Complex(
                  0.0, 2.0 * kPi * (static_cast<double>(p0 * x) / m +
                                    static_cast<double>(q0 * y) / n)));
      const Eigen::ArrayXXcd cross =
          fft::inverse((fw * fft::forward(gpad).conjugate()).eval()) /
          static_cast<double>(P * Q);

      Eigen::ArrayXXcd wlag(2 * n - 1, 2 * m - 1);
      for (Eigen::Index uy = -(n - 1); uy <= n - 1; ++uy)
        for (Eigen::Index ux = -(m - 1); ux <= m - 1; ++ux)
          wlag(uy + n - 1, ux + m - 1) = cross((uy + P) % P, (ux + Q) % Q);

      const double mass = wlag.abs().sum();
      if (p0 == 0 && q0 == 0) zero_offset_mass = mass;
      if (mass < truncation * zero_offset_mass) continue;
      ++visited;

      const Eigen::ArrayXXcd lag = wlag * clags.cast<Complex>() * c2;
      Eigen::ArrayXXcd folded = Eigen::ArrayXXcd::Zero(n, m);
      for (Eigen::Index uy = -(n - 1); uy <= n - 1; ++uy)
        for (Eigen::Index ux = -(m - 1); ux <= m - 1; ++ux)
          folded((uy + n) % n, (ux + m) % m) += lag(uy + n - 1, ux + m - 1);
      const Eigen::ArrayXXd cov_sq = fft::forward(folded).abs2();

      // Hermitian pairing k' = k - offset; pseudo pairing k'' = offset - k.
      for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = 0; a < m; ++a) {
          const double h2 = cov_sq(b, a);
          if (h2 == 0.0) continue;
          const Eigen::Index bh = (b - q0 + n) % n, ah = (a - p0 + m) % m;
          const Eigen::Index bp = (q0 - b + n) % n, ap = (p0 - a + m) % m;
          for (int t = 0; t < 3; ++t) {
            const double ut = sw.u[t](b, a);
            if (ut == 0.0) continue;
            for (int s = 0; s < 3; ++s)
              acc(t, s) +=
                  ut * h2 * (sw.u[s](bh, ah) + sw.u[s](bp, ap));
          }
        }
    }

  ScoreCovariance out;
  out.method = ScoreCovMethod::per_diagonal;
  out.effort = visited;
  const double inv = 1.0 / static_cast<double>(spec.size());
  out.value = symmetrized(inv * inv * acc);
  return out;
}

ScoreCovariance score_cov_sampling(const MaternParams& theta0, const Window& w,
                                   Eigen::Index R, std::uint64_t seed,
                                   std::optional<MaskArray> mask) {
  theta0.require_valid();
  if (R < 50)
    throw std::invalid_argument("score_cov_sampling: need R >= 50 replicates");
  const GridSpec& spec = w.spec;
  const BlurredSdfGradient blur =
      blurred_sdf_gradient(theta0, window_autocorrelation(w), spec);
  const MaskArray mk = mask ? *mask : full_mask(spec);

  SimConfig sim;
  sim.method = SimConfig::Method::circulant;
  sim.policy = SimConfig::EmbeddingPolicy::clip_eigenvalues;
  sim.seed = seed;

  const std::vector<FieldSample> fields = simulate_batch(theta0, spec, sim, R);
  const double inv = 1.0 / static_cast<double>(spec.size());

  Eigen::MatrixXd scores(R, 3);
  for (Eigen::Index r = 0; r < R; ++r) {
    const Eigen::ArrayXXd pgram =
        periodogram(windowed_dft(fields[static_cast<size_t>(r)].values, w));
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (Eigen::Index j = 0; j < spec.n; ++j)
      for (Eigen::Index i = 0; i < spec.m; ++i) {
        if (!mk(j, i)) continue;
        const double bracket = 1.0 - pgram(j, i) / blur.value(j, i);
        for (int t = 0; t < 3; ++t)
          g[t] += blur.grad[t](j, i) / blur.value(j, i) * bracket;
      }
    scores.row(r) = (-inv * g).transpose();
  }

  const Eigen::RowVector3d mean = scores.colwise().mean();
  const Eigen::MatrixXd centered = scores.rowwise() - mean;
  ScoreCovariance out;
  out.method = ScoreCovMethod::sampling;
  out.effort = R;
  out.value = symmetrized(centered.transpose() * centered /
                          static_cast<double>(R - 1));
  return out;
}

Eigen::Matrix3d sandwich_covariance(const Eigen::Matrix3d& fisher,
                                    const ScoreCovariance& score_cov) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      fisher, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw std::runtime_error(
        "sandwich_covariance: Fisher matrix singular, condition number " +
        std::to_string(smin > 0.0 ? smax / smin
                                  : std::numeric_limits<double>::infinity()));
  const Eigen::Matrix3d finv = fisher.inverse();
  return symmetrized(finv * score_cov.value * finv);
}

Eigen::Matrix3d correlation_matrix(const Eigen::Matrix3d& cov) {
  Eigen::Vector3d d;
  for (int i = 0; i < 3; ++i) {
    if (!(cov(i, i) > 0.0))
      throw std::domain_error(
          "correlation_matrix: nonpositive diagonal entry");
    d[i] = 1.0 / std::sqrt(cov(i, i));
  }
  return d.asDiagonal() * cov * d.asDiagonal();
}

}  // namespace whittle
