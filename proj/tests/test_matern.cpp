#include <doctest.h>

#include <cmath>
#include <random>

#include "whittle/matern.hpp"

using namespace whittle;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Frozen 40-digit arbitrary-precision references for the closed forms.
struct BesselCase {
  double nu, z, value;
};
constexpr BesselCase kBesselCases[] = {
    {2.5, 4.0, 0.022237897617178103528},
    {0.5, 1.0, 0.46106850444789455844},
    {1.7, 0.3, 11.098113534997123993},
    {3.2, 7.5, 0.00047045190337948885016},
    {10.3, 2.1, 192650.20401880284391},
    {0.0, 1.5, 0.21380556264752573672},
    {1.0, 0.5, 1.6564411200033008937},
    {2.0, 3.0, 0.061510458471742037657},
    {5.0, 0.1, 38376009.99583591757},
};
}  // namespace

TEST_CASE("bessel_k against frozen references") {
  for (const auto& c : kBesselCases)
    CHECK(bessel_k(c.nu, c.z) ==
          doctest::Approx(c.value).epsilon(1e-12));
}

TEST_CASE("bessel_k against the standard library") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unu(0.05, 8.0), uz(0.05, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double nu = unu(rng), z = uz(rng);
    const double ours = bessel_k(nu, z);
    const double ref = std::cyl_bessel_k(nu, z);
    CHECK(ours == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("spectral density closed forms") {
  CHECK(spectral_density({1.0, 0.5, 2.0}, 1.0) ==
        doctest::Approx(0.033263013843652443792).epsilon(1e-13));
  CHECK(spectral_density({2.0, 2.5, 20.0}, 0.05) ==
        doctest::Approx(56.822141411055586909).epsilon(1e-13));

  // S(0) = sigma2 pi rho^2 / 4 for random parameters.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    const double expected = p.sigma2 * kPi * p.rho * p.rho / 4.0;
    CHECK(spectral_density(p, 0.0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("covariance closed forms and limits") {
  CHECK(covariance({1.0, 1.0, 2.0}, 3.0) ==
        doctest::Approx(0.62106375356871780983).epsilon(1e-12));
  CHECK(covariance({1.0, 2.5, 20.0}, 35.0) ==
        doctest::Approx(0.65206179415175002676).epsilon(1e-12));

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    CHECK(covariance(p, 0.0) == doctest::Approx(p.sigma2).epsilon(1e-12));
  }

  // nu = 1/2 is the exponential family.
  for (double r : {0.1, 1.0, 2.0, 2.0 * kPi, 15.0}) {
    const MaternParams p{1.0, 0.5, 2.0};
    const double z = std::sqrt(2.0) * r / (kPi * p.rho);
    CHECK(covariance(p, r) == doctest::Approx(std::exp(-z)).epsilon(1e-10));
  }
  CHECK(covariance({1.0, 0.5, 2.0}, 2.0 * kPi) ==
        doctest::Approx(0.2431167344342142108).epsilon(1e-10));

  // Correlation drops to about a third of the variance near distance pi rho.
  const MaternParams p{1.0, 1.5, 3.0};
  const double c = covariance(p, kPi * p.rho);
  CHECK(c > 0.25);
  CHECK(c < 0.42);
}

TEST_CASE("cumulative power and its quantiles") {
  const MaternParams p{2.0, 1.3, 4.0};
  CHECK(power_distribution(p, 0.0) == doctest::Approx(0.0));
  CHECK(power_distribution(p, 1e6) == doctest::Approx(p.sigma2).epsilon(1e-6));

  // Midpoint quadrature of 2 pi k S(k) reproduces the closed form.
  const double kmax = 3.0;
  const int steps = 200000;
  double quad = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double k = (i + 0.5) * kmax / steps;
    quad += 2.0 * kPi * k * spectral_density(p, k) * (kmax / steps);
  }
  CHECK(quad == doctest::Approx(power_distribution(p, kmax)).epsilon(1e-6));

  for (double alpha : {0.1, 0.5, 0.9}) {
    const double k = quantile_wavenumber(p, alpha);
    CHECK(power_distribution(p, k) ==
          doctest::Approx(alpha * p.sigma2).epsilon(1e-10));
  }
}

TEST_CASE("logarithmic spectral gradient matches finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.3, 4.0), uk(0.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    const double k = uk(rng);
    const Eigen::Vector3d m = log_spectral_gradient(p, k);
    const double h = 1e-6;
    auto logs = [&](const MaternParams& q) {
      return std::log(spectral_density(q, k));
    };
    const Eigen::Vector3d fd{
        (logs({p.sigma2 + h, p.nu, p.rho}) -
         logs({p.sigma2 - h, p.nu, p.rho})) /
            (2 * h),
        (logs({p.sigma2, p.nu + h, p.rho}) -
         logs({p.sigma2, p.nu - h, p.rho})) /
            (2 * h),
        (logs({p.sigma2, p.nu, p.rho + h}) -
         logs({p.sigma2, p.nu, p.rho - h})) /
            (2 * h)};
    for (int t = 0; t < 3; ++t)
      CHECK(m[t] == doctest::Approx(fd[t]).epsilon(1e-5));
  }
  // At k = 0 the density is sigma2 pi rho^2 / 4: the smoothness entry
  // vanishes and the range entry is 2 / rho.
  const Eigen::Vector3d m0 = log_spectral_gradient({1.0, 2.0, 3.0}, 0.0);
  CHECK(m0[0] == doctest::Approx(1.0));
  CHECK(m0[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m0[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gradient-of-gradient entries match finite differences") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.4, 3.0), uk(0.05, 2.5);
  for (int i = 0; i < 20; ++i) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    const double k = uk(rng);
    const Eigen::Matrix3d d = spectral_gradient_hessian_terms(p, k);
    const double h = 1e-6;
    for (int row = 0; row < 3; ++row) {
      MaternParams pp = p, pm = p;
      double* fieldp = row == 0 ? &pp.sigma2 : row == 1 ? &pp.nu : &pp.rho;
      double* fieldm = row == 0 ? &pm.sigma2 : row == 1 ? &pm.nu : &pm.rho;
      *fieldp += h;
      *fieldm -= h;
      const Eigen::Vector3d fd =
          (log_spectral_gradient(pp, k) - log_spectral_gradient(pm, k)) /
          (2 * h);
      for (int col = 0; col < 3; ++col)
        CHECK(d(row, col) ==
              doctest::Approx(fd[col]).epsilon(2e-5).scale(1.0));
    }
  }
}

TEST_CASE("covariance gradient against frozen references") {
  struct Case {
    MaternParams p;
    double r, dnu, drho;
  };
  const Case cases[] = {
      {{1.0, 2.0, 2.0}, 3.0, 0.046433318297355862873, 0.21261489684711787838},
      {{1.0, 1.0, 2.0}, 3.0, 0.14376105366669571845, 0.20482281293370233498},
      {{1.5, 0.8, 2.5}, 1.2, 0.25644871138853925159, 0.08670121491775448872},
      {{1.0, 2.5, 20.0}, 35.0, 0.031153484759027898996,
       0.024533200452053630947},
      {{1.0, 3.0, 0.7}, 0.9, 0.019498701688876199028, 0.48982856842732565526},
  };
  for (const auto& c : cases) {
    const Eigen::Vector3d g = covariance_gradient(c.p, c.r);
    CHECK(g[0] ==
          doctest::Approx(covariance(c.p, c.r) / c.p.sigma2).epsilon(1e-11));
    CHECK(g[1] == doctest::Approx(c.dnu).epsilon(1e-7));
    CHECK(g[2] == doctest::Approx(c.drho).epsilon(1e-10));
  }
  const Eigen::Vector3d g0 = covariance_gradient({2.0, 1.5, 3.0}, 0.0);
  CHECK(g0[0] == doctest::Approx(1.0));
  CHECK(g0[1] == doctest::Approx(0.0));
  CHECK(g0[2] == doctest::Approx(0.0));
}

TEST_CASE("log-parameter map round trips") {
  const MaternParams p{0.3, 2.2, 17.0};
  const MaternParams q = LogParams::from(p).to_params();
  CHECK(q.sigma2 == doctest::Approx(p.sigma2).epsilon(1e-15));
  CHECK(q.nu == doctest::Approx(p.nu).epsilon(1e-15));
  CHECK(q.rho == doctest::Approx(p.rho).epsilon(1e-15));
  CHECK_FALSE(MaternParams{-1.0, 1.0, 1.0}.valid());
  CHECK_FALSE(MaternParams{1.0, 0.0, 1.0}.valid());
  CHECK_THROWS(MaternParams{1.0, 1.0, -2.0}.require_valid());
}
