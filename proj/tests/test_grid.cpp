#include <doctest.h>

#include <cmath>
#include <random>

#include "whittle/grid.hpp"

using namespace whittle;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::ArrayXXd brute_force_acf(const Window& w) {
  const Eigen::Index m = w.spec.m, n = w.spec.n;
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(2 * n - 1, 2 * m - 1);
  for (Eigen::Index uy = -(n - 1); uy <= n - 1; ++uy)
    for (Eigen::Index ux = -(m - 1); ux <= m - 1; ++ux) {
      double acc = 0.0;
      for (Eigen::Index y = 0; y < n; ++y)
        for (Eigen::Index x = 0; x < m; ++x) {
          const Eigen::Index y2 = y + uy, x2 = x + ux;
          if (y2 < 0 || y2 >= n || x2 < 0 || x2 >= m) continue;
          acc += w.values(y2, x2) * w.values(y, x);
        }
      out(uy + n - 1, ux + m - 1) = acc;
    }
  return out;
}
}  // namespace

TEST_CASE("wavenumber grids") {
  const GridSpec two{2, 2, 1.0, 1.0};
  const Eigen::ArrayXd k2 = wavenumbers_x(two);
  CHECK(k2[0] == doctest::Approx(-kPi));
  CHECK(k2[1] == doctest::Approx(0.0));

  const GridSpec three{3, 3, 1.0, 1.0};
  const Eigen::ArrayXd k3 = wavenumbers_x(three);
  CHECK(k3[0] == doctest::Approx(-2.0 * kPi / 3.0));
  CHECK(k3[1] == doctest::Approx(0.0));
  CHECK(k3[2] == doctest::Approx(2.0 * kPi / 3.0));

  const GridSpec spec{4, 6, 10.0, 2.5};
  const Eigen::ArrayXXd mag = wavenumber_magnitude(spec);
  CHECK(mag(3, 2) == doctest::Approx(0.0));  // zero frequency at (n/2, m/2)
  CHECK(mag(3, 0) == doctest::Approx(2.0 * kPi / (4 * 10.0) * 2));
  CHECK(mag(0, 2) == doctest::Approx(2.0 * kPi / (6 * 2.5) * 3));
}

TEST_CASE("cosine-squared taper shape and normalization") {
  const GridSpec spec{64, 64, 1.0, 1.0};
  const Window w = cosine_squared_taper(spec, 0.10);
  CHECK((w.values * w.values).sum() ==
        doctest::Approx(static_cast<double>(spec.size())).epsilon(1e-12));
  // ceil(0.10 * 64) = 7 ramp samples on each side.
  const Eigen::Index mid = 32;
  for (int i = 0; i < 6; ++i) CHECK(w.values(mid, i) < w.values(mid, i + 1));
  CHECK(w.values(mid, 7) == doctest::Approx(w.values(mid, 8)));
  CHECK(w.values(mid, 0) ==
        doctest::Approx(w.values(mid, 63)));  // symmetric ends
  CHECK((w.values >= 0.0).all());

  const Window flat = cosine_squared_taper(spec, 0.0);
  CHECK((flat.values == 1.0).all());
  CHECK_THROWS(cosine_squared_taper(spec, 0.5));
}

TEST_CASE("unit-window autocorrelation is the triangular product") {
  const GridSpec spec{5, 4, 1.0, 1.0};
  const Eigen::ArrayXXd acf = window_autocorrelation(unit_window(spec));
  for (Eigen::Index uy = -(spec.n - 1); uy <= spec.n - 1; ++uy)
    for (Eigen::Index ux = -(spec.m - 1); ux <= spec.m - 1; ++ux) {
      const double expected = static_cast<double>(spec.m - std::abs(ux)) *
                              static_cast<double>(spec.n - std::abs(uy));
      CHECK(acf(uy + spec.n - 1, ux + spec.m - 1) ==
            doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("autocorrelation of arbitrary windows matches brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec spec{6, 7, 1.0, 1.0};
  Eigen::ArrayXXd vals(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) vals(j, i) = u(rng);
  const Window w = custom_window(spec, vals);
  const Eigen::ArrayXXd fast = window_autocorrelation(w);
  const Eigen::ArrayXXd slow = brute_force_acf(w);
  CHECK((fast - slow).abs().maxCoeff() < 1e-10);
  // Zero lag carries the window energy, equal to MN by normalization.
  CHECK(fast(spec.n - 1, spec.m - 1) ==
        doctest::Approx(static_cast<double>(spec.size())).epsilon(1e-12));
}

TEST_CASE("detrending") {
  const GridSpec spec{8, 9, 2.0, 3.0};
  Eigen::ArrayXXd planar(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      planar(j, i) = 4.0 + 0.7 * i * spec.dx - 1.3 * j * spec.dy;

  CHECK((detrend(planar, spec, DetrendMode::none) == planar).all());
  CHECK(std::abs(detrend(planar, spec, DetrendMode::mean).mean()) < 1e-12);
  CHECK(detrend(planar, spec, DetrendMode::plane).abs().maxCoeff() < 1e-10);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  Eigen::ArrayXXd noisy = planar;
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) noisy(j, i) += gauss(rng);
  const Eigen::ArrayXXd res = detrend(noisy, spec, DetrendMode::plane);
  CHECK(std::abs(res.mean()) < 1e-10);  // residuals orthogonal to the trend
}

TEST_CASE("winsorizing clamps to interpolated percentiles") {
  Eigen::ArrayXXd field(1, 5);
  field << 1.0, 2.0, 3.0, 4.0, 100.0;
  const Eigen::ArrayXXd clipped = winsorize(field, 0.0, 75.0);
  CHECK(clipped.maxCoeff() == doctest::Approx(4.0));  // 75th pct of 5 values
  CHECK(clipped.minCoeff() == doctest::Approx(1.0));
  CHECK_THROWS(winsorize(field, 60.0, 40.0));

  // Interior values pass through untouched.
  CHECK(clipped(0, 1) == doctest::Approx(2.0));
  CHECK(clipped(0, 2) == doctest::Approx(3.0));
}
