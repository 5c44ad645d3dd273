#include <doctest.h>

#include <cmath>

#include "whittle/spectral.hpp"
#include "whittle/uncertainty.hpp"

using namespace whittle;

TEST_CASE("single-point grid: variance is twice the squared density") {
  const GridSpec spec{1, 1, 1.0, 1.0};
  const Window w = unit_window(spec);
  const MaternParams theta{1.5, 1.0, 2.0};
  const double sbar = blurred_sdf(theta, w)(0, 0);
  const PeriodogramCovariance pc = periodogram_covariance_dense(theta, w);
  CHECK(pc.hermitian(0, 0) == doctest::Approx(sbar * sbar).epsilon(1e-12));
  CHECK(pc.pseudo(0, 0) == doctest::Approx(sbar * sbar).epsilon(1e-12));
  CHECK(pc.total()(0, 0) ==
        doctest::Approx(2.0 * sbar * sbar).epsilon(1e-12));
}

TEST_CASE("periodogram covariance diagonal equals the squared blurred density") {
  const MaternParams theta{1.0, 0.5, 2.0};
  const GridSpec spec{9, 9, 1.0, 1.0};
  const Window w = unit_window(spec);
  const Eigen::ArrayXXd sbar = blurred_sdf(theta, w);
  const PeriodogramCovariance pc = periodogram_covariance_dense(theta, w);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) {
      const Eigen::Index idx = j * spec.m + i;
      CHECK(std::abs(pc.hermitian(idx, idx) - sbar(j, i) * sbar(j, i)) <
            1e-10);
    }
  CHECK((pc.hermitian - pc.hermitian.transpose()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((pc.pseudo - pc.pseudo.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dense and per-diagonal score covariances agree") {
  const MaternParams thetas[] = {
      {1.0, 0.5, 2.0}, {2.0, 1.5, 1.0}, {0.5, 2.5, 3.0}};
  struct Setup {
    GridSpec spec;
    double taper;
  };
  const Setup setups[] = {{{8, 8, 1.0, 1.0}, 0.0},
                          {{9, 9, 1.0, 1.0}, 0.2},
                          {{12, 12, 1.0, 1.0}, 0.0},
                          {{6, 5, 2.0, 1.0}, 0.25},
                          {{12, 11, 1.0, 1.5}, 0.15}};
  for (const auto& setup : setups) {
    const Window w = setup.taper > 0.0
                         ? cosine_squared_taper(setup.spec, setup.taper)
                         : unit_window(setup.spec);
    for (const auto& theta : thetas) {
      const ScoreCovariance dense = score_cov_dft_matrix(theta, w);
      const ScoreCovariance diag = score_cov_per_diagonal(theta, w);
      const double scale = dense.value.cwiseAbs().maxCoeff();
      CHECK((dense.value - diag.value).cwiseAbs().maxCoeff() / scale <
            1e-10);
      CHECK((diag.value - diag.value.transpose()).cwiseAbs().maxCoeff() <
            1e-12);
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(diag.value);
      CHECK(eig.eigenvalues().minCoeff() > -1e-10 * scale);
    }
  }
}

TEST_CASE("masked score covariance agrees across exact methods") {
  const MaternParams theta{1.0, 1.0, 1.5};
  const GridSpec spec{8, 8, 1.0, 1.0};
  const Window w = unit_window(spec);
  const MaskArray mask = disk_mask(spec);
  const ScoreCovariance dense = score_cov_dft_matrix(theta, w, mask);
  const ScoreCovariance diag = score_cov_per_diagonal(theta, w, mask);
  CHECK((dense.value - diag.value).cwiseAbs().maxCoeff() /
            dense.value.cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("dense method refuses oversized grids") {
  const GridSpec spec{80, 80, 1.0, 1.0};
  CHECK_THROWS_WITH_AS(
      score_cov_dft_matrix({1.0, 1.0, 1.0}, unit_window(spec)),
      doctest::Contains("per-diagonal"), std::runtime_error);
}

TEST_CASE("sampled score covariance approaches the exact one") {
  const MaternParams theta{1.0, 1.0, 2.0};
  const GridSpec spec{16, 16, 1.0, 1.0};
  const Window w = unit_window(spec);
  const ScoreCovariance exact = score_cov_per_diagonal(theta, w);
  const ScoreCovariance mc = score_cov_sampling(theta, w, 500, 21);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(mc.value(i, j) ==
            doctest::Approx(exact.value(i, j))
                .epsilon(0.2)
                .scale(std::sqrt(exact.value(i, i) * exact.value(j, j))));
  CHECK_THROWS(score_cov_sampling(theta, w, 10, 1));  // R >= 50 contract

  // Monte Carlo error shrinks roughly like 1 / sqrt(R).
  const auto err = [&](const ScoreCovariance& sc) {
    return (sc.value - exact.value).norm();
  };
  const double e_small = err(score_cov_sampling(theta, w, 60, 33));
  const double e_large = err(score_cov_sampling(theta, w, 960, 33));
  CHECK(e_large < e_small);
}

TEST_CASE("truncated per-diagonal accumulation approximates the exact value") {
  const MaternParams theta{1.0, 1.0, 1.5};
  const GridSpec spec{10, 10, 1.0, 1.0};
  const Window w = cosine_squared_taper(spec, 0.2);
  const ScoreCovariance exact = score_cov_per_diagonal(theta, w);
  const ScoreCovariance trunc = score_cov_per_diagonal(theta, w, {}, 0.01);
  CHECK(trunc.effort < exact.effort);
  CHECK((trunc.value - exact.value).norm() / exact.value.norm() < 0.05);
}

TEST_CASE("sandwich covariance") {
  Eigen::Matrix3d fisher;
  fisher << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0;
  ScoreCovariance sc;
  sc.value = fisher;  // substituting the Fisher matrix collapses to F^-1
  const Eigen::Matrix3d cov = sandwich_covariance(fisher, sc);
  CHECK((cov - fisher.inverse()).cwiseAbs().maxCoeff() < 1e-12);

  ScoreCovariance singular_sc;
  singular_sc.value = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d singular = Eigen::Matrix3d::Zero();
  singular(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(sandwich_covariance(singular, singular_sc),
                       doctest::Contains("condition"), std::runtime_error);
}

TEST_CASE("correlation matrix normalization") {
  CHECK((correlation_matrix(Eigen::Matrix3d::Identity()) -
         Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  Eigen::Matrix3d a;
  a << 2.0, -0.3, 0.4, -0.1, 1.0, 0.6, 0.2, 0.5, 3.0;
  const Eigen::Matrix3d cov = a * a.transpose();
  const Eigen::Matrix3d corr = correlation_matrix(cov);
  for (int i = 0; i < 3; ++i) {
    CHECK(corr(i, i) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(corr(i, j)) <= 1.0 + 1e-12);
      CHECK(corr(i, j) ==
            doctest::Approx(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)))
                .epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(correlation_matrix(Eigen::Matrix3d::Zero()),
                  std::domain_error);
}
