#include <doctest.h>

#include <cmath>
#include <random>

#include "whittle/likelihood.hpp"

using namespace whittle;

namespace {
Eigen::ArrayXXd random_field(const GridSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::ArrayXXd f(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) f(j, i) = gauss(rng);
  return f;
}
}  // namespace

TEST_CASE("objective matches its definition") {
  const GridSpec spec{6, 5, 1.0, 1.0};
  const Window w = unit_window(spec);
  const LikelihoodContext ctx(random_field(spec, 1), w);
  const MaternParams theta{1.0, 1.0, 1.5};
  const Eigen::ArrayXXd sbar = ctx.blurred(theta)->value;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      acc += std::log(sbar(j, i)) + ctx.data_periodogram()(j, i) / sbar(j, i);
  CHECK(blurred_loglik(theta, ctx) ==
        doctest::Approx(-acc / static_cast<double>(spec.size()))
            .epsilon(1e-13));
  CHECK_THROWS_AS(blurred_loglik({-1.0, 1.0, 1.0}, ctx), std::domain_error);
}

TEST_CASE("analytic score equals finite differences") {
  const GridSpec spec{8, 8, 1.0, 1.0};
  const Window w = cosine_squared_taper(spec, 0.125);
  const LikelihoodContext ctx(random_field(spec, 2), w);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.4, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    const Eigen::Vector3d score = blurred_score(p, ctx);
    const double h = 1e-6;
    for (int t = 0; t < 3; ++t) {
      MaternParams pp = p, pm = p;
      double* fp = t == 0 ? &pp.sigma2 : t == 1 ? &pp.nu : &pp.rho;
      double* fm = t == 0 ? &pm.sigma2 : t == 1 ? &pm.nu : &pm.rho;
      *fp += h;
      *fm -= h;
      const double fd =
          (blurred_loglik(pp, ctx) - blurred_loglik(pm, ctx)) / (2.0 * h);
      CHECK(score[t] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1.0));
    }
  }
}

TEST_CASE("score vanishes when the data periodogram equals the model") {
  const GridSpec spec{7, 6, 2.0, 1.0};
  const Window w = unit_window(spec);
  const MaternParams theta{1.5, 1.2, 2.5};
  const Eigen::ArrayXXd sbar = blurred_sdf(theta, w);
  const LikelihoodContext ctx(sbar, w, std::nullopt, 0);
  CHECK(blurred_score(theta, ctx).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("fisher matrix is a symmetric PSD gram matrix") {
  const GridSpec spec{8, 8, 1.0, 1.0};
  const Window w = unit_window(spec);
  const LikelihoodContext ctx(random_field(spec, 3), w);
  const MaternParams theta{1.0, 1.5, 2.0};
  const Eigen::Matrix3d f = blurred_fisher(theta, ctx);
  CHECK((f - f.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(f);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("masking excludes wavenumbers but keeps the MN normalization") {
  const GridSpec spec{8, 8, 1.0, 1.0};
  const Window w = unit_window(spec);
  const Eigen::ArrayXXd field = random_field(spec, 4);
  const MaskArray disk = disk_mask(spec);
  CHECK(disk.count() < spec.size());
  CHECK(disk(spec.n / 2, spec.m / 2));  // zero wavenumber kept

  const LikelihoodContext full(field, w);
  const LikelihoodContext masked(field, w, disk);
  const MaternParams theta{1.0, 1.0, 1.0};
  const Eigen::ArrayXXd sbar = full.blurred(theta)->value;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      if (disk(j, i))
        acc += std::log(sbar(j, i)) +
               full.data_periodogram()(j, i) / sbar(j, i);
  CHECK(blurred_loglik(theta, masked) ==
        doctest::Approx(-acc / static_cast<double>(spec.size()))
            .epsilon(1e-13));
}

TEST_CASE("blur cache returns the shared evaluation") {
  const GridSpec spec{6, 6, 1.0, 1.0};
  const LikelihoodContext ctx(random_field(spec, 5), unit_window(spec));
  const MaternParams theta{1.0, 1.0, 1.0};
  const auto a = ctx.blurred(theta);
  const auto b = ctx.blurred(theta);
  CHECK(a.get() == b.get());
  const auto c = ctx.blurred({1.0, 1.0, 2.0});
  CHECK(a.get() != c.get());
}

TEST_CASE("large-sample objective family matches finite differences") {
  const GridSpec spec{8, 8, 1.0, 1.0};
  const LikelihoodContext ctx(random_field(spec, 6), unit_window(spec));
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.5, 2.5);
  for (int trial = 0; trial < 5; ++trial) {
    const MaternParams p{u(rng), u(rng), u(rng)};
    const Eigen::Vector3d score = unblurred_score(p, ctx);
    const Eigen::Matrix3d hess = unblurred_hessian(p, ctx);
    const double h = 1e-6;
    for (int t = 0; t < 3; ++t) {
      MaternParams pp = p, pm = p;
      double* fp = t == 0 ? &pp.sigma2 : t == 1 ? &pp.nu : &pp.rho;
      double* fm = t == 0 ? &pm.sigma2 : t == 1 ? &pm.nu : &pm.rho;
      *fp += h;
      *fm -= h;
      const double fd =
          (unblurred_loglik(pp, ctx) - unblurred_loglik(pm, ctx)) / (2.0 * h);
      CHECK(score[t] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1.0));
      const Eigen::Vector3d sfd =
          (unblurred_score(pp, ctx) - unblurred_score(pm, ctx)) / (2.0 * h);
      for (int s = 0; s < 3; ++s)
        CHECK(hess(t, s) ==
              doctest::Approx(sfd[s]).epsilon(2e-5).scale(std::abs(sfd[s]) +
                                                          1.0));
    }
    const Eigen::Matrix3d fisher = unblurred_fisher(p, ctx);
    CHECK((fisher - fisher.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}
