#include "whittle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "whittle/fft.hpp"

namespace whittle {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::ArrayXd cos2_profile(Eigen::Index len, double fraction) {
  Eigen::ArrayXd p = Eigen::ArrayXd::Ones(len);
  const Eigen::Index t =
      static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(len)));
  if (t == 0) return p;
  for (Eigen::Index i = 0; i < len; ++i) {
    double v = 1.0;
    if (i < t) {
      const double s = std::sin(kPi / 2.0 * (i + 0.5) / static_cast<double>(t));
      v = std::min(v, s * s);
    }
    if (len - 1 - i < t) {
      const double s = std::sin(kPi / 2.0 * (len - 0.5 - i) / static_cast<double>(t));
      v = std::min(v, s * s);
    }
    p[i] = v;
  }
  return p;
}

Window normalized(const GridSpec& spec, Eigen::ArrayXXd vals) {
  const double ss = (vals * vals).sum();
  if (!(ss > 0.0))
    throw std::invalid_argument("window: all-zero taper is not a window");
  vals *= std::sqrt(static_cast<double>(spec.size()) / ss);
  return Window{spec, std::move(vals)};
}
}  // namespace

void GridSpec::require_valid() const {
  if (!valid())
    throw std::invalid_argument("GridSpec: need m,n >= 1 and dx,dy > 0");
}

double GridSpec::diagonal() const {
  return std::hypot(static_cast<double>(m) * dx, static_cast<double>(n) * dy);
}

Eigen::ArrayXd wavenumbers_x(const GridSpec& spec) {
  spec.require_valid();
  Eigen::ArrayXd k(spec.m);
  for (Eigen::Index i = 0; i < spec.m; ++i)
    k[i] = 2.0 * kPi / (spec.m * spec.dx) * (i - spec.m / 2);
  return k;
}

Eigen::ArrayXd wavenumbers_y(const GridSpec& spec) {
  spec.require_valid();
  Eigen::ArrayXd k(spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    k[j] = 2.0 * kPi / (spec.n * spec.dy) * (j - spec.n / 2);
  return k;
}

Eigen::ArrayXXd wavenumber_magnitude(const GridSpec& spec) {
  const Eigen::ArrayXd kx = wavenumbers_x(spec);
  const Eigen::ArrayXd ky = wavenumbers_y(spec);
  Eigen::ArrayXXd mag(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i)
      mag(j, i) = std::hypot(kx[i], ky[j]);
  return mag;
}

Window unit_window(const GridSpec& spec) {
  spec.require_valid();
  return Window{spec, Eigen::ArrayXXd::Ones(spec.n, spec.m)};
}

Window cosine_squared_taper(const GridSpec& spec, double fraction) {
  spec.require_valid();
  if (!(fraction >= 0.0 && fraction < 0.5))
    throw std::invalid_argument("cosine_squared_taper: fraction in [0, 0.5)");
  if (fraction == 0.0) return unit_window(spec);
  const Eigen::ArrayXd px = cos2_profile(spec.m, fraction);
  const Eigen::ArrayXd py = cos2_profile(spec.n, fraction);
  Eigen::ArrayXXd vals(spec.n, spec.m);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.m; ++i) vals(j, i) = py[j] * px[i];
  return normalized(spec, std::move(vals));
}

Window custom_window(const GridSpec& spec, const Eigen::ArrayXXd& values) {
  spec.require_valid();
  if (values.rows() != spec.n || values.cols() != spec.m)
    throw std::invalid_argument("custom_window: shape mismatch");
  if ((values < 0.0).any())
    throw std::invalid_argument("custom_window: taper values must be >= 0");
  return normalized(spec, values);
}

Eigen::ArrayXXd window_autocorrelation(const Window& w) {
  const Eigen::Index m = w.spec.m, n = w.spec.n;
  if ((w.values == 1.0).all()) {
    // Unit window: the triangular product, exact in integer arithmetic.
    Eigen::ArrayXXd out(2 * n - 1, 2 * m - 1);
    for (Eigen::Index j = -(n - 1); j <= n - 1; ++j)
      for (Eigen::Index i = -(m - 1); i <= m - 1; ++i)
        out(j + n - 1, i + m - 1) =
            static_cast<double>((m - std::abs(i)) * (n - std::abs(j)));
    return out;
  }
  const Eigen::Index P = 2 * n, Q = 2 * m;
  Eigen::ArrayXXcd pad = Eigen::ArrayXXcd::Zero(P, Q);
  pad.topLeftCorner(n, m) = w.values.cast<std::complex<double>>();
  const Eigen::ArrayXXcd spec = fft::forward(pad);
  const Eigen::ArrayXXcd power = spec * spec.conjugate();
  const Eigen::ArrayXXd circ =
      fft::inverse(power).real() / static_cast<double>(P * Q);

  Eigen::ArrayXXd out(2 * n - 1, 2 * m - 1);
  for (Eigen::Index j = -(n - 1); j <= n - 1; ++j)
    for (Eigen::Index i = -(m - 1); i <= m - 1; ++i)
      out(j + n - 1, i + m - 1) = circ((j + P) % P, (i + Q) % Q);
  return out;
}

Eigen::ArrayXXd detrend(const Eigen::ArrayXXd& field, const GridSpec& spec,
                        DetrendMode mode) {
  spec.require_valid();
  if (field.rows() != spec.n || field.cols() != spec.m)
    throw std::invalid_argument("detrend: shape mismatch");
  switch (mode) {
    case DetrendMode::none:
      return field;
    case DetrendMode::mean:
      return field - field.mean();
    case DetrendMode::plane: {
      if (spec.size() < 3)
        throw std::invalid_argument("detrend: plane fit needs >= 3 samples");
      Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
      Eigen::Vector3d atb = Eigen::Vector3d::Zero();
      for (Eigen::Index j = 0; j < spec.n; ++j)
        for (Eigen::Index i = 0; i < spec.m; ++i) {
          const Eigen::Vector3d row(1.0, i * spec.dx, j * spec.dy);
          ata += row * row.transpose();
          atb += row * field(j, i);
        }
      const Eigen::Vector3d abc = ata.ldlt().solve(atb);
      Eigen::ArrayXXd out(spec.n, spec.m);
      for (Eigen::Index j = 0; j < spec.n; ++j)
        for (Eigen::Index i = 0; i < spec.m; ++i)
          out(j, i) = field(j, i) - (abc[0] + abc[1] * i * spec.dx +
                                     abc[2] * j * spec.dy);
      return out;
    }
  }
  throw std::logic_error("detrend: unknown mode");
}

Eigen::ArrayXXd winsorize(const Eigen::ArrayXXd& field, double lower_pct,
                          double upper_pct) {
  if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0))
    throw std::invalid_argument("winsorize: need 0 <= lower < upper <= 100");
  std::vector<double> v(field.data(), field.data() + field.size());
  std::sort(v.begin(), v.end());
  auto pctile = [&](double p) {
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return (1.0 - f) * v[lo] + f * v[hi];
  };
  const double lo = pctile(lower_pct), hi = pctile(upper_pct);
  return field.max(lo).min(hi);
}

}  // namespace whittle
