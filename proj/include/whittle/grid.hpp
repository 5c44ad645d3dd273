#ifndef WHITTLE_GRID_HPP
#define WHITTLE_GRID_HPP

#include <Eigen/Dense>

namespace whittle {

/// Rectangular lattice: m columns spaced dx along x, n rows spaced dy along y.
/// Spatial nodes are {(i dx, j dy)}, i in [0,m), j in [0,n). Arrays are stored
/// with rows indexing y and columns indexing x.
struct GridSpec {
  Eigen::Index m = 1, n = 1;
  double dx = 1.0, dy = 1.0;

  bool valid() const { return m >= 1 && n >= 1 && dx > 0.0 && dy > 0.0; }
  void require_valid() const;
  Eigen::Index size() const { return m * n; }
  double diagonal() const;
};

/// Centered wavenumber coordinates 2 pi / (m dx) * (-floor(m/2) + i).
Eigen::ArrayXd wavenumbers_x(const GridSpec& spec);
Eigen::ArrayXd wavenumbers_y(const GridSpec& spec);

/// |k| at every centered grid wavenumber, shape (n, m).
Eigen::ArrayXXd wavenumber_magnitude(const GridSpec& spec);

/// Real taper on the grid, stored so that (1/MN) sum w^2 = 1 (the unit window
/// is identically one under this convention).
struct Window {
  GridSpec spec;
  Eigen::ArrayXXd values;  // (n, m)
};

Window unit_window(const GridSpec& spec);

/// Flat interior with cos^2 rolloff over ceil(fraction * side) pixels on all
/// four sides; fraction in [0, 0.5). fraction = 0 degenerates to the unit
/// window.
Window cosine_squared_taper(const GridSpec& spec, double fraction);

/// Arbitrary nonnegative mask (e.g. 0/1 incomplete sampling), renormalized to
/// the module convention.
Window custom_window(const GridSpec& spec, const Eigen::ArrayXXd& values);

/// Lag-domain autocorrelation W(y) = sum_x w(x) w(x+y) over the mirrored lag
/// grid, shape (2n-1, 2m-1) with zero lag at (n-1, m-1). Computed by
/// zero-padded FFT.
Eigen::ArrayXXd window_autocorrelation(const Window& w);

enum class DetrendMode { none, mean, plane };

/// Subtract nothing, the sample mean, or the least-squares plane a + b x + c y.
Eigen::ArrayXXd detrend(const Eigen::ArrayXXd& field, const GridSpec& spec,
                        DetrendMode mode);

/// Clamp to the [lower_pct, upper_pct] empirical percentiles (linear
/// interpolation between order statistics).
Eigen::ArrayXXd winsorize(const Eigen::ArrayXXd& field, double lower_pct,
                          double upper_pct);

}  // namespace whittle

#endif
