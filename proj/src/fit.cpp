#include "spinsqueeze/fit.hpp"

#include <algorithm>
#include <cmath>

namespace ssq {

FitResult fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::invalid_argument, "fit_power_law: need >= 2 paired samples");
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      fail(ErrorCode::invalid_argument,
           "fit_power_law: samples must be strictly positive");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0)
    fail(ErrorCode::invalid_argument, "fit_power_law: degenerate x values");

  FitResult fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy == 0 ? 1.0 : std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
  fit.x_lo = *std::min_element(x.begin(), x.end());
  fit.x_hi = *std::max_element(x.begin(), x.end());
  fit.n_points = static_cast<int>(n);
  return fit;
}

}  // namespace ssq
