#pragma once

#include <span>

#include "spinsqueeze/types.hpp"

namespace ssq {

// Least-squares power-law fit y = prefactor * x^exponent on log-transformed
// data; all samples must be strictly positive.
struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int n_points = 0;
};

FitResult fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace ssq
