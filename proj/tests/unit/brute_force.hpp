#pragma once

// Test-only reference computations, independent of the library's closed forms.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "twinbeam/source_model.hpp"

namespace twinbeam::testing {

/// Composite Simpson rule with `intervals` (even) panels.
template <typename F>
double simpson(F f, double a, double b, int intervals = 20000) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) {
    sum += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// Variance of N(0, sigma^2) restricted to [center - h, center + h], by
/// quadrature of the truncated density. Moments are taken about the band
/// center to keep narrow bands well conditioned.
inline double brute_truncated_variance(double sigma, double center, double h) {
  const auto w = [&](double u) {
    const double x = center + u;
    return std::exp(-0.5 * (x * x - center * center) / (sigma * sigma));
  };
  const double z = simpson(w, -h, h);
  const double m1 = simpson([&](double u) { return u * w(u); }, -h, h) / z;
  const double m2 = simpson([&](double u) { return u * u * w(u); }, -h, h) / z;
  return m2 - m1 * m1;
}

/// P(|X - center| <= h) for X ~ N(0, sigma^2), by quadrature of the density.
inline double brute_band_mass(double sigma, double center, double h) {
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  return simpson(
      [&](double x) { return norm * std::exp(-0.5 * x * x / (sigma * sigma)); },
      center - h, center + h);
}

/// Random positive-definite 2x2 covariance with variances in [0.5, 200].
inline CovarianceMatrix random_covariance(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> logv(std::log(0.5), std::log(200.0));
  std::uniform_real_distribution<double> rho(-0.999, 0.999);
  const double vs = std::exp(logv(gen));
  const double vi = std::exp(logv(gen));
  return {vs, vi, rho(gen) * std::sqrt(vs * vi)};
}

}  // namespace twinbeam::testing
