#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace twinbeam {

double to_db(double linear);
double from_db(double db);

/// A variance ratio relative to shot noise. A zero ratio is representable and
/// reported as "below floor" instead of -inf dB.
class NoiseLevel {
 public:
  /// Throws DomainError for negative or non-finite input.
  static NoiseLevel from_linear(double linear);
  static NoiseLevel from_db(double db);

  double linear() const noexcept { return linear_; }
  bool below_floor() const noexcept { return linear_ <= 0.0; }
  /// Empty when below floor.
  std::optional<double> db() const;

  friend bool operator==(const NoiseLevel&, const NoiseLevel&) = default;

 private:
  explicit NoiseLevel(double linear) : linear_(linear) {}
  double linear_;
};

double mean(std::span<const double> samples);

/// Unbiased (n-1) variance, two-pass with a compensation term.
double variance(std::span<const double> samples);

/// Unbiased covariance of two equal-length arrays.
double covariance(std::span<const double> a, std::span<const double> b);

/// Standard error of the unbiased variance estimate, using the sample
/// fourth central moment (no normality assumption).
double variance_standard_error(std::span<const double> samples);

/// variance(samples) / shot_variance. When `dark_variance` is non-zero it is
/// subtracted from the sample variance first (floored at zero).
NoiseLevel fano(std::span<const double> samples, double shot_variance,
                double dark_variance = 0.0);

/// Var(signal - idler) / 2: difference noise against the shot noise of two
/// equal-power beams.
NoiseLevel gemellity(std::span<const double> signal,
                     std::span<const double> idler);

struct HistogramBin {
  double center;
  double probability;
};

/// Normalized histogram on a regular grid of `bin_width` centred on the
/// midpoint of the sample range. Empty bins inside the range are kept.
std::vector<HistogramBin> histogram(std::span<const double> samples,
                                    double bin_width);

}  // namespace twinbeam
