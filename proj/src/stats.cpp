#include "twinbeam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twinbeam/errors.hpp"
#include "twinbeam/trace.hpp"

namespace twinbeam {
namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_at_least(std::size_t n, std::size_t needed, const char* what) {
  if (n < needed) {
    throw InsufficientDataError(std::string(what) + " needs at least " +
                                std::to_string(needed) + " samples, got " +
                                std::to_string(n));
  }
}

}  // namespace

void Trace::validate() const {
  if (signal.size() != idler.size()) {
    throw ShapeError("trace channels differ in length: signal " +
                     std::to_string(signal.size()) + ", idler " +
                     std::to_string(idler.size()));
  }
  for (std::size_t k = 0; k < signal.size(); ++k) {
    if (!std::isfinite(signal[k]) || !std::isfinite(idler[k])) {
      throw DomainError("non-finite sample at index " + std::to_string(k));
    }
  }
}

double to_db(double linear) {
  if (!(linear > 0.0) || !std::isfinite(linear)) {
    throw DomainError("to_db requires a positive finite ratio, got " +
                      std::to_string(linear));
  }
  return 10.0 * std::log10(linear);
}

double from_db(double db) {
  if (!std::isfinite(db)) {
    throw DomainError("from_db requires a finite decibel value");
  }
  return std::pow(10.0, db / 10.0);
}

NoiseLevel NoiseLevel::from_linear(double linear) {
  if (!(linear >= 0.0) || !std::isfinite(linear)) {
    throw DomainError("noise level must be a non-negative finite ratio, got " +
                      std::to_string(linear));
  }
  return NoiseLevel(linear);
}

NoiseLevel NoiseLevel::from_db(double db) {
  return NoiseLevel(twinbeam::from_db(db));
}

std::optional<double> NoiseLevel::db() const {
  if (below_floor()) return std::nullopt;
  return to_db(linear_);
}

double mean(std::span<const double> samples) {
  require_at_least(samples.size(), 1, "mean");
  CompensatedSum sum;
  for (double x : samples) sum.add(x);
  return sum.value() / static_cast<double>(samples.size());
}

double variance(std::span<const double> samples) {
  require_at_least(samples.size(), 2, "variance");
  const double m = mean(samples);
  CompensatedSum sq;
  CompensatedSum lin;
  for (double x : samples) {
    const double d = x - m;
    sq.add(d * d);
    lin.add(d);
  }
  const auto n = static_cast<double>(samples.size());
  const double correction = lin.value() * lin.value() / n;
  return std::max(0.0, (sq.value() - correction) / (n - 1.0));
}

double covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("covariance of arrays with different lengths");
  }
  require_at_least(a.size(), 2, "covariance");
  const double ma = mean(a);
  const double mb = mean(b);
  CompensatedSum cross;
  CompensatedSum da;
  CompensatedSum db;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k] - ma;
    const double y = b[k] - mb;
    cross.add(x * y);
    da.add(x);
    db.add(y);
  }
  const auto n = static_cast<double>(a.size());
  return (cross.value() - da.value() * db.value() / n) / (n - 1.0);
}

double variance_standard_error(std::span<const double> samples) {
  require_at_least(samples.size(), 2, "variance_standard_error");
  const double m = mean(samples);
  CompensatedSum m2;
  CompensatedSum m4;
  for (double x : samples) {
    const double d2 = (x - m) * (x - m);
    m2.add(d2);
    m4.add(d2 * d2);
  }
  const auto n = static_cast<double>(samples.size());
  const double mu2 = m2.value() / n;
  const double mu4 = m4.value() / n;
  const double v = (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n;
  return std::sqrt(std::max(0.0, v));
}

NoiseLevel fano(std::span<const double> samples, double shot_variance,
                double dark_variance) {
  if (!(shot_variance > 0.0) || !std::isfinite(shot_variance)) {
    throw DomainError("shot variance must be positive, got " +
                      std::to_string(shot_variance));
  }
  if (!(dark_variance >= 0.0)) {
    throw DomainError("dark variance must be non-negative");
  }
  const double v = std::max(0.0, variance(samples) - dark_variance);
  return NoiseLevel::from_linear(v / shot_variance);
}

NoiseLevel gemellity(std::span<const double> signal,
                     std::span<const double> idler) {
  if (signal.size() != idler.size()) {
    throw ShapeError("gemellity needs equal-length channels: " +
                     std::to_string(signal.size()) + " vs " +
                     std::to_string(idler.size()));
  }
  require_at_least(signal.size(), 2, "gemellity");
  std::vector<double> diff(signal.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = signal[k] - idler[k];
  return NoiseLevel::from_linear(variance(diff) / 2.0);
}

std::vector<HistogramBin> histogram(std::span<const double> samples,
                                    double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw DomainError("histogram bin width must be positive");
  }
  require_at_least(samples.size(), 1, "histogram");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("histogram of non-finite samples");
  }
  const double span_bins = std::ceil((hi - lo) / bin_width);
  if (span_bins > 1e8) {
    throw DomainError("histogram would need more than 1e8 bins");
  }
  const auto nbins = std::max<std::size_t>(1, static_cast<std::size_t>(span_bins));
  const double mid = 0.5 * (lo + hi);
  const double left = mid - 0.5 * static_cast<double>(nbins) * bin_width;

  std::vector<std::size_t> counts(nbins, 0);
  for (double x : samples) {
    const double pos = std::floor((x - left) / bin_width);
    const auto k = static_cast<std::size_t>(
        std::clamp(pos, 0.0, static_cast<double>(nbins - 1)));
    ++counts[k];
  }

  std::vector<HistogramBin> bins;
  bins.reserve(nbins);
  const auto n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < nbins; ++k) {
    bins.push_back({left + (static_cast<double>(k) + 0.5) * bin_width,
                    static_cast<double>(counts[k]) / n});
  }
  return bins;
}

}  // namespace twinbeam
