#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace twinbeam {

inline constexpr double kDefaultSampleRateHz = 200'000.0;
inline constexpr double kDefaultDemodFrequencyHz = 3.5e6;

struct TraceMeta {
  double sample_rate_hz = kDefaultSampleRateHz;
  double demod_frequency_hz = kDefaultDemodFrequencyHz;
  std::uint64_t seed = 0;
};

/// Paired signal/idler fluctuation record, mean-subtracted and normalized so
/// that one beam's shot noise has unit variance.
struct Trace {
  std::vector<double> signal;
  std::vector<double> idler;
  TraceMeta meta;

  std::size_t size() const noexcept { return signal.size(); }
  bool empty() const noexcept { return signal.empty(); }

  /// Throws ShapeError on unequal channel lengths and DomainError on a
  /// non-finite sample.
  void validate() const;
};

}  // namespace twinbeam
