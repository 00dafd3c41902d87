#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "twinbeam/stats.hpp"
#include "twinbeam/trace.hpp"

namespace twinbeam {

/// Closed idler acceptance window [center - half_width, center + half_width].
struct SelectionBand {
  double center = 0.0;
  double half_width = 0.0;

  double lower() const noexcept { return center - half_width; }
  double upper() const noexcept { return center + half_width; }
  bool contains(double idler) const noexcept {
    return idler >= lower() && idler <= upper();
  }
  void validate() const;
};

struct ConditionalResult {
  SelectionBand band;
  std::vector<double> selected_signal;
  std::vector<std::size_t> indices;
  double success_rate = 0.0;
  double shot_variance = 1.0;
  /// Empty when fewer than two samples were accepted.
  std::optional<NoiseLevel> noise;

  std::size_t accepted_count() const noexcept { return indices.size(); }
};

/// Keeps signal[k] iff idler[k] lies in `band`. The shot reference is passed
/// through unchanged. Throws InsufficientSelectionError below two accepted
/// samples.
ConditionalResult select(const Trace& trace, const SelectionBand& band,
                         double shot_variance = 1.0);

/// One result per band, each sample assigned to at most one band. Bands may
/// touch but not overlap; a sample on a shared edge goes to the upper band.
/// Sparse bands come back with an empty `noise` instead of throwing.
std::vector<ConditionalResult> multi_select(
    const Trace& trace, const std::vector<SelectionBand>& bands,
    double shot_variance = 1.0);

/// Nested bands around `center`. Widths must be positive and ascending.
/// Points with fewer than two accepted samples have an empty `noise`.
std::vector<std::pair<double, ConditionalResult>> sweep_bandwidth(
    const Trace& trace, double center, const std::vector<double>& half_widths,
    double shot_variance = 1.0);

}  // namespace twinbeam
