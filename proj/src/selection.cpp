#include "twinbeam/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "twinbeam/errors.hpp"

namespace twinbeam {
namespace {

void require_shot(double shot_variance) {
  if (!(shot_variance > 0.0) || !std::isfinite(shot_variance)) {
    throw DomainError("shot variance must be positive and finite");
  }
}

void finish(ConditionalResult& result, std::size_t n) {
  result.success_rate =
      n == 0 ? 0.0
             : static_cast<double>(result.indices.size()) / static_cast<double>(n);
  if (result.indices.size() >= 2) {
    result.noise = fano(result.selected_signal, result.shot_variance);
  }
}

ConditionalResult select_unchecked(const Trace& trace, const SelectionBand& band,
                                   double shot_variance) {
  ConditionalResult result;
  result.band = band;
  result.shot_variance = shot_variance;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (band.contains(trace.idler[k])) {
      result.indices.push_back(k);
      result.selected_signal.push_back(trace.signal[k]);
    }
  }
  finish(result, trace.size());
  return result;
}

}  // namespace

void SelectionBand::validate() const {
  if (!std::isfinite(center) || !(half_width >= 0.0)) {
    std::ostringstream os;
    os << "invalid selection band (center " << center << ", half_width "
       << half_width << ")";
    throw DomainError(os.str());
  }
}

ConditionalResult select(const Trace& trace, const SelectionBand& band,
                         double shot_variance) {
  band.validate();
  require_shot(shot_variance);
  trace.validate();
  if (trace.empty()) throw InsufficientDataError("select on an empty trace");
  ConditionalResult result = select_unchecked(trace, band, shot_variance);
  if (!result.noise) {
    throw InsufficientSelectionError(result.success_rate,
                                     result.accepted_count());
  }
  return result;
}

std::vector<ConditionalResult> multi_select(
    const Trace& trace, const std::vector<SelectionBand>& bands,
    double shot_variance) {
  require_shot(shot_variance);
  trace.validate();
  for (const auto& b : bands) b.validate();

  // Band order by lower edge; ties broken by declaration order.
  std::vector<std::size_t> order(bands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bands[a].lower() < bands[b].lower();
  });
  for (std::size_t j = 1; j < order.size(); ++j) {
    const auto& prev = bands[order[j - 1]];
    const auto& next = bands[order[j]];
    if (next.lower() < prev.upper()) {
      std::ostringstream os;
      os << "selection bands overlap: [" << prev.lower() << ", " << prev.upper()
         << "] and [" << next.lower() << ", " << next.upper() << "]";
      throw InvalidPartitionError(os.str());
    }
  }

  std::vector<double> lowers(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) lowers[j] = bands[order[j]].lower();

  std::vector<ConditionalResult> results(bands.size());
  for (std::size_t b = 0; b < bands.size(); ++b) {
    results[b].band = bands[b];
    results[b].shot_variance = shot_variance;
  }
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double x = trace.idler[k];
    // Last band whose lower edge is <= x.
    const auto it = std::upper_bound(lowers.begin(), lowers.end(), x);
    if (it == lowers.begin()) continue;
    const std::size_t b = order[static_cast<std::size_t>(it - lowers.begin()) - 1];
    if (x <= bands[b].upper()) {
      results[b].indices.push_back(k);
      results[b].selected_signal.push_back(trace.signal[k]);
    }
  }
  for (auto& r : results) finish(r, trace.size());
  return results;
}

std::vector<std::pair<double, ConditionalResult>> sweep_bandwidth(
    const Trace& trace, double center, const std::vector<double>& half_widths,
    double shot_variance) {
  require_shot(shot_variance);
  trace.validate();
  for (std::size_t j = 0; j < half_widths.size(); ++j) {
    if (!(half_widths[j] > 0.0)) {
      throw DomainError("sweep half-widths must be positive");
    }
    if (j > 0 && half_widths[j] < half_widths[j - 1]) {
      throw DomainError("sweep half-widths must be sorted ascending");
    }
  }
  std::vector<std::pair<double, ConditionalResult>> out;
  out.reserve(half_widths.size());
  for (double w : half_widths) {
    const SelectionBand band{center, w};
    band.validate();
    out.emplace_back(w, select_unchecked(trace, band, shot_variance));
  }
  return out;
}

}  // namespace twinbeam
