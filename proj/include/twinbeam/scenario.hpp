#pragma once

#include <cstdint>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/report.hpp"
#include "twinbeam/selection.hpp"
#include "twinbeam/source_model.hpp"
#include "twinbeam/trace.hpp"

namespace twinbeam {

/// Covariance actually observed by the detectors: model losses applied, dark
/// variance added to both channels.
CovarianceMatrix observed_covariance(const TwinBeamModel& model);

/// build -> loss -> sample -> dark -> quantize, a pure function of its inputs.
Trace generate_trace(const TwinBeamModel& model, std::size_t n,
                     std::uint64_t trace_seed, std::uint64_t dark_seed,
                     const std::optional<QuantizerConfig>& quantizer = {},
                     const TraceMeta& meta = {});

/// Variance of a seeded shot-noise calibration record.
double calibrate_shot_variance(std::size_t n, std::uint64_t seed);

/// Runs one scenario. Deterministic given the config (seeds included).
NoiseReport run_scenario(const ScenarioConfig& config);

struct AnalysisOptions {
  double shot_variance = 1.0;
  double center = 0.0;
  std::vector<double> half_widths = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  double bin_width = 0.5;
};

/// Full report on an external trace: unconditioned statistics, estimated
/// covariance, and a bandwidth sweep compared against the oracle evaluated on
/// the estimated covariance.
NoiseReport analyze_trace(const Trace& trace, const AnalysisOptions& options);

/// Single-band report. Throws InsufficientSelectionError when the band keeps
/// fewer than two samples.
NoiseReport select_report(const Trace& trace, const SelectionBand& band,
                          double shot_variance);

}  // namespace twinbeam
