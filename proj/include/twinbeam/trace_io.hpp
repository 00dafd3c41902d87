#pragma once

#include <filesystem>
#include <string>

#include "twinbeam/trace.hpp"

namespace twinbeam {

/// Text trace format:
///
///   # sample_rate_hz = 200000
///   # demod_frequency_hz = 3500000
///   # seed = 42
///   # length = 3
///   # normalization = shot_sigma0=1
///   signal,idler
///   <signal>,<idler>
///   ...
///
/// Samples are written with 17 significant digits, which round-trips doubles
/// exactly.
void save_trace(const Trace& trace, const std::filesystem::path& path,
                bool overwrite = false);

Trace load_trace(const std::filesystem::path& path);

/// Formatting helpers shared with the report writers.
std::string format_sample(double x);
std::string format_number(double x);

}  // namespace twinbeam
