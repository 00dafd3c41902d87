#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "twinbeam/source_model.hpp"
#include "twinbeam/trace.hpp"

namespace twinbeam {

inline constexpr const char* kVersion = "0.1.0";

enum class ScenarioKind {
  kHistograms,
  kBandwidthSweep,
  kGemellitySweep,
  kMultiband,
  kCalibrate,
};

/// How configured widths map to the acceptance half-width.
enum class WidthConvention { kHalf, kFull };

struct Seeds {
  std::uint64_t trace = 1;
  std::uint64_t dark = 2;
  std::uint64_t calibration = 3;
};

struct QuantizerConfig {
  int bits = 12;
  /// Defaults to default_full_scale() of the generated covariance.
  std::optional<double> full_scale;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::kBandwidthSweep;
  TwinBeamModel model;
  std::size_t n = 200'000;
  Seeds seeds;
  WidthConvention width_convention = WidthConvention::kHalf;
  std::optional<QuantizerConfig> quantizer;
  bool subtract_dark = false;
  double sample_rate_hz = kDefaultSampleRateHz;
  double demod_frequency_hz = kDefaultDemodFrequencyHz;

  // Scenario parameters, in shot-noise units.
  double center = 0.0;                // histograms, bandwidth_sweep, gemellity_sweep
  double width = 0.1;                 // histograms, gemellity_sweep, multiband
  double bin_width = 0.5;             // histograms, calibrate
  std::vector<double> widths;         // bandwidth_sweep
  std::vector<double> centers;        // multiband
  std::vector<double> losses;         // gemellity_sweep, equal on both beams
  std::vector<double> gemellities_db; // gemellity_sweep

  /// Acceptance half-width for a configured width.
  double half_width(double configured) const {
    return width_convention == WidthConvention::kFull ? configured / 2.0
                                                      : configured;
  }
};

std::string to_string(ScenarioKind kind);
std::string to_string(WidthConvention convention);
ScenarioKind parse_scenario_kind(const std::string& name);
WidthConvention parse_width_convention(const std::string& name);

/// Strict parse: unknown keys, keys foreign to the chosen scenario, missing
/// scenario parameters and wrongly typed values raise ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical form, every field explicit. parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);
std::string fnv1a_hex(std::string_view bytes);

}  // namespace twinbeam
