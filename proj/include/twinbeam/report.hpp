#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "twinbeam/config.hpp"
#include "twinbeam/stats.hpp"

namespace twinbeam {

/// Two-sided confidence interval on a noise level, linear units.
struct ConfidenceInterval {
  double level = 0.95;
  double low = 0.0;
  double high = 0.0;
};

/// One measured point, paired with its oracle prediction where one exists.
struct PointRecord {
  std::vector<std::pair<std::string, double>> parameters;
  std::optional<NoiseLevel> measured;
  std::optional<double> predicted;  // linear
  std::optional<double> standard_error;
  std::optional<ConfidenceInterval> interval;
  std::optional<double> success_rate;
  std::optional<double> predicted_success_rate;
  std::optional<std::size_t> accepted_count;
  std::string note;
};

/// Flat plot-ready table; empty cells are missing values.
struct PlotTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

struct Provenance {
  std::string config_hash;
  Seeds seeds;
  std::string version = kVersion;
};

struct NoiseReport {
  std::string scenario;
  Provenance provenance;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<PointRecord> points;
  std::vector<PlotTable> tables;
};

/// Chi-square interval for a variance estimated from `count` samples.
ConfidenceInterval variance_interval(double variance, std::size_t count,
                                     double level = 0.95);

nlohmann::ordered_json to_json(const NoiseLevel& level);
nlohmann::ordered_json to_json(const PointRecord& point);
nlohmann::ordered_json to_json(const NoiseReport& report);

/// Pretty-printed JSON with a trailing newline. Byte-stable for equal reports.
std::string report_json_text(const NoiseReport& report);
std::string table_csv_text(const PlotTable& table);

/// Writes report.json and one <table>.csv per plot table into `out_dir`,
/// creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> write_report(
    const NoiseReport& report, const std::filesystem::path& out_dir);

}  // namespace twinbeam
