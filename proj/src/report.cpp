#include "twinbeam/report.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <fstream>

#include "twinbeam/errors.hpp"
#include "twinbeam/trace_io.hpp"

namespace twinbeam {

using nlohmann::ordered_json;

ConfidenceInterval variance_interval(double variance, std::size_t count,
                                     double level) {
  if (count < 2) {
    throw InsufficientDataError("confidence interval needs at least 2 samples");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  const double dof = static_cast<double>(count - 1);
  const boost::math::chi_squared dist(dof);
  const double tail = 0.5 * (1.0 - level);
  return {level, dof * variance / boost::math::quantile(complement(dist, tail)),
          dof * variance / boost::math::quantile(dist, tail)};
}

ordered_json to_json(const NoiseLevel& level) {
  ordered_json j;
  j["linear"] = level.linear();
  const auto db = level.db();
  j["db"] = db ? ordered_json(*db) : ordered_json(nullptr);
  j["below_floor"] = level.below_floor();
  return j;
}

namespace {

ordered_json optional_number(const std::optional<double>& x) {
  return x ? ordered_json(*x) : ordered_json(nullptr);
}

ordered_json linear_and_db(double linear) {
  return to_json(NoiseLevel::from_linear(linear));
}

}  // namespace

ordered_json to_json(const PointRecord& p) {
  ordered_json j;
  ordered_json params = ordered_json::object();
  for (const auto& [key, value] : p.parameters) params[key] = value;
  j["parameters"] = params;
  j["measured"] = p.measured ? to_json(*p.measured) : ordered_json(nullptr);
  j["predicted"] = p.predicted ? linear_and_db(*p.predicted) : ordered_json(nullptr);
  j["standard_error"] = optional_number(p.standard_error);
  if (p.interval) {
    j["interval"] = {{"level", p.interval->level},
                     {"low", to_json(NoiseLevel::from_linear(p.interval->low))},
                     {"high", to_json(NoiseLevel::from_linear(p.interval->high))}};
  } else {
    j["interval"] = nullptr;
  }
  j["success_rate"] = optional_number(p.success_rate);
  j["predicted_success_rate"] = optional_number(p.predicted_success_rate);
  j["accepted_count"] =
      p.accepted_count ? ordered_json(*p.accepted_count) : ordered_json(nullptr);
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

ordered_json to_json(const NoiseReport& r) {
  ordered_json j;
  j["scenario"] = r.scenario;
  j["provenance"] = {{"config_hash", r.provenance.config_hash},
                     {"seeds",
                      {{"trace", r.provenance.seeds.trace},
                       {"dark", r.provenance.seeds.dark},
                       {"calibration", r.provenance.seeds.calibration}}},
                     {"version", r.provenance.version}};
  j["summary"] = r.summary;
  ordered_json points = ordered_json::array();
  for (const auto& p : r.points) points.push_back(to_json(p));
  j["points"] = points;
  ordered_json tables = ordered_json::array();
  for (const auto& t : r.tables) tables.push_back(t.name + ".csv");
  j["tables"] = tables;
  return j;
}

std::string report_json_text(const NoiseReport& report) {
  return to_json(report).dump(2) + "\n";
}

std::string table_csv_text(const PlotTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (row[c]) out += format_number(*row[c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> write_report(
    const NoiseReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string() + ": write failed");
    written.push_back(path);
  };
  emit(out_dir / "report.json", report_json_text(report));
  for (const auto& t : report.tables) emit(out_dir / (t.name + ".csv"), table_csv_text(t));
  return written;
}

}  // namespace twinbeam
