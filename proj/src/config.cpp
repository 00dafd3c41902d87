#include "twinbeam/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "twinbeam/errors.hpp"
#include "twinbeam/stats.hpp"

namespace twinbeam {
namespace {

using nlohmann::json;

const std::set<std::string> kCommonKeys = {
    "scenario",      "model",          "n",
    "seeds",         "width_convention", "quantizer",
    "subtract_dark", "sample_rate_hz", "demod_frequency_hz"};

std::set<std::string> scenario_keys(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kHistograms:
      return {"center", "width", "bin_width"};
    case ScenarioKind::kBandwidthSweep:
      return {"center", "widths"};
    case ScenarioKind::kGemellitySweep:
      return {"center", "width", "losses", "gemellities_db"};
    case ScenarioKind::kMultiband:
      return {"width", "centers"};
    case ScenarioKind::kCalibrate:
      return {"bin_width"};
  }
  return {};
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

const json& require_object(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
  return doc;
}

double get_number(const json& obj, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& obj, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> get_numbers(const json& obj, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("'" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
  return out;
}

double require_number(const json& obj, const std::string& key,
                      const std::string& scenario) {
  if (!obj.contains(key)) {
    throw ConfigError("scenario '" + scenario + "' requires '" + key + "'");
  }
  return get_number(obj, key);
}

TwinBeamModel parse_model(const json& doc) {
  require_object(doc, "model");
  reject_unknown(doc,
                 {"excess_signal", "excess_idler", "gemellity", "gemellity_db",
                  "loss_signal", "loss_idler", "dark_variance", "mean_power"},
                 "model");
  TwinBeamModel m;
  if (doc.contains("excess_signal")) m.excess_signal = get_number(doc, "excess_signal");
  if (doc.contains("excess_idler")) m.excess_idler = get_number(doc, "excess_idler");
  if (doc.contains("gemellity") && doc.contains("gemellity_db")) {
    throw ConfigError("model: give either 'gemellity' or 'gemellity_db', not both");
  }
  if (doc.contains("gemellity")) m.gemellity = get_number(doc, "gemellity");
  if (doc.contains("gemellity_db")) m.gemellity = from_db(get_number(doc, "gemellity_db"));
  if (doc.contains("loss_signal")) m.loss_signal = get_number(doc, "loss_signal");
  if (doc.contains("loss_idler")) m.loss_idler = get_number(doc, "loss_idler");
  if (doc.contains("dark_variance")) m.dark_variance = get_number(doc, "dark_variance");
  if (doc.contains("mean_power")) m.mean_power = get_number(doc, "mean_power");
  return m;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kHistograms: return "histograms";
    case ScenarioKind::kBandwidthSweep: return "bandwidth_sweep";
    case ScenarioKind::kGemellitySweep: return "gemellity_sweep";
    case ScenarioKind::kMultiband: return "multiband";
    case ScenarioKind::kCalibrate: return "calibrate";
  }
  return "unknown";
}

std::string to_string(WidthConvention convention) {
  return convention == WidthConvention::kFull ? "full" : "half";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (auto kind : {ScenarioKind::kHistograms, ScenarioKind::kBandwidthSweep,
                    ScenarioKind::kGemellitySweep, ScenarioKind::kMultiband,
                    ScenarioKind::kCalibrate}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown scenario '" + name +
                    "' (histograms, bandwidth_sweep, gemellity_sweep, "
                    "multiband, calibrate)");
}

WidthConvention parse_width_convention(const std::string& name) {
  if (name == "half") return WidthConvention::kHalf;
  if (name == "full") return WidthConvention::kFull;
  throw ConfigError("width_convention must be 'half' or 'full', got '" + name + "'");
}

ScenarioConfig parse_config(const json& doc) {
  require_object(doc, "config");
  if (!doc.contains("scenario") || !doc.at("scenario").is_string()) {
    throw ConfigError("config requires a string 'scenario'");
  }
  ScenarioConfig c;
  c.scenario = parse_scenario_kind(doc.at("scenario").get<std::string>());
  const std::string name = to_string(c.scenario);

  std::set<std::string> allowed = kCommonKeys;
  allowed.merge(scenario_keys(c.scenario));
  reject_unknown(doc, allowed, "config for scenario '" + name + "'");

  if (doc.contains("model")) c.model = parse_model(doc.at("model"));
  if (doc.contains("n")) c.n = static_cast<std::size_t>(get_unsigned(doc, "n"));
  if (doc.contains("seeds")) {
    const auto& s = require_object(doc.at("seeds"), "seeds");
    reject_unknown(s, {"trace", "dark", "calibration"}, "seeds");
    if (s.contains("trace")) c.seeds.trace = get_unsigned(s, "trace");
    if (s.contains("dark")) c.seeds.dark = get_unsigned(s, "dark");
    if (s.contains("calibration")) c.seeds.calibration = get_unsigned(s, "calibration");
  }
  if (doc.contains("width_convention")) {
    if (!doc.at("width_convention").is_string()) {
      throw ConfigError("'width_convention' must be a string");
    }
    c.width_convention = parse_width_convention(doc.at("width_convention").get<std::string>());
  }
  if (doc.contains("quantizer") && !doc.at("quantizer").is_null()) {
    const auto& q = require_object(doc.at("quantizer"), "quantizer");
    reject_unknown(q, {"bits", "full_scale"}, "quantizer");
    QuantizerConfig qc;
    if (!q.contains("bits")) throw ConfigError("quantizer requires 'bits'");
    qc.bits = static_cast<int>(get_unsigned(q, "bits"));
    if (q.contains("full_scale") && !q.at("full_scale").is_null()) {
      qc.full_scale = get_number(q, "full_scale");
    }
    c.quantizer = qc;
  }
  if (doc.contains("subtract_dark")) {
    if (!doc.at("subtract_dark").is_boolean()) {
      throw ConfigError("'subtract_dark' must be a boolean");
    }
    c.subtract_dark = doc.at("subtract_dark").get<bool>();
  }
  if (doc.contains("sample_rate_hz")) c.sample_rate_hz = get_number(doc, "sample_rate_hz");
  if (doc.contains("demod_frequency_hz")) {
    c.demod_frequency_hz = get_number(doc, "demod_frequency_hz");
  }

  switch (c.scenario) {
    case ScenarioKind::kHistograms:
      c.center = require_number(doc, "center", name);
      c.width = require_number(doc, "width", name);
      c.bin_width = require_number(doc, "bin_width", name);
      break;
    case ScenarioKind::kBandwidthSweep:
      c.center = require_number(doc, "center", name);
      if (!doc.contains("widths")) throw ConfigError("scenario '" + name + "' requires 'widths'");
      c.widths = get_numbers(doc, "widths");
      break;
    case ScenarioKind::kGemellitySweep:
      c.center = require_number(doc, "center", name);
      c.width = require_number(doc, "width", name);
      if (doc.contains("losses") == doc.contains("gemellities_db")) {
        throw ConfigError("scenario 'gemellity_sweep' requires exactly one of "
                          "'losses' or 'gemellities_db'");
      }
      if (doc.contains("losses")) c.losses = get_numbers(doc, "losses");
      if (doc.contains("gemellities_db")) c.gemellities_db = get_numbers(doc, "gemellities_db");
      break;
    case ScenarioKind::kMultiband:
      c.width = require_number(doc, "width", name);
      if (!doc.contains("centers")) throw ConfigError("scenario '" + name + "' requires 'centers'");
      c.centers = get_numbers(doc, "centers");
      break;
    case ScenarioKind::kCalibrate:
      if (doc.contains("bin_width")) c.bin_width = get_number(doc, "bin_width");
      break;
  }

  try {
    c.model.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (c.n < 2) throw ConfigError("'n' must be at least 2");
  if (c.quantizer && (c.quantizer->bits < 1 || c.quantizer->bits > 62)) {
    throw ConfigError("quantizer bits must be in [1, 62]");
  }
  if (c.quantizer && c.quantizer->full_scale && !(*c.quantizer->full_scale > 0.0)) {
    throw ConfigError("quantizer full_scale must be positive");
  }
  if (!(c.width > 0.0) || !(c.bin_width > 0.0)) {
    throw ConfigError("'width' and 'bin_width' must be positive");
  }
  for (double w : c.widths) {
    if (!(w > 0.0)) throw ConfigError("'widths' must be positive");
  }
  if (!std::is_sorted(c.widths.begin(), c.widths.end())) {
    throw ConfigError("'widths' must be sorted ascending");
  }
  for (double l : c.losses) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("'losses' must lie in [0, 1]");
  }
  return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(c.scenario);
  j["model"] = {{"excess_signal", c.model.excess_signal},
                {"excess_idler", c.model.excess_idler},
                {"gemellity", c.model.gemellity},
                {"loss_signal", c.model.loss_signal},
                {"loss_idler", c.model.loss_idler},
                {"dark_variance", c.model.dark_variance},
                {"mean_power", c.model.mean_power}};
  j["n"] = c.n;
  j["seeds"] = {{"trace", c.seeds.trace},
                {"dark", c.seeds.dark},
                {"calibration", c.seeds.calibration}};
  j["width_convention"] = to_string(c.width_convention);
  if (c.quantizer) {
    nlohmann::ordered_json q;
    q["bits"] = c.quantizer->bits;
    q["full_scale"] = c.quantizer->full_scale ? nlohmann::ordered_json(*c.quantizer->full_scale)
                                               : nlohmann::ordered_json(nullptr);
    j["quantizer"] = q;
  } else {
    j["quantizer"] = nullptr;
  }
  j["subtract_dark"] = c.subtract_dark;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["demod_frequency_hz"] = c.demod_frequency_hz;
  switch (c.scenario) {
    case ScenarioKind::kHistograms:
      j["center"] = c.center;
      j["width"] = c.width;
      j["bin_width"] = c.bin_width;
      break;
    case ScenarioKind::kBandwidthSweep:
      j["center"] = c.center;
      j["widths"] = c.widths;
      break;
    case ScenarioKind::kGemellitySweep:
      j["center"] = c.center;
      j["width"] = c.width;
      if (!c.gemellities_db.empty()) {
        j["gemellities_db"] = c.gemellities_db;
      } else {
        j["losses"] = c.losses;
      }
      break;
    case ScenarioKind::kMultiband:
      j["width"] = c.width;
      j["centers"] = c.centers;
      break;
    case ScenarioKind::kCalibrate:
      j["bin_width"] = c.bin_width;
      break;
  }
  return j;
}

std::string config_hash(const ScenarioConfig& config) {
  return fnv1a_hex(to_json(config).dump());
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace twinbeam
