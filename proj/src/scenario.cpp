#include "twinbeam/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twinbeam/errors.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/stats.hpp"
#include "twinbeam/trace_io.hpp"

namespace twinbeam {

using nlohmann::ordered_json;

namespace {

std::optional<double> db_of(const std::optional<NoiseLevel>& level) {
  return level ? level->db() : std::nullopt;
}

std::optional<double> db_of(const std::optional<double>& linear) {
  if (!linear || !(*linear > 0.0)) return std::nullopt;
  return to_db(*linear);
}

ordered_json covariance_json(const CovarianceMatrix& c) {
  return {{"v_s", c.v_s}, {"v_i", c.v_i}, {"cov", c.cov},
          {"gemellity", c.implied_gemellity()}};
}

CovarianceMatrix estimate_covariance(const Trace& trace) {
  return {variance(trace.signal), variance(trace.idler),
          covariance(trace.signal, trace.idler)};
}

// Summary of a trace's unconditioned statistics.
ordered_json trace_statistics(const Trace& trace, double shot_variance) {
  const auto est = estimate_covariance(trace);
  return {{"samples", trace.size()},
          {"signal_fano", to_json(fano(trace.signal, shot_variance))},
          {"idler_fano", to_json(fano(trace.idler, shot_variance))},
          {"gemellity", to_json(gemellity(trace.signal, trace.idler))},
          {"covariance_estimate", covariance_json(est)}};
}

/// Measured vs predicted for one selection. `predicted_cov` is the covariance
/// the oracle should see; `dark_subtract` is removed from the measured
/// variance.
PointRecord measure_selection(const ConditionalResult& r,
                              const std::optional<CovarianceMatrix>& predicted_cov,
                              double dark_subtract) {
  PointRecord p;
  p.parameters = {{"center_sigma0", r.band.center},
                  {"half_width_sigma0", r.band.half_width}};
  p.success_rate = r.success_rate;
  p.accepted_count = r.accepted_count();
  if (r.accepted_count() >= 2) {
    p.measured = fano(r.selected_signal, r.shot_variance, dark_subtract);
    p.standard_error = variance_standard_error(r.selected_signal) / r.shot_variance;
    const double v = p.measured->linear() * r.shot_variance;
    const auto ci = variance_interval(v, r.accepted_count());
    p.interval = ConfidenceInterval{ci.level, ci.low / r.shot_variance,
                                    ci.high / r.shot_variance};
  } else {
    p.note = "insufficient selection: " + std::to_string(r.accepted_count()) +
             " sample(s) accepted";
  }
  if (predicted_cov) {
    try {
      p.predicted_success_rate =
          predicted_success_rate(std::sqrt(predicted_cov->v_i), r.band);
      if (r.band.half_width > 0.0) {
        p.predicted = predicted_selected_variance(*predicted_cov, r.band);
      }
    } catch (const UnderflowError& e) {
      if (!p.note.empty()) p.note += "; ";
      p.note += std::string("no prediction: ") + e.what();
    }
  }
  return p;
}

/// Oracle covariance for the selected signal: dark noise on both channels,
/// removed again from the signal when it is subtracted from the measurement.
CovarianceMatrix prediction_covariance(const TwinBeamModel& model,
                                       bool subtract_dark) {
  auto c = observed_covariance(model);
  if (subtract_dark) c.v_s -= model.dark_variance;
  return c;
}

PlotTable histogram_table(const std::string& name, std::span<const double> samples,
                          double bin_width, ordered_json& fits) {
  PlotTable t{name, {"bin_center", "probability", "gaussian_fit"}, {}};
  const double mu = mean(samples);
  const double sd = samples.size() >= 2 ? std::sqrt(variance(samples)) : 0.0;
  fits[name] = {{"mean", mu}, {"std", sd}};
  for (const auto& bin : histogram(samples, bin_width)) {
    std::optional<double> fit;
    if (sd > 0.0) {
      fit = normal_band_probability((bin.center - 0.5 * bin_width - mu) / sd,
                                    (bin.center + 0.5 * bin_width - mu) / sd);
    }
    t.rows.push_back({bin.center, bin.probability, fit});
  }
  return t;
}

std::vector<double> scaled(std::span<const double> x, double factor) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= factor;
  return out;
}

NoiseReport make_report(const ScenarioConfig& c) {
  NoiseReport r;
  r.scenario = to_string(c.scenario);
  r.provenance.config_hash = config_hash(c);
  r.provenance.seeds = c.seeds;
  r.summary["config"] = to_json(c);
  return r;
}

TraceMeta meta_of(const ScenarioConfig& c) {
  TraceMeta m;
  m.sample_rate_hz = c.sample_rate_hz;
  m.demod_frequency_hz = c.demod_frequency_hz;
  return m;
}

void add_oracle_summary(NoiseReport& r, const CovarianceMatrix& cov) {
  r.summary["observed_covariance"] = covariance_json(cov);
  const double cv = conditional_variance(cov);
  r.summary["oracle"] = {{"conditional_variance", to_json(NoiseLevel::from_linear(cv))},
                         {"regression_slope", cov.cov / cov.v_i}};
}

NoiseReport run_histograms(const ScenarioConfig& c) {
  NoiseReport r = make_report(c);
  const Trace trace = generate_trace(c.model, c.n, c.seeds.trace, c.seeds.dark,
                                     c.quantizer, meta_of(c));
  const auto calib = shot_calibration_trace(c.n, c.seeds.calibration);
  const double shot = variance(calib);
  const double dark = c.subtract_dark ? c.model.dark_variance : 0.0;
  const auto obs = observed_covariance(c.model);
  r.summary["shot_variance"] = shot;
  r.summary["trace"] = trace_statistics(trace, shot);
  add_oracle_summary(r, obs);

  const SelectionBand band{c.center, c.half_width(c.width)};
  const auto sel = sweep_bandwidth(trace, band.center, {band.half_width}, shot);
  const ConditionalResult& cond = sel.front().second;

  PointRecord idler;
  idler.parameters = {{"channel_idler", 1.0}};
  idler.measured = fano(trace.idler, shot, dark);
  idler.predicted = obs.v_i - dark;
  idler.standard_error = variance_standard_error(trace.idler) / shot;
  idler.note = "unconditioned idler";
  r.points.push_back(idler);

  PointRecord conditioned =
      measure_selection(cond, prediction_covariance(c.model, c.subtract_dark), dark);
  if (conditioned.note.empty()) conditioned.note = "conditioned signal";
  r.points.push_back(conditioned);

  PointRecord shot_point;
  shot_point.parameters = {{"channel_shot", 1.0}};
  shot_point.measured = fano(calib, 1.0);
  shot_point.predicted = 1.0;
  shot_point.standard_error = variance_standard_error(calib);
  shot_point.note = "shot calibration against nominal unit variance";
  r.points.push_back(shot_point);

  // Histograms in units of the measured shot-noise width.
  const double unit = 1.0 / std::sqrt(shot);
  ordered_json fits = ordered_json::object();
  r.tables.push_back(
      histogram_table("histograms_idler", scaled(trace.idler, unit), c.bin_width, fits));
  if (!cond.selected_signal.empty()) {
    r.tables.push_back(histogram_table("histograms_conditioned",
                                       scaled(cond.selected_signal, unit),
                                       c.bin_width, fits));
  }
  r.tables.push_back(histogram_table("histograms_shot", scaled(calib, unit),
                                     c.bin_width, fits));
  r.summary["gaussian_fits"] = fits;
  return r;
}

void add_sweep_row(PlotTable& t, const PointRecord& p, double half_width) {
  t.rows.push_back({half_width, db_of(p.measured), db_of(p.predicted), p.success_rate,
                    static_cast<double>(p.accepted_count.value_or(0))});
}

NoiseReport run_bandwidth_sweep(const ScenarioConfig& c) {
  NoiseReport r = make_report(c);
  const Trace trace = generate_trace(c.model, c.n, c.seeds.trace, c.seeds.dark,
                                     c.quantizer, meta_of(c));
  const double shot = variance(shot_calibration_trace(c.n, c.seeds.calibration));
  const double dark = c.subtract_dark ? c.model.dark_variance : 0.0;
  r.summary["shot_variance"] = shot;
  r.summary["trace"] = trace_statistics(trace, shot);
  add_oracle_summary(r, observed_covariance(c.model));

  std::vector<double> half_widths;
  for (double w : c.widths) half_widths.push_back(c.half_width(w));
  const auto pred_cov = prediction_covariance(c.model, c.subtract_dark);

  PlotTable t{"bandwidth_sweep",
              {"half_width_sigma0", "measured_db", "predicted_db", "success_rate",
               "accepted_count"},
              {}};
  for (const auto& [hw, result] : sweep_bandwidth(trace, c.center, half_widths, shot)) {
    PointRecord p = measure_selection(result, pred_cov, dark);
    add_sweep_row(t, p, hw);
    r.points.push_back(std::move(p));
  }
  r.tables.push_back(std::move(t));
  return r;
}

NoiseReport run_gemellity_sweep(const ScenarioConfig& c) {
  NoiseReport r = make_report(c);
  const double shot = variance(shot_calibration_trace(c.n, c.seeds.calibration));
  const double dark = c.subtract_dark ? c.model.dark_variance : 0.0;
  r.summary["shot_variance"] = shot;

  const bool by_loss = !c.losses.empty();
  const auto& grid = by_loss ? c.losses : c.gemellities_db;
  const SelectionBand band{c.center, c.half_width(c.width)};

  PlotTable t{"gemellity_sweep", {"loss", "gemellity_db", "measured_db", "predicted_db"}, {}};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    TwinBeamModel m = c.model;
    double loss = 0.0;
    if (by_loss) {
      loss = grid[j];
      m.loss_signal = 1.0 - (1.0 - m.loss_signal) * (1.0 - loss);
      m.loss_idler = 1.0 - (1.0 - m.loss_idler) * (1.0 - loss);
    } else {
      m.gemellity = from_db(grid[j]);
    }

    PointRecord p;
    try {
      m.validate();
    } catch (const Error& e) {
      p.parameters = {{by_loss ? "loss" : "gemellity_db_configured", grid[j]}};
      p.note = std::string("skipped: ") + e.what();
      t.rows.push_back({loss, std::nullopt, std::nullopt, std::nullopt});
      r.points.push_back(std::move(p));
      continue;
    }

    const Trace trace = generate_trace(m, c.n, derive_seed(c.seeds.trace, j),
                                       derive_seed(c.seeds.dark, j), c.quantizer,
                                       meta_of(c));
    const auto obs = observed_covariance(m);
    const auto sel = sweep_bandwidth(trace, band.center, {band.half_width}, shot);
    p = measure_selection(sel.front().second, prediction_covariance(m, c.subtract_dark),
                          dark);

    const auto g = gemellity(trace.signal, trace.idler);
    const double g_linear = std::max(0.0, g.linear() - dark) ;
    const auto g_db = db_of(std::optional<double>(g_linear));
    p.parameters.insert(p.parameters.begin(),
                        {{"loss", loss},
                         {"gemellity_configured", obs.implied_gemellity()},
                         {"gemellity_measured", g_linear}});
    p.parameters.emplace_back("narrow_limit_variance", conditional_variance(obs));
    t.rows.push_back({loss, g_db, db_of(p.measured), db_of(p.predicted)});
    r.points.push_back(std::move(p));
  }
  r.tables.push_back(std::move(t));
  return r;
}

NoiseReport run_multiband(const ScenarioConfig& c) {
  NoiseReport r = make_report(c);
  const Trace trace = generate_trace(c.model, c.n, c.seeds.trace, c.seeds.dark,
                                     c.quantizer, meta_of(c));
  const double shot = variance(shot_calibration_trace(c.n, c.seeds.calibration));
  const double dark = c.subtract_dark ? c.model.dark_variance : 0.0;
  r.summary["shot_variance"] = shot;
  r.summary["trace"] = trace_statistics(trace, shot);
  add_oracle_summary(r, observed_covariance(c.model));

  std::vector<SelectionBand> bands;
  for (double center : c.centers) bands.push_back({center, c.half_width(c.width)});
  const auto pred_cov = prediction_covariance(c.model, c.subtract_dark);

  PlotTable t{"multiband", {"center_sigma0", "measured_db", "success_rate", "predicted_rate"}, {}};
  std::size_t accepted = 0;
  for (const auto& result : multi_select(trace, bands, shot)) {
    PointRecord p = measure_selection(result, pred_cov, dark);
    accepted += result.accepted_count();
    t.rows.push_back({result.band.center, db_of(p.measured), p.success_rate,
                      p.predicted_success_rate});
    r.points.push_back(std::move(p));
  }
  r.summary["aggregate_success_rate"] =
      static_cast<double>(accepted) / static_cast<double>(trace.size());
  r.tables.push_back(std::move(t));
  return r;
}

NoiseReport run_calibrate(const ScenarioConfig& c) {
  NoiseReport r = make_report(c);
  const auto calib = shot_calibration_trace(c.n, c.seeds.calibration);
  const auto other = shot_calibration_trace(c.n, derive_seed(c.seeds.calibration, 0));
  const double shot = variance(calib);
  r.summary["shot_variance"] = shot;
  r.summary["self_fano"] = to_json(fano(calib, shot));
  const double corr = covariance(calib, other) / std::sqrt(shot * variance(other));
  r.summary["independent_reference_correlation"] = corr;

  PointRecord p;
  p.parameters = {{"samples", static_cast<double>(c.n)}};
  p.measured = fano(calib, 1.0);
  p.predicted = 1.0;
  p.standard_error = variance_standard_error(calib);
  p.interval = variance_interval(shot, calib.size());
  p.note = "shot calibration against nominal unit variance";
  r.points.push_back(std::move(p));

  ordered_json fits = ordered_json::object();
  r.tables.push_back(histogram_table("calibrate_histogram", calib, c.bin_width, fits));
  r.summary["gaussian_fits"] = fits;
  return r;
}

}  // namespace

CovarianceMatrix observed_covariance(const TwinBeamModel& model) {
  auto c = apply_loss(build_covariance(model), model.loss_signal, model.loss_idler);
  c.v_s += model.dark_variance;
  c.v_i += model.dark_variance;
  return c;
}

Trace generate_trace(const TwinBeamModel& model, std::size_t n,
                     std::uint64_t trace_seed, std::uint64_t dark_seed,
                     const std::optional<QuantizerConfig>& quantizer,
                     const TraceMeta& meta) {
  const auto cov =
      apply_loss(build_covariance(model), model.loss_signal, model.loss_idler);
  Trace trace = sample_trace(cov, n, trace_seed);
  if (model.dark_variance > 0.0) {
    trace = add_dark_noise(trace, model.dark_variance, dark_seed);
  }
  if (quantizer) {
    const double fs = quantizer->full_scale.value_or(
        default_full_scale(observed_covariance(model)));
    trace = quantize(trace, quantizer->bits, fs);
  }
  trace.meta = meta;
  trace.meta.seed = trace_seed;
  return trace;
}

double calibrate_shot_variance(std::size_t n, std::uint64_t seed) {
  return variance(shot_calibration_trace(n, seed));
}

NoiseReport run_scenario(const ScenarioConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::kHistograms: return run_histograms(config);
    case ScenarioKind::kBandwidthSweep: return run_bandwidth_sweep(config);
    case ScenarioKind::kGemellitySweep: return run_gemellity_sweep(config);
    case ScenarioKind::kMultiband: return run_multiband(config);
    case ScenarioKind::kCalibrate: return run_calibrate(config);
  }
  throw ConfigError("unhandled scenario");
}

NoiseReport analyze_trace(const Trace& trace, const AnalysisOptions& options) {
  trace.validate();
  if (trace.size() < 2) throw InsufficientDataError("analyze needs at least 2 samples");
  if (!(options.shot_variance > 0.0)) throw DomainError("shot variance must be positive");

  std::vector<double> widths = options.half_widths;
  std::sort(widths.begin(), widths.end());

  NoiseReport r;
  r.scenario = "analyze";
  ordered_json opts = {{"shot_variance", options.shot_variance},
                       {"center", options.center},
                       {"half_widths", widths},
                       {"bin_width", options.bin_width},
                       {"samples", trace.size()},
                       {"sample_rate_hz", trace.meta.sample_rate_hz},
                       {"demod_frequency_hz", trace.meta.demod_frequency_hz},
                       {"seed", trace.meta.seed}};
  r.provenance.config_hash = fnv1a_hex(opts.dump());
  r.provenance.seeds = {trace.meta.seed, 0, 0};
  r.summary["options"] = opts;
  r.summary["shot_variance"] = options.shot_variance;
  r.summary["trace"] = trace_statistics(trace, options.shot_variance);

  std::optional<CovarianceMatrix> est = estimate_covariance(trace);
  try {
    add_oracle_summary(r, *est);
  } catch (const Error& e) {
    r.summary["oracle"] = {{"error", e.what()}};
    est.reset();
  }

  PlotTable t{"analyze_sweep",
              {"half_width_sigma0", "measured_db", "predicted_db", "success_rate",
               "accepted_count"},
              {}};
  for (const auto& [hw, result] :
       sweep_bandwidth(trace, options.center, widths, options.shot_variance)) {
    PointRecord p = measure_selection(result, est, 0.0);
    add_sweep_row(t, p, hw);
    r.points.push_back(std::move(p));
  }
  r.tables.push_back(std::move(t));

  ordered_json fits = ordered_json::object();
  r.tables.push_back(histogram_table(
      "analyze_idler_histogram", scaled(trace.idler, 1.0 / std::sqrt(options.shot_variance)),
      options.bin_width, fits));
  r.summary["gaussian_fits"] = fits;
  return r;
}

NoiseReport select_report(const Trace& trace, const SelectionBand& band,
                          double shot_variance) {
  const ConditionalResult result = select(trace, band, shot_variance);

  NoiseReport r;
  r.scenario = "select";
  ordered_json opts = {{"center", band.center},
                       {"half_width", band.half_width},
                       {"shot_variance", shot_variance},
                       {"samples", trace.size()},
                       {"seed", trace.meta.seed}};
  r.provenance.config_hash = fnv1a_hex(opts.dump());
  r.provenance.seeds = {trace.meta.seed, 0, 0};
  r.summary["options"] = opts;
  r.summary["trace"] = trace_statistics(trace, shot_variance);

  std::optional<CovarianceMatrix> est = estimate_covariance(trace);
  try {
    add_oracle_summary(r, *est);
  } catch (const Error& e) {
    r.summary["oracle"] = {{"error", e.what()}};
    est.reset();
  }
  PointRecord p = measure_selection(result, est, 0.0);
  PlotTable t{"select",
              {"half_width_sigma0", "measured_db", "predicted_db", "success_rate",
               "accepted_count"},
              {}};
  add_sweep_row(t, p, band.half_width);
  r.points.push_back(std::move(p));
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace twinbeam
