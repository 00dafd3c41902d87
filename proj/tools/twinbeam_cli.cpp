// twinbeam: simulate twin-beam traces, post-select on the idler and compare
// the conditioned signal noise with the Gaussian oracle.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twinbeam/config.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/report.hpp"
#include "twinbeam/scenario.hpp"
#include "twinbeam/stats.hpp"
#include "twinbeam/trace_io.hpp"

namespace fs = std::filesystem;
using namespace twinbeam;

namespace {

struct Output {
  std::string format = "json";
  std::string out_dir;
};

void add_output_options(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out-dir", out.out_dir,
                  "also write report.json and plot CSVs here");
}

void emit(const NoiseReport& report, const Output& out) {
  if (out.format == "csv") {
    for (const auto& table : report.tables) {
      std::cout << "# " << table.name << '\n' << table_csv_text(table);
    }
  } else {
    std::cout << report_json_text(report);
  }
  if (!out.out_dir.empty()) write_report(report, out.out_dir);
}

double shot_reference(std::optional<double> shot_variance,
                      const std::string& shot_trace) {
  if (!shot_trace.empty()) return variance(load_trace(shot_trace).signal);
  return shot_variance.value_or(1.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twinbeam: simulate and post-select twin-beam intensity traces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // simulate
  std::string sim_config;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_n;
  std::optional<double> sim_excess;
  std::optional<double> sim_gemellity_db;
  std::optional<double> sim_loss;
  std::optional<double> sim_dark;
  std::optional<int> sim_bits;
  std::optional<double> sim_full_scale;
  bool sim_overwrite = false;
  auto* simulate = app.add_subcommand("simulate", "generate a trace file from the source model");
  simulate->add_option("--config", sim_config, "scenario config (model, n, seeds)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "trace file to write")->required();
  simulate->add_option("--seed", sim_seed, "trace seed");
  simulate->add_option("-n,--samples", sim_n, "number of samples");
  simulate->add_option("--excess", sim_excess, "per-beam Fano factor V (both beams)");
  simulate->add_option("--gemellity-db", sim_gemellity_db, "gemellity in dB");
  simulate->add_option("--loss", sim_loss, "equal optical loss on both beams");
  simulate->add_option("--dark-variance", sim_dark, "dark noise variance per channel");
  simulate->add_option("--quantize-bits", sim_bits, "ADC bits");
  simulate->add_option("--full-scale", sim_full_scale, "ADC full scale (shot units)");
  simulate->add_flag("--overwrite", sim_overwrite, "replace an existing file");

  // select
  std::string sel_trace;
  double sel_center = 0.0;
  double sel_width = 0.1;
  std::string sel_convention = "half";
  std::optional<double> sel_shot;
  std::string sel_shot_trace;
  Output sel_out;
  auto* select_cmd = app.add_subcommand("select", "post-select a trace on one idler band");
  select_cmd->add_option("--trace", sel_trace, "trace file")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--center", sel_center, "band center (shot units)");
  select_cmd->add_option("--width", sel_width, "band width (shot units)")->required();
  select_cmd->add_option("--width-convention", sel_convention)
      ->check(CLI::IsMember({"half", "full"}));
  select_cmd->add_option("--shot-variance", sel_shot, "shot-noise variance of the trace units");
  select_cmd->add_option("--shot-trace", sel_shot_trace, "calibration trace file")
      ->check(CLI::ExistingFile);
  add_output_options(select_cmd, sel_out);

  // sweep
  std::string sw_config;
  std::optional<std::uint64_t> sw_seed;
  std::string sw_convention;
  Output sw_out;
  auto* sweep = app.add_subcommand("sweep", "run a scenario from a config file");
  sweep->add_option("--config", sw_config, "scenario config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seed", sw_seed, "override the trace seed");
  sweep->add_option("--width-convention", sw_convention)->check(CLI::IsMember({"half", "full"}));
  add_output_options(sweep, sw_out);

  // calibrate
  std::string cal_config;
  std::size_t cal_n = 200'000;
  std::uint64_t cal_seed = 3;
  std::string cal_save;
  Output cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "generate and check a shot-noise reference");
  calibrate->add_option("--config", cal_config, "calibrate scenario config")
      ->check(CLI::ExistingFile);
  calibrate->add_option("-n,--samples", cal_n, "number of samples");
  calibrate->add_option("--seed", cal_seed, "calibration seed");
  calibrate->add_option("--save", cal_save, "write the reference as a trace file");
  add_output_options(calibrate, cal_out);

  // analyze
  std::string an_trace;
  std::optional<double> an_shot;
  std::string an_shot_trace;
  double an_center = 0.0;
  std::vector<double> an_widths;
  std::string an_convention = "half";
  double an_bin_width = 0.5;
  Output an_out;
  auto* analyze = app.add_subcommand("analyze", "full report on an external trace");
  analyze->add_option("--trace", an_trace, "trace file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--shot-variance", an_shot, "shot-noise variance of the trace units");
  analyze->add_option("--shot-trace", an_shot_trace, "calibration trace file")
      ->check(CLI::ExistingFile);
  analyze->add_option("--center", an_center, "band center for the sweep");
  analyze->add_option("--widths", an_widths, "band widths for the sweep");
  analyze->add_option("--width-convention", an_convention)->check(CLI::IsMember({"half", "full"}));
  analyze->add_option("--bin-width", an_bin_width, "histogram bin width");
  add_output_options(analyze, an_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate) {
      ScenarioConfig c;
      if (!sim_config.empty()) c = load_config(sim_config);
      if (sim_seed) c.seeds.trace = *sim_seed;
      if (sim_n) c.n = *sim_n;
      if (sim_excess) c.model.excess_signal = c.model.excess_idler = *sim_excess;
      if (sim_gemellity_db) c.model.gemellity = from_db(*sim_gemellity_db);
      if (sim_loss) c.model.loss_signal = c.model.loss_idler = *sim_loss;
      if (sim_dark) c.model.dark_variance = *sim_dark;
      if (sim_bits) c.quantizer = QuantizerConfig{*sim_bits, sim_full_scale};
      TraceMeta meta;
      meta.sample_rate_hz = c.sample_rate_hz;
      meta.demod_frequency_hz = c.demod_frequency_hz;
      const Trace trace =
          generate_trace(c.model, c.n, c.seeds.trace, c.seeds.dark, c.quantizer, meta);
      save_trace(trace, sim_out, sim_overwrite);
      std::cerr << "wrote " << trace.size() << " samples to " << sim_out << '\n';
    } else if (*select_cmd) {
      const Trace trace = load_trace(sel_trace);
      const double width = sel_convention == "full" ? sel_width / 2.0 : sel_width;
      const double shot = shot_reference(sel_shot, sel_shot_trace);
      emit(select_report(trace, {sel_center, width}, shot), sel_out);
    } else if (*sweep) {
      ScenarioConfig c = load_config(sw_config);
      if (sw_seed) c.seeds.trace = *sw_seed;
      if (!sw_convention.empty()) c.width_convention = parse_width_convention(sw_convention);
      emit(run_scenario(c), sw_out);
    } else if (*calibrate) {
      ScenarioConfig c;
      if (!cal_config.empty()) {
        c = load_config(cal_config);
        if (c.scenario != ScenarioKind::kCalibrate) {
          throw ConfigError("calibrate needs a config with scenario 'calibrate'");
        }
      } else {
        c.scenario = ScenarioKind::kCalibrate;
        c.n = cal_n;
        c.seeds.calibration = cal_seed;
      }
      if (!cal_save.empty()) {
        Trace ref;
        ref.signal = shot_calibration_trace(c.n, c.seeds.calibration);
        ref.idler = shot_calibration_trace(c.n, c.seeds.calibration + 1);
        ref.meta.seed = c.seeds.calibration;
        save_trace(ref, cal_save);
      }
      emit(run_scenario(c), cal_out);
    } else if (*analyze) {
      const Trace trace = load_trace(an_trace);
      AnalysisOptions opts;
      opts.shot_variance = shot_reference(an_shot, an_shot_trace);
      opts.center = an_center;
      opts.bin_width = an_bin_width;
      if (!an_widths.empty()) {
        opts.half_widths.clear();
        for (double w : an_widths) {
          opts.half_widths.push_back(an_convention == "full" ? w / 2.0 : w);
        }
      }
      emit(analyze_trace(trace, opts), an_out);
    }
  } catch (const InsufficientSelectionError& e) {
    std::cerr << "twinbeam: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "twinbeam: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
