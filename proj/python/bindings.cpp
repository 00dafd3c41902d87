#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>
#include <string>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/report.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/scenario.hpp"
#include "twinbeam/selection.hpp"
#include "twinbeam/source_model.hpp"
#include "twinbeam/stats.hpp"
#include "twinbeam/trace_io.hpp"

namespace py = pybind11;
using namespace twinbeam;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Report JSON with the plot tables inlined rather than named as CSV files.
std::string report_with_tables(const NoiseReport& report) {
  auto j = to_json(report);
  auto tables = nlohmann::ordered_json::array();
  for (const auto& t : report.tables) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      auto cells = nlohmann::ordered_json::array();
      for (const auto& cell : row) {
        cells.push_back(cell ? nlohmann::ordered_json(*cell) : nlohmann::ordered_json(nullptr));
      }
      rows.push_back(std::move(cells));
    }
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}});
  }
  j["tables"] = std::move(tables);
  return j.dump();
}

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "twinbeam native core";
  m.attr("__version__") = kVersion;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", error);
  py::register_exception<ShapeError>(m, "ShapeError", error);
  py::register_exception<UnphysicalModelError>(m, "UnphysicalModelError", error);
  py::register_exception<DegenerateConditioningError>(m, "DegenerateConditioningError", error);
  py::register_exception<UnderflowError>(m, "UnderflowError", error);
  py::register_exception<InvalidPartitionError>(m, "InvalidPartitionError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);

  // These two carry diagnostics as attributes on the Python exception.
  static py::exception<InsufficientSelectionError> insufficient(
      m, "InsufficientSelectionError", error.ptr());
  static py::exception<TraceParseError> parse_error(m, "TraceParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InsufficientSelectionError& e) {
      py::object inst = py::handle(insufficient.ptr())(e.what());
      inst.attr("success_rate") = e.success_rate();
      inst.attr("accepted") = e.accepted();
      PyErr_SetObject(insufficient.ptr(), inst.ptr());
    } catch (const TraceParseError& e) {
      py::object inst = py::handle(parse_error.ptr())(e.what());
      inst.attr("line") = e.line();
      PyErr_SetObject(parse_error.ptr(), inst.ptr());
    }
  });

  py::class_<NoiseLevel>(m, "NoiseLevel")
      .def_static("from_linear", &NoiseLevel::from_linear)
      .def_static("from_db", &NoiseLevel::from_db)
      .def_property_readonly("linear", &NoiseLevel::linear)
      .def_property_readonly("db", &NoiseLevel::db)
      .def_property_readonly("below_floor", &NoiseLevel::below_floor)
      .def("__eq__", [](const NoiseLevel& a, const NoiseLevel& b) { return a == b; })
      .def("__repr__", [](const NoiseLevel& n) {
        return "NoiseLevel(linear=" + format_number(n.linear()) + ")";
      });

  m.def("to_db", &to_db);
  m.def("from_db", &from_db);
  m.def("mean", [](const Array& x) { return mean(view(x)); });
  m.def("variance", [](const Array& x) { return variance(view(x)); });
  m.def("covariance", [](const Array& a, const Array& b) { return covariance(view(a), view(b)); });
  m.def("fano", [](const Array& x, double shot, double dark) { return fano(view(x), shot, dark); },
        py::arg("samples"), py::arg("shot_variance"), py::arg("dark_variance") = 0.0);
  m.def("gemellity", [](const Array& s, const Array& i) { return gemellity(view(s), view(i)); });

  py::class_<TraceMeta>(m, "TraceMeta")
      .def(py::init<>())
      .def_readwrite("sample_rate_hz", &TraceMeta::sample_rate_hz)
      .def_readwrite("demod_frequency_hz", &TraceMeta::demod_frequency_hz)
      .def_readwrite("seed", &TraceMeta::seed);

  py::class_<Trace>(m, "Trace")
      .def(py::init([](const Array& signal, const Array& idler) {
             Trace t;
             t.signal = to_vector(signal);
             t.idler = to_vector(idler);
             t.validate();
             return t;
           }),
           py::arg("signal"), py::arg("idler"))
      .def_property_readonly("signal", [](const Trace& t) { return to_array(t.signal); })
      .def_property_readonly("idler", [](const Trace& t) { return to_array(t.idler); })
      .def_readwrite("meta", &Trace::meta)
      .def("__len__", &Trace::size);

  py::class_<TwinBeamModel>(m, "TwinBeamModel")
      .def(py::init<>())
      .def(py::init([](double excess_signal, double excess_idler, double gemellity,
                       double loss_signal, double loss_idler, double dark_variance) {
             TwinBeamModel model{excess_signal, excess_idler, gemellity,
                                 loss_signal,   loss_idler,   dark_variance};
             model.validate();
             return model;
           }),
           py::kw_only(), py::arg("excess_signal") = 100.0, py::arg("excess_idler") = 100.0,
           py::arg("gemellity") = 0.178, py::arg("loss_signal") = 0.0,
           py::arg("loss_idler") = 0.0, py::arg("dark_variance") = 0.0)
      .def_readwrite("excess_signal", &TwinBeamModel::excess_signal)
      .def_readwrite("excess_idler", &TwinBeamModel::excess_idler)
      .def_readwrite("gemellity", &TwinBeamModel::gemellity)
      .def_readwrite("loss_signal", &TwinBeamModel::loss_signal)
      .def_readwrite("loss_idler", &TwinBeamModel::loss_idler)
      .def_readwrite("dark_variance", &TwinBeamModel::dark_variance)
      .def("validate", &TwinBeamModel::validate);

  py::class_<CovarianceMatrix>(m, "CovarianceMatrix")
      .def(py::init<double, double, double>(), py::arg("v_s"), py::arg("v_i"), py::arg("cov"))
      .def_readwrite("v_s", &CovarianceMatrix::v_s)
      .def_readwrite("v_i", &CovarianceMatrix::v_i)
      .def_readwrite("cov", &CovarianceMatrix::cov)
      .def_property_readonly("implied_gemellity", &CovarianceMatrix::implied_gemellity)
      .def("__repr__", [](const CovarianceMatrix& c) {
        return "CovarianceMatrix(v_s=" + format_number(c.v_s) + ", v_i=" +
               format_number(c.v_i) + ", cov=" + format_number(c.cov) + ")";
      });

  m.def("build_covariance", &build_covariance);
  m.def("apply_loss", &apply_loss, py::arg("cov"), py::arg("loss_signal"),
        py::arg("loss_idler"));
  m.def("sample_trace", &sample_trace, py::arg("cov"), py::arg("n"), py::arg("seed"));
  m.def("add_dark_noise",
        [](const Trace& t, double d, std::uint64_t seed) { return add_dark_noise(t, d, seed); },
        py::arg("trace"), py::arg("dark_variance"), py::arg("seed"));
  m.def("quantize", py::overload_cast<const Trace&, int, double>(&quantize), py::arg("trace"),
        py::arg("bits"), py::arg("full_scale"));
  m.def("default_full_scale", &default_full_scale);
  m.def("derive_seed", &derive_seed);
  m.def("generate_trace",
        [](const TwinBeamModel& model, std::size_t n, std::uint64_t trace_seed,
           std::uint64_t dark_seed) { return generate_trace(model, n, trace_seed, dark_seed); },
        py::arg("model"), py::arg("n"), py::arg("trace_seed") = 1, py::arg("dark_seed") = 2);

  py::class_<SelectionBand>(m, "SelectionBand")
      .def(py::init<double, double>(), py::arg("center"), py::arg("half_width"))
      .def_readwrite("center", &SelectionBand::center)
      .def_readwrite("half_width", &SelectionBand::half_width)
      .def_property_readonly("lower", &SelectionBand::lower)
      .def_property_readonly("upper", &SelectionBand::upper)
      .def("contains", &SelectionBand::contains);

  py::class_<ConditionalResult>(m, "ConditionalResult")
      .def_readonly("band", &ConditionalResult::band)
      .def_property_readonly("selected_signal",
                             [](const ConditionalResult& r) { return to_array(r.selected_signal); })
      .def_readonly("indices", &ConditionalResult::indices)
      .def_readonly("success_rate", &ConditionalResult::success_rate)
      .def_readonly("shot_variance", &ConditionalResult::shot_variance)
      .def_readonly("noise", &ConditionalResult::noise)
      .def_property_readonly("accepted_count", &ConditionalResult::accepted_count);

  m.def("select", &twinbeam::select, py::arg("trace"), py::arg("band"), py::arg("shot_variance") = 1.0);
  m.def("multi_select", &multi_select, py::arg("trace"), py::arg("bands"),
        py::arg("shot_variance") = 1.0);
  m.def("sweep_bandwidth", &sweep_bandwidth, py::arg("trace"), py::arg("center"),
        py::arg("half_widths"), py::arg("shot_variance") = 1.0);

  m.def("conditional_variance", &conditional_variance);
  m.def("truncated_gaussian_variance", &truncated_gaussian_variance, py::arg("sigma"),
        py::arg("center"), py::arg("half_width"));
  m.def("predicted_selected_variance", &predicted_selected_variance);
  m.def("predicted_success_rate", &predicted_success_rate);
  m.def("narrow_limit_db", &narrow_limit_db, py::arg("gemellity_db"), py::arg("excess"));

  m.def("save_trace", &save_trace, py::arg("trace"), py::arg("path"),
        py::arg("overwrite") = false);
  m.def("load_trace", &load_trace, py::arg("path"));

  m.def("_run_scenario_json",
        [](const std::string& config_text) {
          return report_with_tables(run_scenario(parse_config_text(config_text)));
        });
  m.def("_analyze_json",
        [](const Trace& trace, double shot_variance, double center,
           std::vector<double> half_widths, double bin_width) {
          AnalysisOptions opts;
          opts.shot_variance = shot_variance;
          opts.center = center;
          if (!half_widths.empty()) opts.half_widths = std::move(half_widths);
          opts.bin_width = bin_width;
          return report_with_tables(analyze_trace(trace, opts));
        });
}
