#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "skillchair/error.hpp"
#include "skillchair/evaluator.hpp"
#include "skillchair/features.hpp"
#include "skillchair/log_io.hpp"
#include "skillchair/model.hpp"
#include "skillchair/pipeline.hpp"
#include "skillchair/report.hpp"
#include "skillchair/simulator.hpp"

namespace py = pybind11;
using namespace skillchair;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> as_span(const Array& a) {
  if (a.ndim() != 1) {
    throw py::value_error("expected a 1-d array");
  }
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::array_t<double> samples_array(const PlayerLog& log) {
  py::array_t<double> out({static_cast<py::ssize_t>(log.samples.size()), static_cast<py::ssize_t>(10)});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    const double row[10] = {s.t, s.ax, s.ay, s.az, s.gx, s.gy, s.gz, s.mx, s.my, s.mz};
    for (py::ssize_t c = 0; c < 10; ++c) m(static_cast<py::ssize_t>(i), c) = row[c];
  }
  return out;
}

PlayerLog log_from_array(std::string player_id, int skill, const Array& a) {
  if (a.ndim() != 2 || (a.shape(1) != 10 && a.shape(0) > 0)) {
    throw py::value_error("samples must have shape (n, 10): t, ax, ay, az, gx, gy, gz, mx, my, mz");
  }
  PlayerLog log{std::move(player_id), skill_from_int(skill), {}};
  auto m = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    ImuSample s{m(i, 0), m(i, 1), m(i, 2), m(i, 3), m(i, 4), m(i, 5), m(i, 6), m(i, 7), m(i, 8), m(i, 9)};
    log.samples.push_back(validate_sample(s));
  }
  require_sorted(log.samples, log.player_id);
  return log;
}

ExperimentConfig config_from_string(const std::string& text) {
  return config_from_json(text.empty() ? json::object() : json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_skillchair, m) {
  m.doc() = "Seat-IMU skill classification: simulation, features, learners and evaluation";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "SkillchairError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("subject") = e.subject();
      PyErr_SetObject(type.ptr(), inst.ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  m.attr("FEATURE_NAMES") = names;
  m.attr("SAMPLE_COLUMNS") =
      std::vector<std::string>{"t", "ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"};

  py::class_<PlayerLog>(m, "PlayerLog")
      .def(py::init(&log_from_array), py::arg("player_id"), py::arg("skill"), py::arg("samples"))
      .def_readonly("player_id", &PlayerLog::player_id)
      .def_property_readonly("skill", [](const PlayerLog& l) { return skill_value(l.skill); })
      .def_property_readonly("samples", &samples_array)
      .def("__len__", [](const PlayerLog& l) { return l.samples.size(); })
      .def("__eq__", [](const PlayerLog& a, const PlayerLog& b) { return a == b; })
      .def("__repr__", [](const PlayerLog& l) {
        return "PlayerLog('" + l.player_id + "', skill=" + std::to_string(skill_value(l.skill)) +
               ", samples=" + std::to_string(l.samples.size()) + ")";
      });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("groups", &Dataset::groups)
      .def_readonly("window_index", &Dataset::window_index)
      .def_property_readonly("rows", &Dataset::rows)
      .def("players", &Dataset::players)
      .def("player_label", &Dataset::player_label)
      .def("__len__", &Dataset::rows)
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(model_key(t.kind)); })
      .def("score", &TrainedModel::score, py::arg("rows"))
      .def("to_json", [](const TrainedModel& t) { return model_to_json(t).dump(); });

  m.def("default_population_spec", [] { return json(PopulationSpec{}).dump(); });
  m.def(
      "generate_population",
      [](const std::string& spec_json) {
        PopulationSpec spec;
        if (!spec_json.empty()) from_json(json::parse(spec_json), spec);
        py::gil_scoped_release release;
        return generate_population(spec);
      },
      py::arg("spec_json") = "");
  m.def("read_logs", &read_log_directory, py::arg("directory"), py::call_guard<py::gil_scoped_release>());
  m.def("write_logs", &write_log_directory, py::arg("logs"), py::arg("directory"),
        py::call_guard<py::gil_scoped_release>());

  m.def("active_portion", [](const Array& a) { return active_portion(as_span(a)); });
  m.def("quiescent_dispersion", [](const Array& a) { return quiescent_dispersion(as_span(a)); });
  m.def(
      "lean_back_portion", [](const Array& a, double t) { return lean_back_portion(as_span(a), t); },
      py::arg("az"), py::arg("threshold_g") = kDefaultLeanThresholdG);

  m.def(
      "build_dataset",
      [](const std::vector<PlayerLog>& logs, double window_seconds, double completeness, double threshold_g) {
        FeatureOptions o;
        o.windowing.window_seconds = window_seconds;
        o.windowing.completeness_fraction = completeness;
        o.threshold_g = threshold_g;
        py::gil_scoped_release release;
        return build_dataset(logs, o);
      },
      py::arg("logs"), py::arg("window_seconds") = 180.0, py::arg("completeness") = 0.8,
      py::arg("threshold_g") = kDefaultLeanThresholdG);
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def("correlation_matrix", [](const Dataset& d) {
    const auto c = correlation_matrix(d);
    return py::make_tuple(c.names, c.values);
  });

  m.def(
      "roc_auc", [](const Array& s, const std::vector<int>& y) { return roc_auc(as_span(s), y); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "roc_curve",
      [](const Array& s, const std::vector<int>& y) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : roc_curve(as_span(s), y)) out.emplace_back(p.fpr, p.tpr);
        return out;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "fit_model",
      [](const std::string& spec_json, const Eigen::MatrixXd& X, const std::vector<int>& y, std::uint64_t seed) {
        ModelSpec spec;
        spec_from_json(json::parse(spec_json), spec);
        py::gil_scoped_release release;
        return fit_model(spec, X, y, seed);
      },
      py::arg("spec_json"), py::arg("features"), py::arg("labels"), py::arg("seed") = 0);
  m.def(
      "model_from_json", [](const std::string& text) { return model_from_json(json::parse(text)); },
      py::arg("text"));

  m.def(
      "evaluate",
      [](const Dataset& d, const std::string& config_json) {
        const auto config = config_from_string(config_json);
        py::gil_scoped_release release;
        return report_to_json(evaluate(d, config.models, config.evaluation)).dump();
      },
      py::arg("dataset"), py::arg("config_json") = "");
  m.def(
      "run",
      [](const std::string& config_json) {
        auto config = config_from_string(config_json);
        resolve_config(config);
        std::ostringstream table;
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = cmd_run(config, table);
        }
        return py::make_tuple(report_to_json(report).dump(), table.str());
      },
      py::arg("config_json") = "");
  m.def("format_auc_table", [](const std::string& report_json) { return format_auc_table(json::parse(report_json)); });
}
