#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "transwave/core_model.hpp"
#include "transwave/emt.hpp"
#include "transwave/error.hpp"
#include "transwave/event_locator.hpp"
#include "transwave/hybrid.hpp"
#include "transwave/model_io.hpp"
#include "transwave/presets.hpp"
#include "transwave/swing.hpp"
#include "transwave/time_series.hpp"
#include "transwave/wave_analysis.hpp"

namespace py = pybind11;
using namespace transwave;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transient wave lab: swing, EMT and hybrid engines, wave analysis and event location";
  m.attr("__version__") = TRANSWAVE_VERSION;

  static py::exception<Error> error_type(m, "TranswaveError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(std::string(to_string(e.kind())) + ": " + e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // ---- model ---------------------------------------------------------------
  py::class_<SystemBases>(m, "SystemBases")
      .def(py::init<>())
      .def_readwrite("s_base", &SystemBases::s_base)
      .def_readwrite("v_base", &SystemBases::v_base)
      .def_readwrite("f_nominal", &SystemBases::f_nominal)
      .def_property_readonly("z_base", &SystemBases::z_base)
      .def_property_readonly("omega_s", &SystemBases::omega_s);

  py::class_<Point2>(m, "Point2")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point2::x)
      .def_readwrite("y", &Point2::y)
      .def("__iter__", [](const Point2& p) { return py::iter(py::make_tuple(p.x, p.y)); })
      .def("__repr__", [](const Point2& p) { return "Point2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });
  py::implicitly_convertible<py::tuple, Point2>();

  py::class_<Bus>(m, "Bus")
      .def(py::init<>())
      .def_readwrite("id", &Bus::id)
      .def_readwrite("coord", &Bus::coord)
      .def_readwrite("gen_rating", &Bus::gen_rating)
      .def_readwrite("inertia_h", &Bus::inertia_h)
      .def_readwrite("coherent_count", &Bus::coherent_count)
      .def_readwrite("load_p", &Bus::load_p)
      .def_readwrite("emf_pu", &Bus::emf_pu);

  py::enum_<LengthUnit>(m, "LengthUnit").value("Meter", LengthUnit::Meter).value("Kilometer", LengthUnit::Kilometer);

  py::class_<Line>(m, "Line")
      .def(py::init<>())
      .def_readwrite("from_bus", &Line::from_bus)
      .def_readwrite("to_bus", &Line::to_bus)
      .def_readwrite("length", &Line::length)
      .def_readwrite("r_per_len", &Line::r_per_len)
      .def_readwrite("l_per_len", &Line::l_per_len)
      .def_readwrite("c_per_len", &Line::c_per_len)
      .def_readwrite("len_unit_em", &Line::len_unit_em);

  py::class_<NetworkModel>(m, "NetworkModel")
      .def(py::init<>())
      .def_readwrite("bases", &NetworkModel::bases)
      .def_readwrite("buses", &NetworkModel::buses)
      .def_readwrite("lines", &NetworkModel::lines)
      .def_property_readonly("bus_count", &NetworkModel::bus_count)
      .def_property_readonly("line_count", &NetworkModel::line_count)
      .def("to_json", [](const NetworkModel& n) { return to_json(n).dump(2); })
      .def_static("from_json", [](const std::string& text) {
        auto doc = parse_document(text);
        if (!doc.has_network) throw Error(ErrorKind::Parse, "document defines no network");
        return doc.network;
      });

  py::enum_<DisturbanceKind>(m, "DisturbanceKind")
      .value("GenerationTrip", DisturbanceKind::GenerationTrip)
      .value("LoadShed", DisturbanceKind::LoadShed)
      .value("LineTrip", DisturbanceKind::LineTrip)
      .value("Fault", DisturbanceKind::Fault);

  py::class_<DisturbanceSpec>(m, "DisturbanceSpec")
      .def(py::init<>())
      .def(py::init([](DisturbanceKind kind, int target, double t_onset, double magnitude, double duration) {
             return DisturbanceSpec{kind, target, t_onset, magnitude, duration};
           }),
           py::arg("kind"), py::arg("target"), py::arg("t_onset") = 0.0, py::arg("magnitude") = 0.0,
           py::arg("duration") = DisturbanceSpec::kDefaultFaultDuration)
      .def_readwrite("kind", &DisturbanceSpec::kind)
      .def_readwrite("target", &DisturbanceSpec::target)
      .def_readwrite("t_onset", &DisturbanceSpec::t_onset)
      .def_readwrite("magnitude", &DisturbanceSpec::magnitude)
      .def_readwrite("duration", &DisturbanceSpec::duration);

  py::class_<Violation>(m, "Violation")
      .def_readonly("code", &Violation::code)
      .def_readonly("message", &Violation::message)
      .def("__repr__", [](const Violation& v) { return v.code + ": " + v.message; });

  m.def("validate", py::overload_cast<const NetworkModel&>(&validate), py::arg("model"));
  m.def("validate_disturbances",
        py::overload_cast<const NetworkModel&, const std::vector<DisturbanceSpec>&>(&validate),
        py::arg("model"), py::arg("disturbances"));
  m.def("build_ring", &build_ring, py::arg("n_buses"), py::arg("line_km"), py::arg("bus_template"),
        py::arg("line_template"), py::arg("bases") = SystemBases{});
  m.def("build_mesh", &build_mesh, py::arg("rows"), py::arg("cols"), py::arg("spacing_km"),
        py::arg("bus_template"), py::arg("line_template"), py::arg("bases") = SystemBases{});
  m.def("path_distances", &path_distances, py::arg("model"), py::arg("origin"),
        py::arg("line_in_service") = std::vector<bool>{});

  auto pm = m.def_submodule("presets", "Reference networks and scenarios");
  pm.def("default_bus", &presets::default_bus);
  pm.def("default_line", &presets::default_line);
  pm.def("ring23", &presets::ring23);
  pm.def("mesh", &presets::mesh, py::arg("rows") = 7, py::arg("cols") = 7, py::arg("spacing_km") = 100.0);
  pm.def("scenario", &presets::scenario, py::arg("name"));
  pm.def("scenario_names", &presets::scenario_names);
  pm.def("scenario_network", &presets::scenario_network, py::arg("name"));

  // ---- waveforms -----------------------------------------------------------
  py::enum_<Quantity>(m, "Quantity")
      .value("Delta", Quantity::Delta)
      .value("Domega", Quantity::Domega)
      .value("Voltage", Quantity::Voltage);

  py::class_<TimeSeriesSet>(m, "TimeSeriesSet")
      .def_property_readonly("times", [](const TimeSeriesSet& s) { return to_array(s.times()); })
      .def_property_readonly("sample_count", &TimeSeriesSet::sample_count)
      .def("values", [](const TimeSeriesSet& s, int bus, Quantity q) { return to_array(s.values(bus, q)); },
           py::arg("bus"), py::arg("quantity"))
      .def("channel_names", [](const TimeSeriesSet& s) {
        std::vector<std::string> names;
        for (const auto& c : s.channels()) names.push_back(c.name());
        return names;
      })
      .def_static("read_csv", py::overload_cast<const std::filesystem::path&>(&TimeSeriesSet::read_csv))
      .def("write_csv", py::overload_cast<const std::filesystem::path&>(&TimeSeriesSet::write_csv, py::const_));

  // ---- engines -------------------------------------------------------------
  py::class_<SwingConfig>(m, "SwingConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SwingConfig::dt)
      .def_readwrite("t_end", &SwingConfig::t_end)
      .def_readwrite("damping_d", &SwingConfig::damping_d)
      .def_readwrite("record_every", &SwingConfig::record_every);

  py::class_<EmtConfig>(m, "EmtConfig")
      .def(py::init<>())
      .def_readwrite("dt", &EmtConfig::dt)
      .def_readwrite("t_end", &EmtConfig::t_end)
      .def_readwrite("source_resistance", &EmtConfig::source_resistance)
      .def_readwrite("source_xd_pu", &EmtConfig::source_xd_pu)
      .def_readwrite("preroll_cycles", &EmtConfig::preroll_cycles)
      .def_readwrite("record_every", &EmtConfig::record_every);

  py::class_<HybridConfig>(m, "HybridConfig")
      .def(py::init<>())
      .def_readwrite("dt_em", &HybridConfig::dt_em)
      .def_readwrite("rate_ratio", &HybridConfig::rate_ratio)
      .def_readwrite("t_end", &HybridConfig::t_end)
      .def_readwrite("damping_d", &HybridConfig::damping_d)
      .def_readwrite("record_every", &HybridConfig::record_every)
      .def_readwrite("emt", &HybridConfig::emt);

  m.def("run_swing", &run_swing, py::arg("model"), py::arg("config"), py::arg("disturbances"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_emt", &run_emt, py::arg("model"), py::arg("config"), py::arg("disturbances"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_hybrid", &run_hybrid, py::arg("model"), py::arg("config"), py::arg("disturbances"),
        py::call_guard<py::gil_scoped_release>());
  m.def("propagation_speed_em", &propagation_speed_em, py::arg("line"));
  m.def("surge_impedance", &surge_impedance, py::arg("line"));

  // ---- analysis ------------------------------------------------------------
  m.attr("LIGHT_SPEED") = kLightSpeed;
  m.def("inertia_density", &inertia_density, py::arg("h"), py::arg("coh"), py::arg("n_groups"), py::arg("g_mw"),
        py::arg("s_base"), py::arg("line_km"));
  m.def(
      "speed_mech_theory",
      [](double omega, double v_pu, double theta, double h, double z_abs) {
        return speed_mech_theory({omega, v_pu, theta, h, z_abs});
      },
      py::arg("omega"), py::arg("v_pu"), py::arg("theta"), py::arg("h"), py::arg("z_abs"));

  py::class_<TheoryReport>(m, "TheoryReport")
      .def_readonly("h_s_per_km", &TheoryReport::h_s_per_km)
      .def_readonly("v_mech_kms", &TheoryReport::v_mech_kms)
      .def_readonly("v_em_ms", &TheoryReport::v_em_ms)
      .def_readonly("light_speed_ms", &TheoryReport::light_speed_ms);
  m.def("theory_report", &theory_report, py::arg("model"));

  py::class_<BusArrival>(m, "BusArrival")
      .def_readonly("bus", &BusArrival::bus)
      .def_readonly("distance_km", &BusArrival::distance_km)
      .def_readonly("arrival_t", &BusArrival::arrival_t);
  py::class_<ArrivalReport>(m, "ArrivalReport")
      .def_readonly("buses", &ArrivalReport::buses)
      .def_readonly("threshold", &ArrivalReport::threshold)
      .def_readonly("fitted_speed_kms", &ArrivalReport::fitted_speed_kms)
      .def_readonly("fit_intercept_km", &ArrivalReport::fit_intercept_km)
      .def_readonly("fit_r2", &ArrivalReport::fit_r2)
      .def_property_readonly("detected", &ArrivalReport::detected);
  m.def("default_threshold", &default_threshold, py::arg("quantity"), py::arg("model"));
  m.def("detect_arrivals", &detect_arrivals, py::arg("series"), py::arg("quantity"), py::arg("origin"),
        py::arg("model"), py::arg("threshold"), py::arg("t_onset") = 0.0);

  py::class_<ReflectionReport>(m, "ReflectionReport")
      .def_readonly("meeting_buses", &ReflectionReport::meeting_buses)
      .def_readonly("meeting_time", &ReflectionReport::meeting_time)
      .def_readonly("path_time_a", &ReflectionReport::path_time_a)
      .def_readonly("path_time_b", &ReflectionReport::path_time_b)
      .def_readonly("paths_agree", &ReflectionReport::paths_agree);
  m.def("detect_reflection", &detect_reflection, py::arg("series"), py::arg("origin"), py::arg("model"),
        py::arg("threshold") = 1e-4, py::arg("t_onset") = 0.0);

  py::enum_<EventClass>(m, "EventClass")
      .value("NoEvent", EventClass::NoEvent)
      .value("GenerationTrip", EventClass::GenerationTrip)
      .value("LoadShed", EventClass::LoadShed)
      .value("LineTrip", EventClass::LineTrip);
  py::class_<Classification>(m, "Classification")
      .def_readonly("kind", &Classification::kind)
      .def_readonly("late_mean", &Classification::late_mean)
      .def_readonly("energy", &Classification::energy);
  m.def("classify_event", &classify_event, py::arg("series"), py::arg("eps") = 1e-4,
        py::arg("noise_floor") = 1e-12);

  // ---- location ------------------------------------------------------------
  py::class_<SensorArrival>(m, "SensorArrival")
      .def(py::init([](std::string id, Point2 pos, double t, double w) { return SensorArrival{std::move(id), pos, t, w}; }),
           py::arg("sensor_id"), py::arg("position"), py::arg("arrival_t"), py::arg("weight") = 1.0)
      .def_readwrite("sensor_id", &SensorArrival::sensor_id)
      .def_readwrite("position", &SensorArrival::position)
      .def_readwrite("arrival_t", &SensorArrival::arrival_t)
      .def_readwrite("weight", &SensorArrival::weight);

  py::class_<LocationEstimate>(m, "LocationEstimate")
      .def_readonly("position", &LocationEstimate::position)
      .def_readonly("origin_t", &LocationEstimate::origin_t)
      .def_readonly("speed_used", &LocationEstimate::speed_used)
      .def_readonly("residual_rms", &LocationEstimate::residual_rms)
      .def_readonly("refined", &LocationEstimate::refined)
      .def_readonly("degenerate", &LocationEstimate::degenerate)
      .def_readonly("warning", &LocationEstimate::warning);

  m.def("synthetic_arrivals", &synthetic_arrivals, py::arg("sensors"), py::arg("event"), py::arg("t0"),
        py::arg("speed_kms"));
  m.def(
      "locate", [](const std::vector<SensorArrival>& a, double v) { return locate(a, v); }, py::arg("arrivals"),
      py::arg("speed_kms"));
  m.def(
      "estimate_speed_and_locate", [](const std::vector<SensorArrival>& a) { return estimate_speed_and_locate(a); },
      py::arg("arrivals"));
}
