#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parkcharge/harness.hpp"

namespace py = pybind11;
using namespace parkcharge;

namespace {

py::dict summary_dict(const WelfareSummary& s) {
  py::dict d;
  d["arrivals"] = s.arrivals;
  d["admitted"] = s.admitted;
  d["total_value"] = s.total_value;
  d["total_utility"] = s.total_utility;
  d["payments"] = s.total_payments;
  d["electricity_cost"] = s.electricity_cost;
  d["welfare"] = s.welfare;
  d["solar_used"] = s.solar_used;
  d["solar_available"] = s.solar_available;
  d["solar_fraction"] = s.solar_fraction();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Posted-price EV charging: pricing, online mechanism, baselines and experiments";
  m.attr("__version__") = "0.1.0";

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<>())
      .def_readwrite("horizon", &TimeGrid::horizon)
      .def_readwrite("slot_hours", &TimeGrid::slot_hours);

  py::class_<FacilityConfig>(m, "FacilityConfig")
      .def(py::init<>())
      .def_readwrite("id", &FacilityConfig::id)
      .def_readwrite("evse_count", &FacilityConfig::evse_count)
      .def_readwrite("cables_per_evse", &FacilityConfig::cables_per_evse)
      .def_readwrite("evse_max_energy", &FacilityConfig::evse_max_energy)
      .def_readwrite("transformer_limit", &FacilityConfig::transformer_limit)
      .def_readwrite("solar", &FacilityConfig::solar)
      .def_readwrite("solar_rating", &FacilityConfig::solar_rating)
      .def_readwrite("grid_price", &FacilityConfig::grid_price);

  py::class_<System>(m, "System")
      .def(py::init<>())
      .def_readwrite("grid", &System::grid)
      .def_readwrite("facilities", &System::facilities)
      .def("index_of", &System::index_of);

  py::class_<FacilityValuation>(m, "FacilityValuation")
      .def(py::init<>())
      .def(py::init([](int id, double v) { return FacilityValuation{id, v}; }))
      .def_readwrite("facility_id", &FacilityValuation::facility_id)
      .def_readwrite("value", &FacilityValuation::value);

  py::class_<UserRequest>(m, "UserRequest")
      .def(py::init<>())
      .def(py::init([](int id, Slot submission, Slot arrival, Slot departure, Energy energy,
                       std::vector<std::pair<int, double>> prefs) {
             UserRequest u{id, submission, arrival, departure, energy, {}};
             for (auto& [f, v] : prefs) u.preferences.push_back({f, v});
             return u;
           }),
           py::arg("id"), py::arg("submission"), py::arg("arrival"), py::arg("departure"),
           py::arg("energy"), py::arg("preferences"))
      .def_readwrite("id", &UserRequest::id)
      .def_readwrite("submission", &UserRequest::submission)
      .def_readwrite("arrival", &UserRequest::arrival)
      .def_readwrite("departure", &UserRequest::departure)
      .def_readwrite("energy", &UserRequest::energy)
      .def_readwrite("preferences", &UserRequest::preferences);

  py::class_<ScheduleOption>(m, "ScheduleOption")
      .def(py::init<>())
      .def_readwrite("facility_id", &ScheduleOption::facility_id)
      .def_readwrite("evse", &ScheduleOption::evse)
      .def_readwrite("start", &ScheduleOption::start)
      .def_readwrite("end", &ScheduleOption::end)
      .def_readwrite("charge", &ScheduleOption::charge)
      .def("total_energy", &ScheduleOption::total_energy);

  py::class_<ValuationBounds>(m, "ValuationBounds")
      .def(py::init<>())
      .def_readwrite("cable_lower", &ValuationBounds::cable_lower)
      .def_readwrite("cable_upper", &ValuationBounds::cable_upper)
      .def_readwrite("energy_lower", &ValuationBounds::energy_lower)
      .def_readwrite("energy_upper", &ValuationBounds::energy_upper)
      .def_readwrite("procurement_lower", &ValuationBounds::procurement_lower)
      .def_readwrite("procurement_upper", &ValuationBounds::procurement_upper)
      .def_readwrite("aggregate_r", &ValuationBounds::aggregate_r);

  py::class_<LevelSet>(m, "LevelSet")
      .def(py::init<>())
      .def(py::init([](Energy max_level) { return LevelSet{max_level}; }))
      .def_readwrite("max_level", &LevelSet::max_level);

  py::class_<RatioBounds>(m, "RatioBounds")
      .def_readonly("alpha_1", &RatioBounds::alpha_1)
      .def_readonly("alpha_2", &RatioBounds::alpha_2)
      .def_readonly("alpha_3", &RatioBounds::alpha_3);

  py::class_<Decision>(m, "Decision")
      .def_readonly("user_id", &Decision::user_id)
      .def_readonly("accepted", &Decision::accepted)
      .def_readonly("valuation", &Decision::valuation)
      .def_readonly("utility", &Decision::utility)
      .def_readonly("option", &Decision::option)
      .def_readonly("payment", &Decision::payment)
      .def_readonly("delivered", &Decision::delivered);

  py::register_exception<BoundsError>(m, "BoundsError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InstanceTooLarge>(m, "InstanceTooLarge", PyExc_RuntimeError);
  py::register_exception<CapacityFault>(m, "CapacityFault", PyExc_RuntimeError);

  m.def("aggregate_resources", &aggregate_resources);
  m.def("cable_price", &cable_price, py::arg("demand"), py::arg("facility"), py::arg("bounds"));
  m.def("energy_price", &energy_price, py::arg("demand"), py::arg("facility"), py::arg("bounds"));
  m.def("procurement_price",
        py::overload_cast<double, Slot, const FacilityConfig&, const ValuationBounds&>(
            &procurement_price),
        py::arg("demand"), py::arg("slot"), py::arg("facility"), py::arg("bounds"));
  m.def("operational_cost", py::overload_cast<double, Slot, const FacilityConfig&>(&operational_cost),
        py::arg("demand"), py::arg("slot"), py::arg("facility"));
  m.def("ratio_bounds",
        [](const System& s, const ValuationBounds& b) { return ratio_bounds(s, b); });
  m.def("compute_bounds", [](const std::vector<UserRequest>& users, const System& system,
                             const LevelSet& levels) {
    std::vector<std::vector<ScheduleOption>> options;
    for (const auto& u : users) options.push_back(option_universe(u, system, levels, 100000));
    return compute_bounds(users, system, options);
  });

  m.def(
      "run_mechanism",
      [](const std::vector<UserRequest>& users, const System& system,
         const ValuationBounds& bounds, const LevelSet& levels) {
        OnlineMechanism mech(system, bounds, levels);
        auto run = run_sequence(users, mech);
        return py::make_tuple(run.decisions, summary_dict(run.summary));
      },
      py::arg("users"), py::arg("system"), py::arg("bounds"), py::arg("levels") = LevelSet{});
  m.def(
      "run_fcfs",
      [](const std::vector<UserRequest>& users, const System& system, const LevelSet& levels,
         bool partial_value) {
        auto run = run_fcfs(users, system, levels, FcfsOptions{partial_value});
        return py::make_tuple(run.decisions, summary_dict(summarize(system, run.state, run.decisions)));
      },
      py::arg("users"), py::arg("system"), py::arg("levels") = LevelSet{},
      py::arg("partial_value") = true);
  m.def(
      "solve_offline",
      [](const std::vector<UserRequest>& users, const System& system, const LevelSet& levels) {
        auto sol = solve_offline(users, system, levels);
        return py::make_tuple(sol.welfare, sol.choices);
      },
      py::arg("users"), py::arg("system"), py::arg("levels") = LevelSet{});
  m.def("empirical_ratio", &empirical_ratio);

  m.def(
      "simulate",
      [](const std::string& config_path, const std::string& mode, std::uint64_t seed, int seeds,
         const std::string& forecast) {
        const auto config = load_config(config_path);
        ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(config, parse_mode(mode), seed_range(seed, seeds),
                                  parse_forecast_mode(forecast));
        }
        py::list days;
        for (const auto& d : report.days) {
          py::dict row = summary_dict(d.summary);
          row["seed"] = d.seed;
          row["day"] = d.day;
          row["mode"] = to_string(d.mode);
          row["violations"] = d.violations;
          days.append(row);
        }
        return days;
      },
      py::arg("config"), py::arg("mode") = "mechanism", py::arg("seed") = 1, py::arg("seeds") = 1,
      py::arg("forecast") = "perfect");

  m.def(
      "verify_bounds",
      [](const std::string& config_path, int instances, std::uint64_t seed) {
        auto config = load_config(config_path);
        config.verify.instances = instances;
        VerificationReport r;
        {
          py::gil_scoped_release release;
          r = verify_bounds(config.verify, config.oracle, seed, config.threads);
        }
        py::dict d;
        d["instances"] = r.instances;
        d["max_ratio"] = r.max_ratio;
        d["alpha1_margin"] = r.alpha1_margin;
        d["alpha2_instances"] = r.alpha2_instances;
        d["min_dual_gap"] = r.min_dual_gap;
        std::vector<std::string> failures;
        for (const auto& f : r.failures) failures.push_back(f.reason);
        d["failures"] = failures;
        return d;
      },
      py::arg("config"), py::arg("instances") = 20, py::arg("seed") = 1);

  m.def("investment_cost", [](double ic, double im, double imn, int months, int evse, int cables) {
    return investment_cost(InvestmentParams{ic, im, imn, months}, {evse}, {cables});
  });
}
