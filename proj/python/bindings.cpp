#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hcval/report.hpp"
#include "hcval/smtlib.hpp"

namespace py = pybind11;
using namespace hcval;

namespace {

py::dict box_to_dict(const Box& b) {
  py::dict d;
  for (const auto& [name, iv] : b)
    d[py::str(name)] = py::make_tuple(iv.lo, iv.hi);
  return d;
}

py::dict verdict_to_dict(const DeltaVerdict& v) {
  py::dict d;
  if (is_unsat(v)) {
    d["status"] = "unsat";
  } else if (is_delta_sat(v)) {
    const auto& ds = std::get<DeltaSat>(v);
    d["status"] = "delta-sat";
    d["delta"] = ds.delta;
    d["witness"] = box_to_dict(ds.witness);
    d["certificate"] = ds.certificate_point;
  } else {
    const auto& u = std::get<Unknown>(v);
    d["status"] = "unknown";
    d["expanded"] = u.expanded;
    d["frontier"] = u.frontier_size;
  }
  return d;
}

SolverConfig make_config(double delta, double precision, std::int64_t budget,
                         bool parallel) {
  SolverConfig cfg = SolverConfig::with_delta(delta);
  if (precision > 0) cfg.precision = precision;
  cfg.budget = budget;
  cfg.parallel = parallel;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_hcval, m) {
  m.doc() = "validation toolkit for multi-level health-condition models";

  py::class_<HealthModel>(m, "Model")
      .def_property_readonly("name",
                             [](const HealthModel& mm) { return mm.name; })
      .def_property_readonly("variables",
                             [](const HealthModel& mm) {
                               std::vector<std::string> out;
                               for (const auto& v : mm.params)
                                 out.push_back(v.name);
                               return out;
                             })
      .def_property_readonly("rules",
                             [](const HealthModel& mm) {
                               std::vector<std::string> out;
                               for (const auto& r : mm.rules.rules)
                                 out.push_back(r.label);
                               return out;
                             })
      .def("__repr__", [](const HealthModel& mm) {
        return "<Model '" + mm.name + "'>";
      });

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("horizon",
                             [](const Scenario& s) { return s.horizon; });

  m.def("parse_model", &parse_model, py::arg("text"),
        "Parse a condition-model (.hcm) source string.");
  m.def("print_model", &print_model, py::arg("model"),
        "Render a model back to canonical source.");
  m.def("parse_scenario", &parse_scenario, py::arg("text"),
        "Parse a scenario (.scn) source string.");

  m.def(
      "emit_smtlib",
      [](const HealthModel& mm, const Scenario& s) {
        return emit(lower(mm, s));
      },
      py::arg("model"), py::arg("scenario"),
      "Lower model+scenario and emit an SMT-LIB 2 (QF_NRA) script.");

  m.def(
      "solve",
      [](const HealthModel& mm, const Scenario& s, double delta,
         double precision, std::int64_t budget, bool parallel) {
        return verdict_to_dict(
            solve(lower(mm, s), make_config(delta, precision, budget, parallel)));
      },
      py::arg("model"), py::arg("scenario"), py::arg("delta") = 0.01,
      py::arg("precision") = 0.0, py::arg("budget") = 1'000'000,
      py::arg("parallel") = false,
      "Decide the lowered system; returns a dict with 'status' and, when "
      "delta-sat, 'witness' interval ranges plus a 'certificate' point.");

  m.def(
      "analyze",
      [](const HealthModel& mm, const std::optional<Scenario>& s, double delta,
         std::int64_t budget, const std::string& target, int horizon, int k) {
        SolverConfig cfg = make_config(delta, 0.0, budget, false);
        AnalyzeOptions opt;
        opt.reachable = !target.empty();
        opt.reach_target = target;
        opt.reach_horizon = horizon;
        opt.spoof_k = k;
        py::dict d;
        ValidationReport rep = run_analyses(mm, s, cfg, opt);
        std::string json = report_to_json(rep);
        d["json"] = json;
        d["hard_findings"] = rep.has_hard_findings();
        d["findings"] = static_cast<int>(rep.findings.size());
        return d;
      },
      py::arg("model"), py::arg("scenario") = std::nullopt,
      py::arg("delta") = 0.01, py::arg("budget") = 1'000'000,
      py::arg("target") = std::string(), py::arg("horizon") = 3,
      py::arg("k") = 1,
      "Run the validation battery; returns a dict with the JSON report.");

  m.def(
      "monitor",
      [](const HealthModel& mm, const std::string& trace_text, double delta) {
        std::vector<std::string> out;
        for (const auto& f :
             check_trace(mm, parse_trace(trace_text), delta))
          out.push_back(f.narrative);
        return out;
      },
      py::arg("model"), py::arg("trace_text"), py::arg("delta") = 0.01,
      "Check a recorded trace against the dynamics; returns violation "
      "narratives.");
}
