#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <foothold/error.h>
#include <foothold/geometry.h>
#include <foothold/icp.h>
#include <foothold/metrics.h>
#include <foothold/qp_solver.h>
#include <foothold/runner.h>
#include <foothold/scenario.h>
#include <foothold/sweep.h>

namespace py = pybind11;
using namespace foothold;

namespace
{

struct PyRun
{
  RunResult result;

  std::string csv() const
  {
    std::ostringstream ss;
    result.log.writeCsv(ss);
    return ss.str();
  }
};

std::vector<Point2> toPoints(const Eigen::Ref<const Eigen::MatrixX2d> & m)
{
  std::vector<Point2> out(static_cast<std::size_t>(m.rows()));
  for(Eigen::Index i = 0; i < m.rows(); ++i)
  {
    out[static_cast<std::size_t>(i)] = m.row(i).transpose();
  }
  return out;
}

Eigen::MatrixX2d fromPoints(const std::vector<Point2> & v)
{
  Eigen::MatrixX2d m(static_cast<Eigen::Index>(v.size()), 2);
  for(std::size_t i = 0; i < v.size(); ++i)
  {
    m.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  }
  return m;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Foothold exploration and momentum-based balance control";

  py::register_exception<Error>(m, "FootholdError", PyExc_RuntimeError);

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("swing_time", &ScenarioConfig::swingTime)
      .def_property_readonly("num_steps", [](const ScenarioConfig & c) { return c.footsteps.size(); })
      .def("validate", &ScenarioConfig::validate);

  m.def("load_scenario", [](const std::string & path, const std::vector<ScenarioOverride> & o) {
    return loadScenario(path, o);
  }, py::arg("path"), py::arg("overrides") = std::vector<ScenarioOverride>{});
  m.def("parse_scenario", [](const std::string & text, const std::vector<ScenarioOverride> & o) {
    return parseScenario(text, o);
  }, py::arg("text"), py::arg("overrides") = std::vector<ScenarioOverride>{});

  py::class_<PyRun>(m, "RunResult")
      .def_property_readonly("outcome", [](const PyRun & r) { return std::string(toString(r.result.outcome.kind)); })
      .def_property_readonly("reason", [](const PyRun & r) { return r.result.outcome.reason; })
      .def_property_readonly("steps_completed", [](const PyRun & r) { return r.result.stepsCompleted; })
      .def("csv", &PyRun::csv)
      .def("sidecar_json", [](const PyRun & r) { return r.result.sidecar().dump(); })
      .def("metrics_json", [](const PyRun & r) { return toJson(computeMetrics(r.result)).dump(); });

  m.def("run_scenario", [](const ScenarioConfig & c) {
    py::gil_scoped_release release;
    return PyRun{runScenario(c)};
  });

  m.def("run_sweep", [](const std::string & path, std::size_t jobs) {
    SweepResult r;
    {
      py::gil_scoped_release release;
      r = runSweep(loadSweep(path), jobs);
    }
    std::ostringstream s, runs;
    writeSummaryCsv(s, r);
    writeRunsCsv(runs, r);
    return std::make_pair(s.str(), runs.str());
  }, py::arg("path"), py::arg("jobs") = 1);

  m.def("compute_icp", [](const Eigen::Vector2d & com, const Eigen::Vector2d & vel, double mass, double gravity,
                          double height) {
    return Eigen::Vector2d(computeIcp(com, vel, LipmParams{mass, gravity, height}));
  }, py::arg("com"), py::arg("com_velocity"), py::arg("mass") = 90., py::arg("gravity") = 9.81, py::arg("height") = 0.9);

  m.def("convex_hull", [](const Eigen::Ref<const Eigen::MatrixX2d> & pts) {
    return fromPoints(convexHull(toPoints(pts)).vertices());
  });

  m.def("solve_qp", [](const Eigen::MatrixXd & H, const Eigen::VectorXd & f, const Eigen::MatrixXd & E,
                       const Eigen::VectorXd & e, const Eigen::VectorXd & lower, const Eigen::VectorXd & upper) {
    DenseQp qp{H, f, E, e, lower, upper};
    return solveDenseQp(qp).x;
  }, py::arg("H"), py::arg("f"), py::arg("E"), py::arg("e"), py::arg("lower"), py::arg("upper"));
}
