#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "navstack/errors.hpp"
#include "navstack/navstack.hpp"
#include "navstack/plot.hpp"
#include "navstack/router.hpp"
#include "navstack/sim.hpp"
#include "navstack/trace.hpp"

namespace py = pybind11;
using namespace navstack;

namespace {

// `name` may instantiate a parametric definition, as in "reach(A)".
spec::FormulaAst parse_call(const std::string& name) {
  auto call = spec::parse_formula(name);
  if (call.kind != spec::FormulaKind::Atom) throw UndefinedName("'" + name + "' is not a definition name");
  return call;
}

class Monitor {
 public:
  Monitor(const std::string& spec_text, const std::string& name) {
    const auto spec = spec::parse_spec(spec_text);
    const auto call = parse_call(name);
    program_ = ltl::compile(
        ltl::instantiate_forall(spec::expand_formula(spec, call.name, call.args), spec_domains(spec)));
    state_.emplace(program_);
  }

  bool step(const ltl::Valuation& v) { return ltl::step(program_, *state_, v); }
  void reset() { state_.emplace(program_); }
  const std::vector<std::string>& atoms() const { return program_.atoms(); }
  std::size_t steps() const { return state_->steps(); }

 private:
  ltl::MonitorProgram program_;
  std::optional<ltl::MonitorState> state_;
};

class Matcher {
 public:
  Matcher(const std::string& spec_text, const std::string& name) {
    const auto spec = spec::parse_spec(spec_text);
    const auto call = parse_call(name);
    aut_ = mission::compile_mission(spec::expand_regex(spec, call.name, call.args));
  }

  /// Returns (matched, goals); raises DeadMission when no continuation matches.
  std::pair<bool, std::set<std::string>> step(const ltl::Valuation& v, bool wrap) {
    const auto out = mission::step_mission(aut_, state_, v, wrap);
    return {out.matched, out.goals};
  }
  void reset() { state_ = {}; }
  bool nullable() const { return aut_.nullable; }
  std::size_t matches() const { return state_.completed_matches; }

 private:
  mission::PositionAutomaton aut_;
  mission::MissionState state_;
};

py::dict trace_dict(const Trace& t) {
  py::dict d;
  d["atoms"] = t.atoms;
  d["t"] = t.t;
  d["rows"] = t.rows;
  return d;
}

py::tuple plan(const std::filesystem::path& world_path, const std::string& source, const std::string& target,
               const std::optional<std::filesystem::path>& spec_path, const std::vector<std::string>& monitors,
               std::size_t k_max) {
  const World world = load_world(world_path);
  const auto graph = route::TopoGraph::from_world(world);
  std::vector<ltl::MonitorProgram> programs;
  if (!monitors.empty() && !spec_path) throw ConfigError("monitors need a spec file");
  if (spec_path) {
    const auto spec = spec::load_spec(*spec_path);
    const auto domains = spec_domains(spec, &world);
    for (const auto& m : monitors) programs.push_back(compile_property(spec, m, domains));
  }
  const auto r = route::plan_route(graph, source, target, programs, k_max);
  return py::make_tuple(r.nodes, r.cost);
}

py::dict simulate(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
                  std::optional<double> duration) {
  auto cfg = sim::load_sim_config(config);
  if (seed) cfg.seed = *seed;
  if (duration) cfg.duration = *duration;
  cfg.validate();
  const World world = load_world(cfg.world_path);
  const auto spec = spec::load_spec(cfg.spec_path);

  sim::SimResult result;
  {
    py::gil_scoped_release release;
    result = sim::run_sim(cfg);
  }
  const auto report = sim::replay_check(result.log, world, spec);

  py::list robots;
  for (std::size_t i = 0; i < result.summary.robots.size(); ++i) {
    const auto& r = result.summary.robots[i];
    py::dict violations;
    for (const auto& p : cfg.safety) violations[py::str(p)] = report.robots[i].violations(p);
    py::dict rd;
    rd["name"] = r.name;
    rd["mission"] = r.mission;
    rd["matches"] = r.matches;
    rd["cycles"] = r.cycles;
    rd["collisions"] = r.collisions;
    rd["unsafe_steps"] = r.unsafe_steps;
    rd["violations"] = violations;
    rd["errors"] = r.errors;
    robots.append(rd);
  }
  py::dict out;
  out["seed"] = cfg.seed;
  out["duration"] = cfg.duration;
  out["collisions"] = result.summary.collisions;
  out["replay_agrees"] = report.agrees();
  out["robots"] = robots;
  out["log"] = sim::to_jsonl(result.log);
  return out;
}

std::string plot_robot(const std::filesystem::path& log_path, const std::string& robot,
                       const std::optional<std::filesystem::path>& world_path) {
  const auto log = sim::load_log(log_path);
  const std::filesystem::path wp = world_path ? *world_path : std::filesystem::path(log.header.world);
  if (wp.empty()) throw ConfigError("log has no world reference; pass world");
  return plot::render_trajectory(load_world(wp), log, robot);
}

}  // namespace

PYBIND11_MODULE(_navstack, m) {
  m.doc() = "Runtime-monitored multi-robot navigation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<LexError>(m, "LexError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<UndefinedName>(m, "UndefinedName", base);
  py::register_exception<CyclicDefinition>(m, "CyclicDefinition", base);
  py::register_exception<ArityMismatch>(m, "ArityMismatch", base);
  py::register_exception<UnknownSort>(m, "UnknownSort", base);
  py::register_exception<MissingAtom>(m, "MissingAtom", base);
  py::register_exception<UnknownLocation>(m, "UnknownLocation", base);
  py::register_exception<DeadMission>(m, "DeadMission", base);
  py::register_exception<NoPath>(m, "NoPath", base);
  py::register_exception<NoCompliantRoute>(m, "NoCompliantRoute", base);
  py::register_exception<SchemaError>(m, "SchemaError", base);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  m.def("format_formula", [](const std::string& s) { return spec::to_string(spec::parse_formula(s)); },
        py::arg("text"), "Parses a formula and prints it back in canonical form.");
  m.def("format_regex", [](const std::string& s) { return spec::to_string(spec::parse_regex(s)); },
        py::arg("text"));

  py::class_<Monitor>(m, "Monitor", "Past-time monitor for one named formula of a spec file.")
      .def(py::init<const std::string&, const std::string&>(), py::arg("spec_text"), py::arg("name"))
      .def("step", &Monitor::step, py::arg("valuation"))
      .def("reset", &Monitor::reset)
      .def_property_readonly("atoms", &Monitor::atoms)
      .def_property_readonly("steps", &Monitor::steps);

  py::class_<Matcher>(m, "Matcher", "Incremental matcher for one named regex of a spec file.")
      .def(py::init<const std::string&, const std::string&>(), py::arg("spec_text"), py::arg("name"))
      .def("step", &Matcher::step, py::arg("valuation"), py::arg("wrap") = false)
      .def("reset", &Matcher::reset)
      .def_property_readonly("nullable", &Matcher::nullable)
      .def_property_readonly("matches", &Matcher::matches);

  m.def("parse_trace", [](const std::string& text) { return trace_dict(parse_trace_csv(text)); },
        py::arg("text"));
  m.def("load_trace", [](const std::filesystem::path& p) { return trace_dict(load_trace_csv(p)); },
        py::arg("path"));

  m.def("plan_route", &plan, py::arg("world"), py::arg("source"), py::arg("target"),
        py::arg("spec") = py::none(), py::arg("monitors") = std::vector<std::string>{}, py::arg("k_max") = 32,
        "Cheapest route among the k shortest that satisfies every monitor. Returns (nodes, cost).");
  m.def("simulate", &simulate, py::arg("config"), py::arg("seed") = py::none(), py::arg("duration") = py::none(),
        "Runs a simulation and returns its summary plus the JSONL log as text.");
  m.def("render_world", [](const std::filesystem::path& p) { return plot::render_world(load_world(p)); },
        py::arg("world"));
  m.def("plot_robot", &plot_robot, py::arg("log"), py::arg("robot"), py::arg("world") = py::none());
}
