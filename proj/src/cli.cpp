#include "navstack/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "navstack/errors.hpp"
#include "navstack/navstack.hpp"
#include "navstack/plot.hpp"
#include "navstack/regexmon.hpp"
#include "navstack/router.hpp"
#include "navstack/sim.hpp"
#include "navstack/speclang.hpp"
#include "navstack/trace.hpp"

namespace navstack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("navstack");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("NAVSTACK_LOG_LEVEL")) {
    const std::string s = env;
    if (s == "error") level = spdlog::level::err;
    else if (s == "warn") level = spdlog::level::warn;
    else if (s == "info") level = spdlog::level::info;
    else if (s == "debug") level = spdlog::level::debug;
    else spdlog::warn("ignoring NAVSTACK_LOG_LEVEL='{}' (use error, warn, info or debug)", s);
  }
  spdlog::set_level(level);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string out = "out";
};

int cmd_simulate(const SimulateArgs& a) {
  sim::SimConfig cfg;
  try {
    cfg = sim::load_sim_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.duration) cfg.duration = *a.duration;
    cfg.validate();
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }

  sim::SimResult result;
  World world;
  spec::SpecFile spec;
  try {
    world = load_world(cfg.world_path);
    spec = spec::load_spec(cfg.spec_path);
    spdlog::info("simulating {} robots for {} s (seed {})", cfg.robots.size(), cfg.duration, cfg.seed);
    result = sim::run_sim(cfg);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }

  const auto report = sim::replay_check(result.log, world, spec);
  const fs::path out_dir = a.out;
  write_file(out_dir / "log.jsonl", sim::to_jsonl(result.log));

  json summary;
  summary["duration"] = cfg.duration;
  summary["seed"] = cfg.seed;
  summary["collisions"] = result.summary.collisions;
  summary["replay_agrees"] = report.agrees();
  json violations = json::object();
  for (const auto& p : cfg.safety) violations[p] = 0;
  json robots = json::array();
  for (std::size_t i = 0; i < result.summary.robots.size(); ++i) {
    const auto& r = result.summary.robots[i];
    json rv = json::object();
    for (const auto& p : cfg.safety) {
      const std::size_t n = report.robots[i].violations(p);
      rv[p] = n;
      violations[p] = violations[p].get<std::size_t>() + n;
    }
    robots.push_back({{"name", r.name},
                      {"mission", r.mission},
                      {"matches", r.matches},
                      {"cycles", r.cycles},
                      {"collisions", r.collisions},
                      {"violations", rv},
                      {"errors", r.errors}});
  }
  summary["violations"] = violations;
  summary["robots"] = robots;
  summary["errors"] = result.summary.errors;
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "robots: " << result.summary.robots.size()
            << "  collisions: " << result.summary.collisions
            << "  violations: " << report.violations() << "\n";
  for (const auto& r : robots) {
    std::cout << "  " << r["name"].get<std::string>() << " (" << r["mission"].get<std::string>()
              << "): cycles " << r["cycles"] << ", matches " << r["matches"] << ", violations "
              << r["violations"].dump() << "\n";
    for (const auto& e : r["errors"]) std::cout << "    error: " << e.get<std::string>() << "\n";
  }
  std::cout << "log: " << (out_dir / "log.jsonl").string() << "\n";

  const bool ok = result.summary.collisions == 0 && report.violations() == 0 &&
                  result.summary.errors == 0 && report.agrees();
  return ok ? kOk : kFailed;
}

// --- check ------------------------------------------------------------------

struct CheckArgs {
  std::string spec;
  std::string name;
  std::string trace;
  std::string mode = "monitor";
};

int cmd_check(const CheckArgs& a) {
  spec::SpecFile spec;
  Trace trace;
  try {
    spec = spec::load_spec(a.spec);
    trace = load_trace_csv(a.trace);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
  const auto time_of = [&](std::size_t i) { return i < trace.t.size() ? trace.t[i] : 0.0; };

  try {
    // The name may instantiate a parametric definition, as in `reach(A)`.
    const auto call = spec::parse_formula(a.name);
    if (call.kind != spec::FormulaKind::Atom) {
      spdlog::error("'{}' is not a definition name", a.name);
      return kBadInput;
    }
    if (a.mode == "monitor") {
      const auto program = ltl::compile(ltl::instantiate_forall(
          spec::expand_formula(spec, call.name, call.args), spec_domains(spec)));
      ltl::MonitorState st(program);
      bool all = true;
      for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const bool v = ltl::step(program, st, trace.rows[i]);
        std::cout << i << " " << time_of(i) << " " << (v ? 1 : 0) << "\n";
        if (!v && all) spdlog::info("first violation at step {} (t = {})", i, time_of(i));
        all = all && v;
      }
      return all ? kOk : kFailed;
    }
    if (a.mode == "match") {
      const auto aut = mission::compile_mission(spec::expand_regex(spec, call.name, call.args));
      mission::MissionState st;
      bool matched = aut.nullable;
      for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        try {
          matched = mission::step_mission(aut, st, trace.rows[i], false).matched;
        } catch (const DeadMission&) {
          std::cout << i << " " << time_of(i) << " dead\n";
          spdlog::info("no continuation of '{}' matches step {}", a.name, i);
          return kFailed;
        }
        std::cout << i << " " << time_of(i) << " " << (matched ? 1 : 0) << "\n";
      }
      return matched ? kOk : kFailed;
    }
    spdlog::error("unknown mode '{}' (use monitor or match)", a.mode);
    return kBadInput;
  } catch (const MissingAtom& e) {
    spdlog::error("trace does not match the formula's atoms: {}", e.what());
    return kBadInput;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
}

// --- plan -------------------------------------------------------------------

struct PlanArgs {
  std::string world;
  std::string from;
  std::string to;
  std::string spec;
  std::vector<std::string> monitors;
  std::size_t k_max = 32;
};

int cmd_plan(const PlanArgs& a) {
  World world;
  route::TopoGraph graph;
  std::vector<ltl::MonitorProgram> programs;
  try {
    world = load_world(a.world);
    graph = route::TopoGraph::from_world(world);
    graph.index(a.from);
    graph.index(a.to);
    if (!a.monitors.empty() && a.spec.empty()) {
      throw ConfigError("--monitor needs --spec");
    }
    if (!a.spec.empty()) {
      const auto spec = spec::load_spec(a.spec);
      const auto domains = spec_domains(spec, &world);
      for (const auto& m : a.monitors) programs.push_back(compile_property(spec, m, domains));
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
  try {
    const auto r = route::plan_route(graph, a.from, a.to, programs, a.k_max);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) std::cout << (i ? " " : "") << r.nodes[i];
    char cost[64];
    std::snprintf(cost, sizeof cost, "%.6f", r.cost);
    std::cout << "\ncost " << cost << "\n";
    return kOk;
  } catch (const NoPath& e) {
    spdlog::error("{}", e.what());
    return kFailed;
  } catch (const NoCompliantRoute& e) {
    spdlog::error("{}", e.what());
    return kFailed;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
}

// --- plot -------------------------------------------------------------------

struct PlotArgs {
  std::string log;
  std::vector<std::string> robots;
  std::string world;
  std::string out;
};

int cmd_plot(const PlotArgs& a) {
  try {
    const sim::SimLog log = sim::load_log(a.log);
    std::string world_path = a.world;
    if (world_path.empty()) world_path = log.header.world;
    if (world_path.empty()) throw ConfigError("log has no world reference; pass --world");
    const World world = load_world(world_path);

    std::vector<std::string> robots = a.robots;
    const bool single = robots.size() == 1;
    if (robots.empty()) {
      for (const auto& [name, mission] : log.header.robots) robots.push_back(name);
    }
    if (robots.empty()) {
      write_file(a.out, plot::render_world(world));
      return kOk;
    }
    for (const auto& r : robots) {
      const fs::path path = single ? fs::path(a.out) : fs::path(a.out) / (r + ".svg");
      write_file(path, plot::render_trajectory(world, log, r));
      spdlog::info("wrote {}", path.string());
    }
    return kOk;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
}

}  // namespace

int run(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Layered navigation with runtime monitors"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a multi-robot simulation");
  simulate->add_option("config", sa.config, "Run config JSON")->required();
  simulate->add_option("--seed", sa.seed, "Override the config seed");
  simulate->add_option("--duration", sa.duration, "Override the duration in seconds");
  simulate->add_option("--out", sa.out, "Output directory for log.jsonl and summary.json");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Check a trace CSV against a named formula or regex");
  check->add_option("spec", ca.spec, "Spec file")->required();
  check->add_option("name", ca.name, "Definition to check, e.g. ca or reach(A)")->required();
  check->add_option("trace", ca.trace, "Trace CSV")->required();
  check->add_option("--mode", ca.mode, "monitor (every step true) or match (trace in language)")
      ->check(CLI::IsMember({"monitor", "match"}));

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Shortest route satisfying route monitors");
  plan->add_option("world", pa.world, "World JSON")->required();
  plan->add_option("--from", pa.from, "Start node")->required();
  plan->add_option("--to", pa.to, "Target node")->required();
  plan->add_option("--spec", pa.spec, "Spec file with route properties");
  plan->add_option("--monitor", pa.monitors, "Route property name (repeatable)");
  plan->add_option("--k-max", pa.k_max, "Routes examined before giving up");

  PlotArgs la;
  auto* plotc = app.add_subcommand("plot", "SVG trajectory plots from a sim log");
  plotc->add_option("log", la.log, "Sim log JSONL")->required();
  plotc->add_option("--robot", la.robots, "Robot name (repeatable; default all)");
  plotc->add_option("--world", la.world, "World JSON (default: the one named in the log)");
  plotc->add_option("--out", la.out, "SVG path for one robot, directory otherwise")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*simulate) return cmd_simulate(sa);
    if (*check) return cmd_check(ca);
    if (*plan) return cmd_plan(pa);
    if (*plotc) return cmd_plot(la);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace navstack::cli
