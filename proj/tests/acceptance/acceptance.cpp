// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "generators.hpp"
#include "navstack/errors.hpp"
#include "navstack/navstack.hpp"
#include "navstack/plot.hpp"
#include "navstack/sim.hpp"

using namespace navstack;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void ltl_oracle() {
  const auto t0 = Clock::now();
  testgen::Rng rng(1001);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto atoms = testgen::atom_names(static_cast<std::size_t>(testgen::uniform(rng, 1, 4)));
    const auto f = testgen::random_formula(rng, 5, atoms);
    const auto trace =
        testgen::random_trace(rng, static_cast<std::size_t>(testgen::uniform(rng, 1, 50)), atoms);
    const auto prog = ltl::compile(f);
    ltl::MonitorState st(prog);
    std::vector<bool> online;
    for (const auto& v : trace) online.push_back(ltl::step(prog, st, v));
    if (online != ltl::eval_trace_oracle(f, trace)) ++mismatches;
  }
  const double s = seconds_since(t0);
  report(1, "past-LTL oracle equivalence", mismatches == 0 && s < 10.0,
         fmt("1000 pairs, %d mismatches, %.2f s", mismatches, s));
}

void regex_frontier() {
  const auto t0 = Clock::now();
  testgen::Rng rng(2002);
  int mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const auto atoms = testgen::atom_names(static_cast<std::size_t>(testgen::uniform(rng, 1, 4)));
    const auto r = testgen::random_regex(rng, 4, atoms);
    const auto trace =
        testgen::random_trace(rng, static_cast<std::size_t>(testgen::uniform(rng, 1, 20)), atoms);
    const auto aut = mission::compile_mission(r);
    mission::MissionState st;
    bool dead = false;
    bool ok = true;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      bool matched = false;
      if (!dead) {
        try {
          matched = mission::step_mission(aut, st, trace[k], false).matched;
        } catch (const DeadMission&) {
          dead = true;
        }
      }
      const std::vector<ltl::Valuation> prefix(trace.begin(),
                                               trace.begin() + static_cast<std::ptrdiff_t>(k + 1));
      ok = ok && matched == mission::membership_oracle(r, prefix);
    }
    if (!ok) ++mismatches;
  }
  const double s = seconds_since(t0);
  report(2, "regex frontier soundness", mismatches == 0 && s < 10.0,
         fmt("500 pairs, %d mismatches, %.2f s", mismatches, s));
}

void yen() {
  const auto t0 = Clock::now();
  testgen::Rng rng(3003);
  int mismatches = 0;
  int unreachable = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = testgen::uniform(rng, 2, 10);
    const auto g = testgen::random_graph(rng, n, 25);
    const std::string src = "n0";
    const std::string dst = "n" + std::to_string(n - 1);
    const auto expected = testgen::all_simple_paths(g, 0, static_cast<std::size_t>(n - 1));
    if (expected.empty()) {
      ++unreachable;
      try {
        (void)route::yen_k_shortest(g, src, dst, 1);
        ++mismatches;
      } catch (const NoPath&) {
      }
      continue;
    }
    const auto got = route::yen_k_shortest(g, src, dst, expected.size());
    const bool first_ok = got.front().cost == testgen::dijkstra(g, 0, static_cast<std::size_t>(n - 1));
    route::YenEnumerator tail(g, src, dst);
    for (std::size_t k = 0; k < expected.size(); ++k) (void)tail.next();
    if (got != expected || !first_ok || tail.next()) ++mismatches;
  }
  const double s = seconds_since(t0);
  report(3, "Yen k-shortest correctness", mismatches == 0 && s < 30.0,
         fmt("200 graphs (%d unreachable), %d mismatches, %.2f s", unreachable, mismatches, s));
}

void dwa_safety() {
  const auto t0 = Clock::now();
  const World world = load_world(NAVSTACK_DATA_DIR "/office.world.json");
  const auto spec = spec::load_spec(NAVSTACK_DATA_DIR "/office.spec");
  const auto safety = compile_property(spec, "safety", spec_domains(spec, &world));
  PredicateEvaluator ev(world, safety.atoms());
  const auto walls = wall_obstacles(world);
  const dwa::Params params;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> ux(0.3, 25.3), uy(0.3, 14.1), th(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0), off(-2.5, 2.5);
  std::uniform_int_distribution<int> discs(0, 5);
  int bad = 0, brakes = 0;
  std::vector<std::uint8_t> vals;
  for (int i = 0; i < 10000; ++i) {
    const RobotState pose{ux(rng), uy(rng), th(rng), params.limits.v_max * unit(rng),
                          params.limits.omega_max * (2.0 * unit(rng) - 1.0)};
    auto obs = walls;
    const int nd = discs(rng);
    for (int k = 0; k < nd; ++k) {
      obs.push_back(Obstacle::disc(pose.position() + Vec2{off(rng), off(rng)}, 0.15));
    }
    ltl::MonitorState live(safety);
    ev.evaluate(pose, obs, vals);
    ltl::step_values(safety, live, vals);
    const auto d = dwa::plan(pose, {ux(rng), uy(rng)}, safety, live, ev, obs, params);
    if (d.selection.full_brake != d.safe.empty()) {
      ++bad;
      continue;
    }
    if (d.selection.full_brake) {
      ++brakes;
      continue;
    }
    const auto& chosen = d.pool[d.selection.index];
    bool ok = chosen.command == d.selection.command &&
              dwa::window({pose.v, pose.omega}, params.limits, params.control_period).contains(chosen.command) &&
              dwa::trajectory_clearance(chosen, ev.params().footprint_radius, obs) > 0.0;
    ltl::MonitorState copy = live;
    for (const auto& s : chosen.samples) {
      ev.evaluate(s.state, obs, vals);
      ok = ltl::step_values(safety, copy, vals) && ok;
    }
    if (!ok) ++bad;
  }
  const double s = seconds_since(t0);
  report(4, "DWA safety", bad == 0,
         fmt("10000 scenarios, %d full brakes, %d violations, %.2f s", brakes, bad, s));
}

struct ScenarioRun {
  sim::SimResult result;
  double seconds = 0.0;
};

ScenarioRun run_scenario() {
  const auto cfg = sim::load_sim_config(NAVSTACK_DATA_DIR "/office_scenario.json");
  const auto t0 = Clock::now();
  ScenarioRun r{sim::run_sim(cfg), 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

/// True if no D6A visit falls between a D visit and the next A visit.
bool nd_respected(const sim::SimLog& log, const std::string& robot) {
  bool leg = false;
  for (const auto* e : log.events("visit")) {
    if (e->robot != robot) continue;
    if (e->detail == "D") leg = true;
    else if (e->detail == "A") leg = false;
    else if (e->detail == "D6A" && leg) return false;
  }
  return true;
}

void scenario(const ScenarioRun& run, const World& world, const spec::SpecFile& spec) {
  const auto& sum = run.result.summary;
  const auto rep = sim::replay_check(run.result.log, world, spec);
  std::size_t ca = 0, ow = 0;
  for (const auto& r : rep.robots) {
    ca += r.violations("ca");
    ow += r.violations("ow");
  }
  std::string cycles;
  bool enough = sum.robots.size() == 4;
  for (const auto& r : sum.robots) {
    cycles += (cycles.empty() ? "" : " ") + r.name + "=" + std::to_string(r.cycles);
    enough = enough && r.cycles >= 2 && r.errors.empty();
  }
  const bool nd = nd_respected(run.result.log, "G1");
  const bool ok = sum.collisions == 0 && ca == 0 && ow == 0 && rep.agrees() && sum.unsafe_steps == 0 &&
                  enough && nd && run.seconds < 60.0;
  report(5, "office scenario", ok,
         fmt("collisions %zu, CA violations %zu, OW violations %zu, replay %s, cycles {%s}, "
             "G1 D-to-A avoids D6A: %s, %.1f s",
             sum.collisions, ca, ow, rep.agrees() ? "agrees" : "disagrees", cycles.c_str(),
             nd ? "yes" : "no", run.seconds));
}

void determinism(const ScenarioRun& first, const World& world) {
  const ScenarioRun second = run_scenario();
  const bool logs = sim::to_jsonl(first.result.log) == sim::to_jsonl(second.result.log);
  bool svgs = true;
  for (const auto& [name, mission] : first.result.log.header.robots) {
    svgs = svgs && plot::render_trajectory(world, first.result.log, name) ==
                       plot::render_trajectory(world, second.result.log, name);
  }
  report(6, "determinism", logs && svgs,
         fmt("logs %s, SVGs %s", logs ? "identical" : "differ", svgs ? "identical" : "differ"));
}

void kinematics(const ScenarioRun& run) {
  const auto quarter = dwa::rollout({0, 0, 0}, {std::numbers::pi / 2, std::numbers::pi / 2}, 1.0, 0.1);
  const auto& end = quarter.samples.back().state;
  const double arc_err = std::max({std::abs(end.x - 1.0), std::abs(end.y - 1.0),
                                   std::abs(end.theta - std::numbers::pi / 2)});

  const auto cfg = sim::load_sim_config(NAVSTACK_DATA_DIR "/office_scenario.json");
  const auto& lim = cfg.controller.dwa.limits;
  const double period = cfg.control_period;
  const auto substeps = static_cast<int>(std::lround(period / cfg.sim_dt));
  double worst_pose = 0.0;
  int rate_violations = 0;
  std::size_t pairs = 0;
  for (const auto& [name, mission] : run.result.log.header.robots) {
    const auto steps = run.result.log.steps(name);
    for (std::size_t i = 1; i < steps.size(); ++i) {
      const auto& a = *steps[i - 1];
      const auto& b = *steps[i];
      if (std::abs((b.t - a.t) - period) > 1e-9) continue;
      ++pairs;
      if (std::abs(b.pose.v - a.pose.v) > lim.a_max * period + 1e-12 ||
          std::abs(b.pose.omega - a.pose.omega) > lim.alpha_max * period + 1e-12) {
        ++rate_violations;
      }
      const auto applied = sim::track({a.pose.v, a.pose.omega}, a.command, lim, period);
      RobotState p = a.pose;
      for (int k = 0; k < substeps; ++k) p = dwa::integrate(p, applied, cfg.sim_dt);
      worst_pose = std::max({worst_pose, std::abs(p.x - b.pose.x), std::abs(p.y - b.pose.y),
                             std::abs(std::remainder(p.theta - b.pose.theta, 2 * std::numbers::pi)),
                             std::abs(applied.v - b.pose.v), std::abs(applied.omega - b.pose.omega)});
    }
  }
  const bool ok = arc_err < 1e-9 && rate_violations == 0 && worst_pose < 1e-9 && pairs > 0;
  report(7, "kinematics", ok,
         fmt("arc endpoint error %.1e, %zu logged transitions, %d rate-limit violations, "
             "max integrator deviation %.1e",
             arc_err, pairs, rate_violations, worst_pose));
}

void route_optimality(const World& world, const spec::SpecFile& spec) {
  const auto g = route::TopoGraph::from_world(world);
  const auto domains = spec_domains(spec, &world);
  const std::vector<ltl::MonitorProgram> nd{compile_property(spec, "nd", domains)};
  const auto planned = route::plan_route(g, "D", "A", nd, 32);
  double best = std::numeric_limits<double>::infinity();
  std::size_t compliant = 0;
  const auto all = testgen::all_simple_paths(g, g.index("D"), g.index("A"));
  for (const auto& r : all) {
    if (!route::check_route(r.nodes, nd)) continue;
    ++compliant;
    best = std::min(best, r.cost);
  }
  std::string path;
  for (const auto& n : planned.nodes) path += (path.empty() ? "" : " ") + n;
  report(8, "route compliance optimality", std::abs(planned.cost - best) < 1e-9,
         fmt("planned %.6f (%s), brute-force minimum %.6f over %zu of %zu simple paths", planned.cost,
             path.c_str(), best, compliant, all.size()));
}

void guarded(int id, const char* name, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "past-LTL oracle equivalence", ltl_oracle);
  guarded(2, "regex frontier soundness", regex_frontier);
  guarded(3, "Yen k-shortest correctness", yen);
  guarded(4, "DWA safety", dwa_safety);

  const World world = load_world(NAVSTACK_DATA_DIR "/office.world.json");
  const auto spec = spec::load_spec(NAVSTACK_DATA_DIR "/office.spec");
  ScenarioRun run;
  bool have_run = false;
  guarded(5, "office scenario", [&] {
    run = run_scenario();
    have_run = true;
    scenario(run, world, spec);
  });
  if (have_run) {
    guarded(6, "determinism", [&] { determinism(run, world); });
    guarded(7, "kinematics", [&] { kinematics(run); });
  } else {
    report(6, "determinism", false, "scenario did not run");
    report(7, "kinematics", false, "scenario did not run");
  }
  guarded(8, "route compliance optimality", [&] { route_optimality(world, spec); });
  return failures == 0 ? 0 : 1;
}
