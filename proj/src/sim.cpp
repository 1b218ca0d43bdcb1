#include "navstack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "navstack/errors.hpp"

namespace navstack::sim {

using nlohmann::json;

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

bool is_multiple(double a, double b) {
  const double k = std::round(a / b);
  return k >= 1.0 && std::abs(k * b - a) <= 1e-9 * std::max(1.0, a);
}

}  // namespace

void SimConfig::validate() const {
  if (!(sim_dt > 0.0)) throw ConfigError("sim_dt must be positive");
  if (!(control_period > 0.0) || !is_multiple(control_period, sim_dt)) {
    throw ConfigError("control_period must be a positive integer multiple of sim_dt");
  }
  if (!(duration >= 0.0)) throw ConfigError("duration must not be negative");
  const auto& d = controller.dwa;
  if (!(d.sample_dt > 0.0) || !(d.horizon >= 0.0) || d.n_v < 1 || d.n_omega < 1) {
    throw ConfigError("invalid DWA sampling parameters");
  }
  if (!(d.limits.v_max >= 0.0) || !(d.limits.omega_max >= 0.0) || !(d.limits.a_max >= 0.0) ||
      !(d.limits.alpha_max >= 0.0)) {
    throw ConfigError("velocity and acceleration limits must not be negative");
  }
  if (!(controller.predicates.footprint_radius > 0.0) ||
      !(controller.predicates.safety_margin >= 0.0)) {
    throw ConfigError("invalid footprint radius or safety margin");
  }
  std::set<std::string> names;
  for (const auto& r : robots) {
    if (r.name.empty() || !names.insert(r.name).second) {
      throw ConfigError("robot names must be unique and nonempty");
    }
  }
}

SimConfig parse_sim_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           double world_scale) {
  SimConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    cfg.world_path = base_dir / j.at("world").get<std::string>();
    cfg.spec_path = base_dir / j.at("spec").get<std::string>();
    read_opt(j, "sim_dt", cfg.sim_dt);
    read_opt(j, "control_period", cfg.control_period);
    read_opt(j, "duration", cfg.duration);
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "safety", cfg.safety);
    read_opt(j, "route_monitors", cfg.route_monitors);
    read_opt(j, "footprint_radius", cfg.controller.predicates.footprint_radius);
    read_opt(j, "safety_margin", cfg.controller.predicates.safety_margin);
    if (j.contains("dwa")) {
      const json& d = j.at("dwa");
      auto& p = cfg.controller.dwa;
      read_opt(d, "v_max", p.limits.v_max);
      read_opt(d, "omega_max", p.limits.omega_max);
      read_opt(d, "a_max", p.limits.a_max);
      read_opt(d, "alpha_max", p.limits.alpha_max);
      read_opt(d, "horizon", p.horizon);
      read_opt(d, "sample_dt", p.sample_dt);
      read_opt(d, "n_v", p.n_v);
      read_opt(d, "n_omega", p.n_omega);
      read_opt(d, "w_speed", p.w_speed);
      read_opt(d, "w_goal", p.w_goal);
      read_opt(d, "w_clear", p.w_clear);
      read_opt(d, "clear_cap", p.clear_cap);
      read_opt(d, "w_heading", p.w_heading);
      read_opt(d, "prefer_stoppable", p.prefer_stoppable);
    }
    if (j.contains("router")) {
      const json& r = j.at("router");
      read_opt(r, "k_max", cfg.controller.k_max);
      read_opt(r, "reach_radius", cfg.controller.reach_radius);
      read_opt(r, "brake_replan_periods", cfg.controller.brake_replan_periods);
      read_opt(r, "pad_moving_obstacles", cfg.controller.pad_moving_obstacles);
    }
    if (j.contains("doors")) {
      const json& d = j.at("doors");
      auto& c = cfg.controller;
      read_opt(d, "keep_right", c.door_keep_right);
      read_opt(d, "lead", c.door_lead);
      read_opt(d, "pass", c.door_pass);
      read_opt(d, "busy", c.door_busy);
      read_opt(d, "queue", c.door_queue);
      read_opt(d, "wait", c.door_wait);
    }
    if (j.contains("stall")) {
      const json& st = j.at("stall");
      auto& c = cfg.controller;
      read_opt(st, "periods", c.stall_periods);
      read_opt(st, "progress", c.stall_progress);
      read_opt(st, "radius", c.stall_radius);
      read_opt(st, "detour_distance", c.detour_distance);
      read_opt(st, "detour_periods", c.detour_periods);
    }
    cfg.controller.dwa.control_period = cfg.control_period;
    for (const auto& r : j.at("robots")) {
      RobotSpec spec;
      spec.name = r.at("name").get<std::string>();
      spec.initial.x = r.at("x").get<double>() * world_scale;
      spec.initial.y = r.at("y").get<double>() * world_scale;
      spec.initial.theta = r.value("theta", 0.0);
      spec.mission = r.at("mission").get<std::string>();
      spec.seed = r.value("seed", std::uint64_t{0});
      cfg.robots.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::filesystem::path world_path;
  try {
    world_path = path.parent_path() / json::parse(text).at("world").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  if (!std::filesystem::exists(world_path)) {
    throw ConfigError("world file '" + world_path.string() + "' does not exist");
  }
  const World world = load_world(world_path);
  SimConfig cfg = parse_sim_config(text, path.parent_path(), world.scale);
  if (!std::filesystem::exists(cfg.spec_path)) {
    throw ConfigError("spec file '" + cfg.spec_path.string() + "' does not exist");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Log

std::vector<const StepRecord*> SimLog::steps(std::string_view robot) const {
  std::vector<const StepRecord*> out;
  for (const auto& e : entries) {
    if (const auto* s = std::get_if<StepRecord>(&e); s != nullptr && s->robot == robot) {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<const Event*> SimLog::events(std::string_view kind) const {
  std::vector<const Event*> out;
  for (const auto& e : entries) {
    if (const auto* ev = std::get_if<Event>(&e); ev != nullptr && ev->kind == kind) {
      out.push_back(ev);
    }
  }
  return out;
}

namespace {

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json header_json(const LogHeader& h) {
  json robots = json::array();
  for (const auto& [name, mission] : h.robots) robots.push_back({{"name", name}, {"mission", mission}});
  return {{"type", "header"},
          {"version", 1},
          {"world", h.world},
          {"spec", h.spec},
          {"sim_dt", h.sim_dt},
          {"control_period", h.control_period},
          {"duration", h.duration},
          {"seed", h.seed},
          {"footprint_radius", h.predicates.footprint_radius},
          {"safety_margin", h.predicates.safety_margin},
          {"reach_radius", h.reach_radius},
          {"safety", h.safety},
          {"route_monitors", h.route_monitors},
          {"robots", robots}};
}

json entry_json(const LogEntry& e) {
  if (const auto* s = std::get_if<StepRecord>(&e)) {
    return {{"type", "step"},       {"t", s->t},
            {"robot", s->robot},    {"x", s->pose.x},
            {"y", s->pose.y},       {"theta", s->pose.theta},
            {"v", s->pose.v},       {"omega", s->pose.omega},
            {"cmd_v", s->command.v}, {"cmd_omega", s->command.omega},
            {"brake", s->full_brake}, {"safe", s->safe},
            {"goal", opt_json(s->goal)}, {"subgoal", opt_json(s->subgoal)}};
  }
  const auto& ev = std::get<Event>(e);
  return {{"type", "event"}, {"t", ev.t}, {"robot", ev.robot}, {"event", ev.kind}, {"detail", ev.detail}};
}

}  // namespace

void write_jsonl(const SimLog& log, std::ostream& os) {
  os << header_json(log.header).dump() << '\n';
  for (const auto& e : log.entries) os << entry_json(e).dump() << '\n';
}

std::string to_jsonl(const SimLog& log) {
  std::ostringstream os;
  write_jsonl(log, os);
  return os.str();
}

SimLog parse_jsonl(std::istream& is) {
  SimLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        auto& h = log.header;
        h.world = j.at("world").get<std::string>();
        h.spec = j.at("spec").get<std::string>();
        h.sim_dt = j.at("sim_dt").get<double>();
        h.control_period = j.at("control_period").get<double>();
        h.duration = j.at("duration").get<double>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.predicates.footprint_radius = j.at("footprint_radius").get<double>();
        h.predicates.safety_margin = j.at("safety_margin").get<double>();
        h.reach_radius = j.at("reach_radius").get<double>();
        h.safety = j.at("safety").get<std::vector<std::string>>();
        h.route_monitors = j.at("route_monitors").get<std::vector<std::string>>();
        for (const auto& r : j.at("robots")) {
          h.robots.emplace_back(r.at("name").get<std::string>(), r.at("mission").get<std::string>());
        }
        have_header = true;
      } else if (type == "step") {
        StepRecord s;
        s.t = j.at("t").get<double>();
        s.robot = j.at("robot").get<std::string>();
        s.pose = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>(),
                  j.at("v").get<double>(), j.at("omega").get<double>()};
        s.command = {j.at("cmd_v").get<double>(), j.at("cmd_omega").get<double>()};
        s.full_brake = j.at("brake").get<bool>();
        s.safe = j.at("safe").get<bool>();
        s.goal = opt_string(j.at("goal"));
        s.subgoal = opt_string(j.at("subgoal"));
        log.entries.emplace_back(std::move(s));
      } else if (type == "event") {
        Event ev;
        ev.t = j.at("t").get<double>();
        ev.robot = j.at("robot").get<std::string>();
        ev.kind = j.at("event").get<std::string>();
        ev.detail = j.at("detail").get<std::string>();
        log.entries.emplace_back(std::move(ev));
      } else {
        throw SchemaError("line " + std::to_string(line_no) + ": unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header && !log.entries.empty()) throw SchemaError("log has no header record");
  return log;
}

SimLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open log '" + path.string() + "'");
  return parse_jsonl(in);
}

// ---------------------------------------------------------------------------
// Simulation

dwa::VelocityCommand track(const dwa::VelocityCommand& current, const dwa::VelocityCommand& cmd,
                           const dwa::Limits& limits, double period) {
  const double dv = limits.a_max * period;
  const double dw = limits.alpha_max * period;
  dwa::VelocityCommand out;
  out.v = std::clamp(cmd.v, current.v - dv, current.v + dv);
  out.omega = std::clamp(cmd.omega, current.omega - dw, current.omega + dw);
  return out;
}

namespace {

struct Robot {
  RobotSpec spec;
  RobotState pose;
  std::unique_ptr<Controller> controller;
  bool halted = false;
  bool finished = false;
  std::set<std::string> visiting;
  Vec2 last;  // position at the previous visit check
  std::size_t cycles_offset = 0;
  RobotSummary summary;
};

std::uint64_t stream_seed(std::uint64_t global, std::size_t index, std::uint64_t robot_seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(global), static_cast<std::uint32_t>(global >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(robot_seed),
                    static_cast<std::uint32_t>(robot_seed >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<Obstacle> snapshot_obstacles(const std::vector<Obstacle>& walls,
                                         const std::vector<Vec2>& positions,
                                         const std::vector<double>& speeds, std::size_t self,
                                         double footprint) {
  std::vector<Obstacle> obs = walls;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j != self) obs.push_back(Obstacle::disc(positions[j], footprint, speeds[j]));
  }
  return obs;
}

}  // namespace

SimResult run_sim(const SimConfig& cfg) {
  cfg.validate();
  const World world = load_world(cfg.world_path);
  const spec::SpecFile spec = spec::load_spec(cfg.spec_path);
  const ltl::Domains domains = spec_domains(spec, &world);
  const route::TopoGraph graph = route::TopoGraph::from_world(world);
  const ltl::MonitorProgram safety = compile_conjunction(spec, cfg.safety, domains);
  std::vector<ltl::MonitorProgram> route_monitors;
  for (const auto& name : cfg.route_monitors) {
    route_monitors.push_back(compile_property(spec, name, domains));
  }
  const auto walls = wall_obstacles(world);
  const double footprint = cfg.controller.predicates.footprint_radius;

  SimResult result;
  auto& log = result.log;
  log.header.world = cfg.world_path.string();
  log.header.spec = cfg.spec_path.string();
  log.header.sim_dt = cfg.sim_dt;
  log.header.control_period = cfg.control_period;
  log.header.duration = cfg.duration;
  log.header.seed = cfg.seed;
  log.header.predicates = cfg.controller.predicates;
  log.header.reach_radius = cfg.controller.reach_radius;
  log.header.safety = cfg.safety;
  log.header.route_monitors = cfg.route_monitors;

  ControllerConfig ccfg = cfg.controller;
  ccfg.dwa.control_period = cfg.control_period;

  std::vector<Robot> robots;
  for (std::size_t i = 0; i < cfg.robots.size(); ++i) {
    const auto& rs = cfg.robots[i];
    Robot r;
    r.spec = rs;
    r.pose = rs.initial;
    auto aut = compile_mission_def(spec, rs.mission, world);
    r.cycles_offset = aut.loops_to_start ? 0 : 1;
    r.controller = std::make_unique<Controller>(world, graph, safety, route_monitors,
                                                std::move(aut), ccfg,
                                                stream_seed(cfg.seed, i, rs.seed));
    r.summary.name = rs.name;
    r.summary.mission = rs.mission;
    log.header.robots.emplace_back(rs.name, rs.mission);
    robots.push_back(std::move(r));
  }

  const auto periods = static_cast<std::size_t>(std::floor(cfg.duration / cfg.control_period + 1e-9));
  const auto substeps = static_cast<std::size_t>(std::llround(cfg.control_period / cfg.sim_dt));
  const std::size_t n = robots.size();
  std::set<std::pair<std::size_t, std::size_t>> touching;  // (i, j) with j == n for walls
  std::vector<dwa::VelocityCommand> applied(n);
  std::vector<Vec2> snapshot(n);
  std::vector<double> speeds(n);

  const auto event = [&](double t, const std::string& robot, std::string kind, std::string detail) {
    log.entries.emplace_back(Event{t, robot, std::move(kind), std::move(detail)});
  };

  std::map<std::string, Segment> door_spans;
  for (const auto& id : world.doors) door_spans.emplace(id, door_span(world, id));

  for (std::size_t k = 0; k < periods; ++k) {
    const double t = static_cast<double>(k) * cfg.control_period;
    for (std::size_t i = 0; i < n; ++i) {
      snapshot[i] = robots[i].pose.position();
      speeds[i] = std::abs(robots[i].pose.v);
    }

    for (std::size_t i = 0; i < n; ++i) {
      Robot& r = robots[i];
      std::set<std::string> now;
      for (const auto& [id, p] : world.nodes) {
        if (const auto span = door_spans.find(id); span != door_spans.end()) {
          // A door is visited when the robot passes through its opening.
          if (k > 0 && segments_intersect({r.last, snapshot[i]}, span->second)) {
            event(t, r.spec.name, "visit", id);
          }
          continue;
        }
        auto loc = world.locations.find(id);
        const bool in = loc != world.locations.end()
                            ? distance(snapshot[i], loc->second.center) <= loc->second.radius
                            : distance(snapshot[i], p) <= cfg.controller.reach_radius;
        if (in) {
          now.insert(id);
          if (!r.visiting.contains(id)) event(t, r.spec.name, "visit", id);
        }
      }
      r.visiting = std::move(now);
      r.last = snapshot[i];
    }

    for (std::size_t i = 0; i < n; ++i) {
      Robot& r = robots[i];
      const auto obstacles = snapshot_obstacles(walls, snapshot, speeds, i, footprint);
      StepRecord rec;
      rec.t = t;
      rec.robot = r.spec.name;
      rec.pose = r.pose;
      ControlOutput out;
      if (!r.halted) {
        try {
          out = r.controller->control_step(r.pose, obstacles);
        } catch (const Error& e) {
          r.halted = true;
          r.summary.errors.push_back(e.what());
          event(t, r.spec.name, "error", e.what());
        }
      }
      if (r.halted) {
        out = ControlOutput{};
        out.full_brake = true;
        out.safe = r.controller->observe(r.pose, obstacles);
        out.goal = std::nullopt;
      }
      if (out.goal_changed && out.goal) event(t, r.spec.name, "goal", *out.goal);
      if (out.new_route) {
        std::string nodes;
        for (const auto& id : out.new_route->nodes) nodes += (nodes.empty() ? "" : " ") + id;
        event(t, r.spec.name, "route", nodes);
      }
      if (out.matched) {
        event(t, r.spec.name, "match", std::to_string(r.controller->mission_state().completed_matches));
      }
      if (out.mission_finished && !r.finished) {
        r.finished = true;
        event(t, r.spec.name, "finished", r.spec.mission);
      }
      rec.command = out.command;
      rec.full_brake = out.full_brake;
      rec.safe = out.safe;
      rec.goal = out.goal;
      rec.subgoal = out.subgoal;
      if (!out.safe) ++r.summary.unsafe_steps;
      log.entries.emplace_back(std::move(rec));
      applied[i] = track({r.pose.v, r.pose.omega}, out.command, cfg.controller.dwa.limits,
                         cfg.control_period);
    }

    for (std::size_t s = 0; s < substeps; ++s) {
      const double ts = t + static_cast<double>(s + 1) * cfg.sim_dt;
      for (std::size_t i = 0; i < n; ++i) {
        robots[i].pose = dwa::integrate(robots[i].pose, applied[i], cfg.sim_dt);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = robots[i].pose.position();
        double wall = std::numeric_limits<double>::infinity();
        for (const auto& w : world.walls) wall = std::min(wall, point_segment_distance(p, w));
        const std::pair<std::size_t, std::size_t> wall_key{i, n};
        if (wall < footprint) {
          if (touching.insert(wall_key).second) {
            event(ts, robots[i].spec.name, "collision", "wall");
            ++robots[i].summary.collisions;
            ++result.summary.collisions;
          }
        } else {
          touching.erase(wall_key);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
          const std::pair<std::size_t, std::size_t> key{i, j};
          if (distance(p, robots[j].pose.position()) < 2.0 * footprint) {
            if (touching.insert(key).second) {
              event(ts, robots[i].spec.name, "collision", robots[j].spec.name);
              ++robots[i].summary.collisions;
              ++robots[j].summary.collisions;
              ++result.summary.collisions;
            }
          } else {
            touching.erase(key);
          }
        }
      }
    }
  }

  for (auto& r : robots) {
    r.summary.matches = r.controller->mission_state().completed_matches;
    r.summary.cycles =
        r.summary.matches > r.cycles_offset ? r.summary.matches - r.cycles_offset : 0;
    result.summary.unsafe_steps += r.summary.unsafe_steps;
    result.summary.errors += r.summary.errors.size();
    result.summary.robots.push_back(r.summary);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Replay

std::size_t RobotReplay::violations(const std::string& property) const {
  auto it = verdicts.find(property);
  if (it == verdicts.end()) return 0;
  return static_cast<std::size_t>(std::count(it->second.begin(), it->second.end(), false));
}

bool ReplayReport::agrees() const {
  return std::all_of(robots.begin(), robots.end(),
                     [](const RobotReplay& r) { return r.disagreements == 0; });
}

std::size_t ReplayReport::violations() const {
  std::size_t total = 0;
  for (const auto& r : robots) {
    for (const auto& [p, v] : r.verdicts) total += r.violations(p);
  }
  return total;
}

ReplayReport replay_check(const SimLog& log, const World& world, const spec::SpecFile& spec) {
  const ltl::Domains domains = spec_domains(spec, &world);
  const auto& names = log.header.safety;
  std::vector<ltl::MonitorProgram> programs;
  for (const auto& p : names) programs.push_back(compile_property(spec, p, domains));
  const auto walls = wall_obstacles(world);
  const double footprint = log.header.predicates.footprint_radius;

  ReplayReport report;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<ltl::MonitorState>> states;
  for (const auto& [name, mission] : log.header.robots) {
    index[name] = report.robots.size();
    report.robots.push_back({name, {}, {}, 0});
    std::vector<ltl::MonitorState> st;
    for (const auto& p : programs) st.emplace_back(p);
    states.push_back(std::move(st));
  }

  // Group the step records of one tick, then evaluate every robot against the others.
  std::vector<const StepRecord*> tick;
  const auto flush = [&]() {
    for (const StepRecord* s : tick) {
      auto it = index.find(s->robot);
      if (it == index.end()) throw SchemaError("step record for undeclared robot '" + s->robot + "'");
      std::vector<Obstacle> obs = walls;
      for (const StepRecord* o : tick) {
        if (o != s) obs.push_back(Obstacle::disc(o->pose.position(), footprint));
      }
      const auto v = evaluate_predicates(s->pose, obs, world, log.header.predicates);
      auto& rr = report.robots[it->second];
      bool all = true;
      for (std::size_t p = 0; p < programs.size(); ++p) {
        const bool verdict = ltl::step(programs[p], states[it->second][p], v);
        rr.verdicts[names[p]].push_back(verdict);
        all = all && verdict;
      }
      rr.online.push_back(s->safe);
      if (all != s->safe) ++rr.disagreements;
    }
    tick.clear();
  };
  for (const auto& e : log.entries) {
    const auto* s = std::get_if<StepRecord>(&e);
    if (s == nullptr) continue;
    if (!tick.empty() && s->t != tick.front()->t) flush();
    tick.push_back(s);
  }
  flush();
  return report;
}

}  // namespace navstack::sim
