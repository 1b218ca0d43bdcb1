#pragma once

// Deterministic multi-robot simulation, its JSON-lines log and the offline
// re-check of logged traces.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "navstack/navstack.hpp"

namespace navstack::sim {

struct RobotSpec {
  std::string name;
  RobotState initial;  // meters and radians
  std::string mission;
  std::uint64_t seed = 0;
};

struct SimConfig {
  std::filesystem::path world_path;
  std::filesystem::path spec_path;
  double sim_dt = 0.05;
  double control_period = 0.25;
  double duration = 600.0;
  std::uint64_t seed = 0;
  std::vector<std::string> safety{"ca", "ow"};
  std::vector<std::string> route_monitors{"sp", "nd"};
  ControllerConfig controller;
  std::vector<RobotSpec> robots;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses a run config. Relative world/spec paths resolve against `base_dir`.
/// Robot positions are given in world-file units and scaled by `world_scale`.
/// Throws ConfigError.
SimConfig parse_sim_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           double world_scale);
/// Reads the config and the world it references (for the scale).
SimConfig load_sim_config(const std::filesystem::path& path);

struct StepRecord {
  double t = 0.0;
  std::string robot;
  RobotState pose;  // v, omega: velocity being tracked at t
  dwa::VelocityCommand command;
  bool full_brake = false;
  bool safe = true;
  std::optional<std::string> goal;
  std::optional<std::string> subgoal;
};

struct Event {
  double t = 0.0;
  std::string robot;
  std::string kind;  // collision, goal, match, visit, route, error, finished
  std::string detail;
};

using LogEntry = std::variant<StepRecord, Event>;

struct LogHeader {
  std::string world;
  std::string spec;
  double sim_dt = 0.0;
  double control_period = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
  PredicateParams predicates;
  double reach_radius = 0.0;
  std::vector<std::string> safety;
  std::vector<std::string> route_monitors;
  std::vector<std::pair<std::string, std::string>> robots;  // name, mission
};

struct SimLog {
  LogHeader header;
  std::vector<LogEntry> entries;  // time-ordered

  std::vector<const StepRecord*> steps(std::string_view robot) const;
  std::vector<const Event*> events(std::string_view kind) const;
};

void write_jsonl(const SimLog& log, std::ostream& os);
std::string to_jsonl(const SimLog& log);
/// Throws SchemaError.
SimLog parse_jsonl(std::istream& is);
SimLog load_log(const std::filesystem::path& path);

struct RobotSummary {
  std::string name;
  std::string mission;
  std::size_t matches = 0;
  std::size_t cycles = 0;  // matches of the repeating part of the mission
  std::size_t unsafe_steps = 0;
  std::size_t collisions = 0;
  std::vector<std::string> errors;
};

struct Summary {
  std::vector<RobotSummary> robots;
  std::size_t collisions = 0;
  std::size_t unsafe_steps = 0;
  std::size_t errors = 0;
};

struct SimResult {
  SimLog log;
  Summary summary;
};

/// Throws ConfigError and spec/world errors before the first tick.
SimResult run_sim(const SimConfig& cfg);

/// Applied velocity after one period of rate-limited tracking of `cmd`.
dwa::VelocityCommand track(const dwa::VelocityCommand& current, const dwa::VelocityCommand& cmd,
                           const dwa::Limits& limits, double period);

struct RobotReplay {
  std::string robot;
  std::map<std::string, std::vector<bool>> verdicts;  // per property, per step
  std::vector<bool> online;
  std::size_t disagreements = 0;

  std::size_t violations(const std::string& property) const;
};

struct ReplayReport {
  std::vector<RobotReplay> robots;

  bool agrees() const;
  std::size_t violations() const;
};

/// Re-evaluates the header's safety properties over each robot's logged
/// poses, with the other robots' logged poses at the same t as obstacles.
ReplayReport replay_check(const SimLog& log, const World& world, const spec::SpecFile& spec);

}  // namespace navstack::sim
