#pragma once

// Per-robot navigation stack: mission monitor -> goal -> compliant route ->
// sub-goal -> monitor-filtered DWA command.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "navstack/dwa.hpp"
#include "navstack/pastltl.hpp"
#include "navstack/regexmon.hpp"
#include "navstack/router.hpp"
#include "navstack/speclang.hpp"
#include "navstack/world.hpp"

namespace navstack {

/// Domains declared in `spec` plus, when not declared there, `node` (graph
/// node ids) and `location` (location names) taken from the world.
ltl::Domains spec_domains(const spec::SpecFile& spec, const World* world = nullptr);

/// Expands, instantiates and compiles one named formula.
ltl::MonitorProgram compile_property(const spec::SpecFile& spec, const std::string& name,
                                     const ltl::Domains& domains);

/// Compiles the conjunction of several named formulas into one program.
ltl::MonitorProgram compile_conjunction(const spec::SpecFile& spec,
                                        const std::vector<std::string>& names,
                                        const ltl::Domains& domains);

/// Expands and compiles a named mission regex, validating its locations.
mission::PositionAutomaton compile_mission_def(const spec::SpecFile& spec, const std::string& name,
                                               const World& world);

struct ControllerConfig {
  dwa::Params dwa;
  PredicateParams predicates;
  std::size_t k_max = 32;
  double reach_radius = 0.3;      // m
  int brake_replan_periods = 8;  // consecutive full brakes before a forced replan
  // Grow each disc obstacle by the distance it can cover in one period
  // ((speed + a_max * period) * period) when filtering candidates. The live
  // monitor always sees the unpadded snapshot.
  bool pad_moving_obstacles = true;
  // A door is crossed in two legs: first to door_lead before the door line,
  // then to door_lead past it, both door_keep_right to the right of the
  // crossing direction so opposite traffic uses separate halves of the door.
  // The door counts as reached once the robot is door_pass past the line.
  double door_keep_right = 0.3;  // m
  double door_lead = 0.45;       // m
  double door_pass = 0.2;        // m
  // Before crossing, within door_queue of the door, a robot gives way while
  // another robot nearer the door is within door_busy of it: it backs off to
  // door_wait before the door line on its own side, or holds if already there.
  double door_busy = 0.8;   // m
  double door_queue = 2.0;  // m
  double door_wait = 1.2;   // m
  // No progress of stall_progress toward the target within stall_periods
  // means a stall. Near another robot the controller then heads for a point
  // right of it until it gets there or detour_periods pass; otherwise it
  // replans. Periods spent turning in place do not count toward a stall.
  int stall_periods = 12;
  double stall_progress = 0.1;   // m
  double stall_radius = 1.5;     // m
  double detour_distance = 1.0;  // m
  int detour_periods = 24;
};

struct ControlOutput {
  dwa::VelocityCommand command;
  bool full_brake = false;
  bool safe = true;  // live safety verdict after this period's observation
  std::optional<std::string> goal;
  std::optional<std::string> subgoal;
  bool matched = false;       // the mission completed a match this period
  bool goal_changed = false;
  std::optional<route::Route> new_route;  // set when a route was planned this period
  bool mission_finished = false;
};

class Controller {
 public:
  Controller(const World& world, const route::TopoGraph& graph, ltl::MonitorProgram safety,
             std::vector<ltl::MonitorProgram> route_monitors, mission::PositionAutomaton mission,
             ControllerConfig config, std::uint64_t seed);

  /// One control period. `pose` carries the current velocities; `obstacles`
  /// are the walls plus the other robots as seen at the start of the period.
  /// Throws DeadMission, NoPath, NoCompliantRoute.
  ControlOutput control_step(const RobotState& pose, std::span<const Obstacle> obstacles);

  /// Steps only the live safety monitor; used once a robot has stopped planning.
  bool observe(const RobotState& pose, std::span<const Obstacle> obstacles);

  const mission::MissionState& mission_state() const { return mission_state_; }
  const ltl::MonitorState& safety_state() const { return live_; }
  const ltl::MonitorProgram& safety_program() const { return safety_; }
  const std::vector<std::string>& leg_history() const { return leg_history_; }

 private:
  std::string route_origin(Vec2 p) const;
  void plan(const RobotState& pose, ControlOutput& out);
  Vec2 crossing_direction(std::size_t j) const;
  bool reached(std::size_t j, Vec2 pose) const;
  Vec2 subgoal_target(std::size_t j, Vec2 pose);
  bool door_busy(std::size_t j, Vec2 pose, std::span<const Obstacle> obstacles) const;
  void record_reached(std::size_t from, std::size_t to);
  Vec2 unstall(const RobotState& pose, Vec2 target, std::span<const Obstacle> obstacles);

  const World* world_;
  const route::TopoGraph* graph_;
  ltl::MonitorProgram safety_;
  std::vector<ltl::MonitorProgram> route_monitors_;
  mission::PositionAutomaton mission_;
  ControllerConfig config_;
  PredicateEvaluator evaluator_;
  ltl::MonitorState live_;
  mission::MissionState mission_state_;
  std::mt19937_64 rng_;

  std::optional<std::string> goal_;
  std::optional<route::RouteProgress> route_;
  std::vector<std::string> leg_history_;
  int brake_count_ = 0;
  Vec2 last_target_{std::numeric_limits<double>::quiet_NaN(), 0.0};
  double best_distance_ = std::numeric_limits<double>::infinity();
  int stall_count_ = 0;
  int detour_left_ = 0;
  std::optional<std::size_t> door_approached_;  // route index whose near leg is done
  Vec2 detour_target_;
  bool finished_ = false;
  std::vector<std::uint8_t> values_;
};

}  // namespace navstack
