#pragma once

// Dynamic-window trajectory search with monitor-based filtering: sample the
// velocity commands reachable within one control period, roll each one out
// over a short horizon, discard rollouts the safety monitor rejects and pick
// the best survivor by a weighted score.

#include <cstddef>
#include <span>
#include <vector>

#include "navstack/pastltl.hpp"
#include "navstack/world.hpp"

namespace navstack::dwa {

struct VelocityCommand {
  double v = 0.0;
  double omega = 0.0;
  bool operator==(const VelocityCommand&) const = default;
};

struct Limits {
  double v_max = 1.0;      // m/s, no reverse motion
  double omega_max = 2.0;  // rad/s
  double a_max = 1.0;      // m/s^2
  double alpha_max = 3.0;  // rad/s^2
};

struct Params {
  Limits limits;
  double control_period = 0.25;  // s
  double horizon = 2.0;          // s
  double sample_dt = 0.1;        // s
  int n_v = 7;
  int n_omega = 11;
  double w_speed = 0.3;
  double w_goal = 1.0;
  double w_clear = 0.4;
  double clear_cap = 1.0;  // m
  double w_heading = 0.2;  // per pi rad of endpoint heading error
  // Select among candidates that can still brake to a stop safely after one
  // period when there are any.
  bool prefer_stoppable = true;
};

struct DynamicWindow {
  double v_lo = 0.0;
  double v_hi = 0.0;
  double omega_lo = 0.0;
  double omega_hi = 0.0;

  bool contains(const VelocityCommand& c, double tol = 1e-12) const {
    return c.v >= v_lo - tol && c.v <= v_hi + tol && c.omega >= omega_lo - tol &&
           c.omega <= omega_hi + tol;
  }
};

struct Sample {
  double t = 0.0;
  RobotState state;
};

struct CandidateTrajectory {
  std::vector<Sample> samples;
  VelocityCommand command;
  bool safe = false;
  bool stoppable = false;
  double score = 0.0;
};

/// Velocities reachable from `current` within `dt`, clipped to the limits.
DynamicWindow window(const VelocityCommand& current, const Limits& limits, double dt);

/// Uniform n_v x n_omega grid over the window, endpoints included, v-major.
std::vector<VelocityCommand> dynamic_window(const VelocityCommand& current, const Limits& limits,
                                            double dt, int n_v, int n_omega);

/// Exact constant-velocity unicycle motion over `dt`.
RobotState integrate(const RobotState& s, const VelocityCommand& cmd, double dt);

/// Samples at t = 0, dt, ..., horizon of the constant-command motion.
CandidateTrajectory rollout(const RobotState& start, const VelocityCommand& cmd, double horizon,
                            double dt);

/// Marks each candidate safe iff a copy of `live` stepped over its samples
/// stays true throughout; returns the safe ones in input order.
std::vector<CandidateTrajectory> filter_safe(std::vector<CandidateTrajectory>& candidates,
                                             const ltl::MonitorProgram& monitor,
                                             const ltl::MonitorState& live,
                                             const PredicateEvaluator& predicates,
                                             std::span<const Obstacle> obstacles);

/// Motion after executing `cmd` for one period from `start`: per-period
/// rate-limited tracking of (0, 0), held constant over each period, until
/// at rest. Sampled at most `sample_dt` apart and at every period end.
std::vector<Sample> brake_continuation(const RobotState& start, const Limits& limits, double period,
                                       double sample_dt);

/// For each safe candidate: stoppable iff the monitor, stepped over the
/// candidate's samples up to one period and then over the brake
/// continuation from there, stays true.
void mark_stoppable(std::span<CandidateTrajectory> safe, const ltl::MonitorProgram& monitor,
                    const ltl::MonitorState& live, const PredicateEvaluator& predicates,
                    std::span<const Obstacle> obstacles, const Params& params);

struct Selection {
  bool full_brake = true;
  VelocityCommand command;  // (0, 0) on full brake
  std::size_t index = 0;    // into the safe list
  double score = 0.0;
};

/// Smallest clearance over a trajectory's samples.
double trajectory_clearance(const CandidateTrajectory& c, double footprint_radius,
                            std::span<const Obstacle> obstacles);

/// score = w_speed * v - w_goal * |endpoint - goal| + w_clear * min(clearance, clear_cap)
///         - w_heading * |heading error at the endpoint| / pi.
/// Highest score wins; ties go to the smaller |omega|, then the earlier
/// candidate. Writes the score into every candidate. Empty input gives a full brake.
Selection score_and_select(std::span<CandidateTrajectory> safe, Vec2 goal,
                           std::span<const Obstacle> obstacles, const Params& params,
                           double footprint_radius);

struct Decision {
  Selection selection;
  std::vector<CandidateTrajectory> candidates;  // all rollouts, with safe flags
  std::vector<CandidateTrajectory> safe;
  std::vector<CandidateTrajectory> pool;  // what was scored; selection.index points here
};

/// One full search from `pose` (whose v/omega are the current velocities).
/// Each rollout also gets a sample at t = control_period when the sample
/// grid misses it. With prefer_stoppable the stoppable safe candidates are
/// scored when there are any, otherwise the slowest safe ones.
Decision plan(const RobotState& pose, Vec2 goal, const ltl::MonitorProgram& monitor,
              const ltl::MonitorState& live, const PredicateEvaluator& predicates,
              std::span<const Obstacle> obstacles, const Params& params);

/// As above, but the stoppable check runs against `stop_obstacles`, which may
/// be inflated further to account for obstacles moving while the robot brakes.
Decision plan(const RobotState& pose, Vec2 goal, const ltl::MonitorProgram& monitor,
              const ltl::MonitorState& live, const PredicateEvaluator& predicates,
              std::span<const Obstacle> obstacles, std::span<const Obstacle> stop_obstacles,
              const Params& params);

}  // namespace navstack::dwa
