#include "navstack/dwa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace navstack::dwa {

namespace {

constexpr double kStraightOmega = 1e-6;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  return out;
}

}  // namespace

DynamicWindow window(const VelocityCommand& current, const Limits& limits, double dt) {
  DynamicWindow w;
  w.v_lo = std::max(0.0, current.v - limits.a_max * dt);
  w.v_hi = std::min(limits.v_max, current.v + limits.a_max * dt);
  w.omega_lo = std::max(-limits.omega_max, current.omega - limits.alpha_max * dt);
  w.omega_hi = std::min(limits.omega_max, current.omega + limits.alpha_max * dt);
  // A current velocity outside the limits collapses the window onto the nearest bound.
  if (w.v_lo > w.v_hi) w.v_lo = w.v_hi = std::clamp(current.v, 0.0, limits.v_max);
  if (w.omega_lo > w.omega_hi) {
    w.omega_lo = w.omega_hi = std::clamp(current.omega, -limits.omega_max, limits.omega_max);
  }
  return w;
}

std::vector<VelocityCommand> dynamic_window(const VelocityCommand& current, const Limits& limits,
                                            double dt, int n_v, int n_omega) {
  const DynamicWindow w = window(current, limits, dt);
  std::vector<VelocityCommand> out;
  for (double v : linspace(w.v_lo, w.v_hi, n_v)) {
    for (double om : linspace(w.omega_lo, w.omega_hi, n_omega)) out.push_back({v, om});
  }
  return out;
}

RobotState integrate(const RobotState& s, const VelocityCommand& cmd, double dt) {
  RobotState n = s;
  const double v = cmd.v;
  const double w = cmd.omega;
  if (std::abs(w) < kStraightOmega) {
    n.x += v * dt * std::cos(s.theta);
    n.y += v * dt * std::sin(s.theta);
  } else {
    n.x += (v / w) * (std::sin(s.theta + w * dt) - std::sin(s.theta));
    n.y += (v / w) * (std::cos(s.theta) - std::cos(s.theta + w * dt));
    n.theta += w * dt;
  }
  n.v = v;
  n.omega = w;
  return n;
}

CandidateTrajectory rollout(const RobotState& start, const VelocityCommand& cmd, double horizon,
                            double dt) {
  CandidateTrajectory c;
  c.command = cmd;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  c.samples.reserve(steps + 1);
  RobotState s = start;
  s.v = cmd.v;
  s.omega = cmd.omega;
  c.samples.push_back({0.0, s});
  for (std::size_t k = 1; k <= steps; ++k) {
    s = integrate(s, cmd, dt);
    c.samples.push_back({static_cast<double>(k) * dt, s});
  }
  return c;
}

std::vector<CandidateTrajectory> filter_safe(std::vector<CandidateTrajectory>& candidates,
                                             const ltl::MonitorProgram& monitor,
                                             const ltl::MonitorState& live,
                                             const PredicateEvaluator& predicates,
                                             std::span<const Obstacle> obstacles) {
  std::vector<CandidateTrajectory> safe;
  std::vector<std::uint8_t> values;
  for (auto& c : candidates) {
    ltl::MonitorState st = live;
    c.safe = true;
    for (const auto& s : c.samples) {
      predicates.evaluate(s.state, obstacles, values);
      if (!ltl::step_values(monitor, st, values)) {
        c.safe = false;
        break;
      }
    }
    if (c.safe) safe.push_back(c);
  }
  return safe;
}

std::vector<Sample> brake_continuation(const RobotState& start, const Limits& limits, double period,
                                       double sample_dt) {
  std::vector<Sample> out;
  const int per_period = std::max(1, static_cast<int>(std::ceil(period / sample_dt - 1e-9)));
  const double h = period / per_period;
  RobotState s = start;
  double t = 0.0;
  for (int guard = 0; guard < 1000 && (s.v != 0.0 || s.omega != 0.0); ++guard) {
    const VelocityCommand applied{
        std::clamp(0.0, s.v - limits.a_max * period, s.v + limits.a_max * period),
        std::clamp(0.0, s.omega - limits.alpha_max * period, s.omega + limits.alpha_max * period)};
    for (int k = 0; k < per_period; ++k) {
      s = integrate(s, applied, h);
      t += h;
      out.push_back({t, s});
    }
  }
  return out;
}

void mark_stoppable(std::span<CandidateTrajectory> safe, const ltl::MonitorProgram& monitor,
                    const ltl::MonitorState& live, const PredicateEvaluator& predicates,
                    std::span<const Obstacle> obstacles, const Params& params) {
  std::vector<std::uint8_t> values;
  const double period = params.control_period;
  for (auto& c : safe) {
    ltl::MonitorState st = live;
    c.stoppable = true;
    const Sample* at_period = nullptr;
    for (const auto& s : c.samples) {
      if (s.t > period + 1e-9) break;
      predicates.evaluate(s.state, obstacles, values);
      if (!ltl::step_values(monitor, st, values)) c.stoppable = false;
      at_period = &s;
    }
    if (!c.stoppable || at_period == nullptr) continue;
    for (const auto& s :
         brake_continuation(at_period->state, params.limits, period, params.sample_dt)) {
      predicates.evaluate(s.state, obstacles, values);
      if (!ltl::step_values(monitor, st, values)) {
        c.stoppable = false;
        break;
      }
    }
  }
}

double trajectory_clearance(const CandidateTrajectory& c, double footprint_radius,
                            std::span<const Obstacle> obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : c.samples) {
    best = std::min(best, min_clearance(s.state.position(), footprint_radius, obstacles));
  }
  return best;
}

Selection score_and_select(std::span<CandidateTrajectory> safe, Vec2 goal,
                           std::span<const Obstacle> obstacles, const Params& params,
                           double footprint_radius) {
  Selection best;
  for (std::size_t i = 0; i < safe.size(); ++i) {
    auto& c = safe[i];
    const Vec2 end = c.samples.back().state.position();
    const double clear =
        std::min(trajectory_clearance(c, footprint_radius, obstacles), params.clear_cap);
    const auto& last = c.samples.back().state;
    const double bearing = std::atan2(goal.y - end.y, goal.x - end.x);
    const double heading_error =
        std::abs(std::remainder(bearing - last.theta, 2.0 * std::numbers::pi));
    c.score = params.w_speed * c.command.v - params.w_goal * distance(end, goal) +
              params.w_clear * clear - params.w_heading * heading_error / std::numbers::pi;
    const bool better =
        best.full_brake || c.score > best.score ||
        (c.score == best.score && std::abs(c.command.omega) < std::abs(best.command.omega));
    if (better) {
      best.full_brake = false;
      best.command = c.command;
      best.index = i;
      best.score = c.score;
    }
  }
  return best;
}

Decision plan(const RobotState& pose, Vec2 goal, const ltl::MonitorProgram& monitor,
              const ltl::MonitorState& live, const PredicateEvaluator& predicates,
              std::span<const Obstacle> obstacles, const Params& params) {
  return plan(pose, goal, monitor, live, predicates, obstacles, obstacles, params);
}

Decision plan(const RobotState& pose, Vec2 goal, const ltl::MonitorProgram& monitor,
              const ltl::MonitorState& live, const PredicateEvaluator& predicates,
              std::span<const Obstacle> obstacles, std::span<const Obstacle> stop_obstacles,
              const Params& params) {
  Decision d;
  const auto commands = dynamic_window({pose.v, pose.omega}, params.limits, params.control_period,
                                       params.n_v, params.n_omega);
  d.candidates.reserve(commands.size());
  for (const auto& cmd : commands) {
    auto c = rollout(pose, cmd, params.horizon, params.sample_dt);
    // The pose at the end of the period is what gets executed; make sure it is checked.
    const double t = params.control_period;
    auto at = std::lower_bound(c.samples.begin(), c.samples.end(), t - 1e-9,
                               [](const Sample& s, double x) { return s.t < x; });
    if (at != c.samples.end() && std::abs(at->t - t) > 1e-9) {
      c.samples.insert(at, Sample{t, integrate(c.samples.front().state, cmd, t)});
    }
    d.candidates.push_back(std::move(c));
  }
  d.safe = filter_safe(d.candidates, monitor, live, predicates, obstacles);
  if (params.prefer_stoppable && !d.safe.empty()) {
    mark_stoppable(d.safe, monitor, live, predicates, stop_obstacles, params);
    for (const auto& c : d.safe) {
      if (c.stoppable) d.pool.push_back(c);
    }
    if (d.pool.empty()) {
      // Nothing can stop safely: slow down as hard as the safe set allows.
      double v_min = d.safe.front().command.v;
      for (const auto& c : d.safe) v_min = std::min(v_min, c.command.v);
      for (const auto& c : d.safe) {
        if (c.command.v == v_min) d.pool.push_back(c);
      }
    }
  }
  if (d.pool.empty()) d.pool = d.safe;
  d.selection = score_and_select(d.pool, goal, obstacles, params,
                                 predicates.params().footprint_radius);
  return d;
}

}  // namespace navstack::dwa
