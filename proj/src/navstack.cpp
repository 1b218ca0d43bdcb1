#include "navstack/navstack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navstack/errors.hpp"

namespace navstack {

ltl::Domains spec_domains(const spec::SpecFile& spec, const World* world) {
  ltl::Domains d(spec.domains.begin(), spec.domains.end());
  if (world != nullptr) {
    if (!d.contains("node")) {
      auto& nodes = d["node"];
      for (const auto& [id, p] : world->nodes) nodes.push_back(id);
    }
    if (!d.contains("location")) {
      auto& locs = d["location"];
      for (const auto& [name, l] : world->locations) locs.push_back(name);
    }
  }
  return d;
}

ltl::MonitorProgram compile_property(const spec::SpecFile& spec, const std::string& name,
                                     const ltl::Domains& domains) {
  return ltl::compile(ltl::instantiate_forall(spec::expand_formula(spec, name), domains));
}

ltl::MonitorProgram compile_conjunction(const spec::SpecFile& spec,
                                        const std::vector<std::string>& names,
                                        const ltl::Domains& domains) {
  if (names.empty()) return ltl::compile(spec::FormulaAst::constant(true));
  spec::FormulaAst f = ltl::instantiate_forall(spec::expand_formula(spec, names[0]), domains);
  for (std::size_t i = 1; i < names.size(); ++i) {
    f = spec::FormulaAst::binary(
        spec::FormulaKind::And, std::move(f),
        ltl::instantiate_forall(spec::expand_formula(spec, names[i]), domains));
  }
  return ltl::compile(f);
}

mission::PositionAutomaton compile_mission_def(const spec::SpecFile& spec, const std::string& name,
                                               const World& world) {
  std::set<std::string> locations;
  for (const auto& [l, loc] : world.locations) locations.insert(l);
  return mission::compile_mission(spec::expand_regex(spec, name), locations);
}

Controller::Controller(const World& world, const route::TopoGraph& graph,
                       ltl::MonitorProgram safety, std::vector<ltl::MonitorProgram> route_monitors,
                       mission::PositionAutomaton mission, ControllerConfig config,
                       std::uint64_t seed)
    : world_(&world),
      graph_(&graph),
      safety_(std::move(safety)),
      route_monitors_(std::move(route_monitors)),
      mission_(std::move(mission)),
      config_(config),
      evaluator_(world, safety_.atoms(), config.predicates),
      live_(safety_),
      rng_(seed) {}

std::string Controller::route_origin(Vec2 p) const {
  std::optional<std::size_t> best_visible;
  std::size_t best_any = 0;
  double d_visible = std::numeric_limits<double>::infinity();
  double d_any = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph_->size(); ++i) {
    const double d = distance(graph_->position(i), p);
    if (d < d_any) {
      d_any = d;
      best_any = i;
    }
    if (d < d_visible && line_of_sight(*world_, p, graph_->position(i))) {
      d_visible = d;
      best_visible = i;
    }
  }
  if (graph_->size() == 0) throw NoPath("the topological graph is empty");
  return graph_->id(best_visible.value_or(best_any));
}

void Controller::plan(const RobotState& pose, ControlOutput& out) {
  const std::string origin = route_origin(pose.position());
  route::Route r;
  try {
    r = route::plan_route(*graph_, origin, *goal_, route_monitors_, config_.k_max, leg_history_);
  } catch (const NoCompliantRoute&) {
    if (leg_history_.empty()) throw;
    leg_history_.clear();
    r = route::plan_route(*graph_, origin, *goal_, route_monitors_, config_.k_max, leg_history_);
  }
  // Skip the origin when the robot is already on its way to the next node.
  std::size_t next = 0;
  if (r.nodes.size() >= 2) {
    const Vec2 a = graph_->position(graph_->index(r.nodes[0]));
    const Vec2 b = graph_->position(graph_->index(r.nodes[1]));
    if (line_of_sight(*world_, pose.position(), b) &&
        distance(pose.position(), b) <= distance(a, b)) {
      next = 1;
    }
  }
  route_ = route::RouteProgress{r, next};
  door_approached_.reset();
  out.new_route = std::move(r);
}

// Unit normal of the door's wall, oriented toward the side of the next route
// node (or away from the previous one). Zero for nodes that are not doors.
Vec2 Controller::crossing_direction(std::size_t j) const {
  const auto& nodes = route_->route.nodes;
  if (!world_->doors.contains(nodes[j])) return {};
  const Vec2 p = graph_->position(graph_->index(nodes[j]));
  const Segment span = door_span(*world_, nodes[j]);
  const Vec2 u = (1.0 / norm(span.b - span.a)) * (span.b - span.a);
  const Vec2 n{-u.y, u.x};
  double side = 0.0;
  if (j + 1 < nodes.size()) side = dot(graph_->position(graph_->index(nodes[j + 1])) - p, n);
  if (std::abs(side) < 1e-6 && j > 0) side = dot(p - graph_->position(graph_->index(nodes[j - 1])), n);
  if (std::abs(side) < 1e-6) return {};
  return side > 0.0 ? n : -1.0 * n;
}

bool Controller::reached(std::size_t j, Vec2 pose) const {
  const Vec2 p = graph_->position(graph_->index(route_->route.nodes[j]));
  const Vec2 c = crossing_direction(j);
  if (c == Vec2{}) return distance(p, pose) <= config_.reach_radius;
  return dot(pose - p, c) >= config_.door_pass &&
         distance(p, pose) <= config_.door_lead + config_.door_keep_right + config_.reach_radius;
}

Vec2 Controller::subgoal_target(std::size_t j, Vec2 pose) {
  const Vec2 p = graph_->position(graph_->index(route_->route.nodes[j]));
  const Vec2 c = crossing_direction(j);
  if (c == Vec2{}) return p;
  const Vec2 side = p + config_.door_keep_right * Vec2{c.y, -c.x};
  const Vec2 near = side - config_.door_lead * c;
  if (door_approached_ != j &&
      (distance(pose, near) <= config_.reach_radius || dot(pose - p, c) >= 0.0)) {
    door_approached_ = j;
  }
  return door_approached_ == j ? side + config_.door_lead * c : near;
}

bool Controller::door_busy(std::size_t j, Vec2 pose, std::span<const Obstacle> obstacles) const {
  const Vec2 c = crossing_direction(j);
  if (c == Vec2{} || door_approached_ == j) return false;
  const Vec2 p = graph_->position(graph_->index(route_->route.nodes[j]));
  const double mine = distance(pose, p);
  if (mine > config_.door_queue) return false;
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) {
    if (o.kind != Obstacle::Kind::Disc) return false;
    const double theirs = distance(o.center, p);
    return theirs <= config_.door_busy && theirs < mine;
  });
}

void Controller::record_reached(std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    const std::string& n = route_->route.nodes[i];
    auto it = std::find(leg_history_.begin(), leg_history_.end(), n);
    if (it != leg_history_.end()) leg_history_.erase(it, leg_history_.end());
    leg_history_.push_back(n);
  }
}

Vec2 Controller::unstall(const RobotState& pose, Vec2 target,
                         std::span<const Obstacle> obstacles) {
  if (detour_left_ > 0) {
    if (--detour_left_ > 0 && distance(pose.position(), detour_target_) > config_.reach_radius) {
      return detour_target_;
    }
    detour_left_ = 0;
    best_distance_ = std::numeric_limits<double>::infinity();
  }
  if (!(distance(target, last_target_) < 1e-9)) {
    last_target_ = target;
    best_distance_ = std::numeric_limits<double>::infinity();
    stall_count_ = 0;
  }
  const double d = distance(pose.position(), target);
  if (d < best_distance_ - config_.stall_progress ||
      best_distance_ == std::numeric_limits<double>::infinity()) {
    best_distance_ = d;
    stall_count_ = 0;
    return target;
  }
  // Turning in place counts as progress.
  if (std::abs(pose.omega) > 0.1) return target;
  if (++stall_count_ < config_.stall_periods) return target;
  stall_count_ = 0;
  best_distance_ = std::numeric_limits<double>::infinity();

  const Obstacle* blocker = nullptr;
  double nearest = config_.stall_radius;
  for (const auto& o : obstacles) {
    if (o.kind != Obstacle::Kind::Disc) continue;
    const double dd = distance(o.center, pose.position());
    if (dd <= nearest) {
      nearest = dd;
      blocker = &o;
    }
  }
  if (blocker == nullptr) {
    route_.reset();
    return target;
  }
  const Vec2 to = blocker->center - pose.position();
  const Vec2 dir = norm(to) > 0.0 ? (1.0 / norm(to)) * to : Vec2{std::cos(pose.theta), std::sin(pose.theta)};
  const Vec2 side = Vec2{dir.y, -dir.x} - 0.5 * dir;
  detour_target_ = pose.position() + (config_.detour_distance / norm(side)) * side;
  detour_left_ = config_.detour_periods;
  return detour_target_;
}

ControlOutput Controller::control_step(const RobotState& pose,
                                       std::span<const Obstacle> obstacles) {
  ControlOutput out;

  if (!finished_) {
    const auto v = evaluate_predicates(pose, obstacles, *world_, config_.predicates);
    const auto step = mission::step_mission(mission_, mission_state_, v);
    out.matched = step.matched;
    if (step.goals.empty()) {
      finished_ = true;
      goal_.reset();
      route_.reset();
    } else if (!goal_ || !step.goals.contains(*goal_)) {
      std::vector<std::string> options(step.goals.begin(), step.goals.end());
      goal_ = options[rng_() % options.size()];
      out.goal_changed = true;
      route_.reset();
      leg_history_.clear();
      brake_count_ = 0;
    }
  }
  out.mission_finished = finished_;
  out.goal = goal_;

  Vec2 target = pose.position();
  if (goal_) {
    const Location& loc = world_->locations.at(*goal_);
    if (distance(pose.position(), loc.center) <= loc.radius) {
      target = unstall(pose, loc.center, obstacles);
    } else {
      if (!route_) plan(pose, out);
      const std::size_t before = route_->next;
      const auto& nodes = route_->route.nodes;
      for (std::size_t j = nodes.size(); j-- > route_->next;) {
        if (reached(j, pose.position())) {
          route_->next = j + 1;
          break;
        }
      }
      record_reached(before, route_->next);
      bool hold = false;
      if (route_->next < nodes.size()) {
        out.subgoal = nodes[route_->next];
        target = subgoal_target(route_->next, pose.position());
        hold = door_busy(route_->next, pose.position(), obstacles);
      } else {
        target = loc.center;
      }
      if (hold) {
        const Vec2 p = graph_->position(graph_->index(nodes[route_->next]));
        const Vec2 c = crossing_direction(route_->next);
        const Vec2 wait =
            p + config_.door_keep_right * Vec2{c.y, -c.x} - config_.door_wait * c;
        target = -dot(pose.position() - p, c) < config_.door_wait - config_.reach_radius
                     ? wait
                     : pose.position();
        stall_count_ = 0;
        detour_left_ = 0;
        last_target_ = target;
      } else {
        target = unstall(pose, target, obstacles);
      }
    }
  }

  std::vector<Obstacle> planning(obstacles.begin(), obstacles.end());
  std::vector<Obstacle> stopping(obstacles.begin(), obstacles.end());
  if (config_.pad_moving_obstacles) {
    const double period = config_.dwa.control_period;
    const double a = config_.dwa.limits.a_max;
    for (std::size_t i = 0; i < planning.size(); ++i) {
      if (planning[i].kind != Obstacle::Kind::Disc) continue;
      // One period at up to speed + a*T; while we brake it may brake too.
      const double speed = planning[i].speed;
      planning[i].radius += (speed + a * period) * period;
      stopping[i].radius += (speed + a * period) * period + speed * speed / (2.0 * a);
    }
  }
  const auto decision =
      dwa::plan(pose, target, safety_, live_, evaluator_, planning, stopping, config_.dwa);
  out.full_brake = decision.selection.full_brake;
  out.command = decision.selection.command;
  if (finished_ || !goal_) {
    out.command = {};
  }
  if (out.full_brake) {
    if (++brake_count_ > config_.brake_replan_periods) {
      route_.reset();
      brake_count_ = 0;
    }
  } else {
    brake_count_ = 0;
  }

  out.safe = observe(pose, obstacles);
  return out;
}

bool Controller::observe(const RobotState& pose, std::span<const Obstacle> obstacles) {
  evaluator_.evaluate(pose, obstacles, values_);
  return ltl::step_values(safety_, live_, values_);
}

}  // namespace navstack
