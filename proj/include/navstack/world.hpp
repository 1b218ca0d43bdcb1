#pragma once

// Static environment: walls, one-way regions, named locations and the
// topological graph, plus the geometric predicates fed to the monitors.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "navstack/pastltl.hpp"

namespace navstack {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Pose and velocity of a unicycle robot. theta is in radians, 0 along +x,
/// counter-clockwise positive.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const RobotState&) const = default;
};

struct Obstacle {
  enum class Kind : std::uint8_t { Segment, Disc };

  Kind kind = Kind::Disc;
  Segment segment;  // Kind::Segment
  Vec2 center;      // Kind::Disc
  double radius = 0.0;
  double speed = 0.0;  // Kind::Disc, for planners that pad moving obstacles

  static Obstacle wall(Segment s) { return {Kind::Segment, s, {}, 0.0, 0.0}; }
  static Obstacle disc(Vec2 c, double r, double speed = 0.0) {
    return {Kind::Disc, {}, c, r, speed};
  }
};

struct OnewayRegion {
  std::vector<Vec2> polygon;
  std::string direction;  // "eastway" or "westway"
};

struct Location {
  Vec2 center;
  double radius = 0.0;
};

struct World {
  double scale = 1.0;  // meters per file unit
  std::vector<Segment> walls;
  std::vector<OnewayRegion> oneways;
  std::map<std::string, Location> locations;
  std::map<std::string, Vec2> nodes;
  std::set<std::string> doors;  // nodes flagged "door": true
  std::vector<std::pair<std::string, std::string>> edges;  // directed
};

/// Thresholds of the geometric predicates.
struct PredicateParams {
  double footprint_radius = 0.15;
  double safety_margin = 0.10;
};

/// Compass heading in degrees in [0, 360): 0 is north (+y), 90 is east (+x).
double compass_deg(double theta);

double point_segment_distance(Vec2 p, const Segment& s);

/// True if the closed segments share a point.
bool segments_intersect(const Segment& s, const Segment& t);

/// Even-odd rule; points on the boundary may go either way.
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);

/// Smallest gap between the robot footprint and any obstacle; negative on
/// penetration, +infinity without obstacles.
double min_clearance(Vec2 center, double footprint_radius, std::span<const Obstacle> obstacles);

/// One wall obstacle per world wall segment.
std::vector<Obstacle> wall_obstacles(const World& world);

/// True if no wall crosses the segment from `a` to `b`.
bool line_of_sight(const World& world, Vec2 a, Vec2 b);

/// The opening of door node `id`: the stretch of the nearest wall's line
/// between the wall endpoints on either side of the node. Throws
/// InvariantViolation if `id` is not a door or there are no walls.
Segment door_span(const World& world, const std::string& id);

/// Name of the location whose disc contains `p`, if any.
const std::string* location_at(const World& world, Vec2 p);

/// Full valuation of the primitive predicates at `pose`:
///   dangerously_close(obstacles), inside(X) and going(X) for X in {eastway, westway},
///   inside(L) and outside(L) for every named location L.
ltl::Valuation evaluate_predicates(const RobotState& pose, std::span<const Obstacle> obstacles,
                                   const World& world, const PredicateParams& params = {});

/// Evaluates exactly the atoms of one monitor program, in program order.
/// Throws MissingAtom at construction for atoms the world cannot evaluate.
class PredicateEvaluator {
 public:
  PredicateEvaluator(const World& world, const std::vector<std::string>& atoms,
                     PredicateParams params = {});

  void evaluate(const RobotState& pose, std::span<const Obstacle> obstacles,
                std::vector<std::uint8_t>& out) const;

  /// As evaluate, with a clearance computed by the caller.
  void evaluate(const RobotState& pose, double clearance, std::vector<std::uint8_t>& out) const;

  bool needs_clearance() const { return needs_clearance_; }
  const PredicateParams& params() const { return params_; }

 private:
  enum class Kind : std::uint8_t { DangerouslyClose, InsideOneway, Going, InsideLocation, OutsideLocation };
  struct Binding {
    Kind kind;
    std::string arg;
    std::size_t index = 0;  // location index or one-way direction index
  };

  const World* world_;
  PredicateParams params_;
  std::vector<Binding> bindings_;
  std::vector<Location> locations_;
  bool needs_clearance_ = false;
};

/// Reads and validates a world file. Coordinates (and location radii) are
/// multiplied by the file's `scale`. Throws SchemaError, InvariantViolation.
World load_world(const std::filesystem::path& path);
World parse_world(std::string_view json_text);

}  // namespace navstack
