#include "navstack/world.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "navstack/errors.hpp"

namespace navstack {

namespace {

using nlohmann::json;

struct Band {
  const char* direction;
  double low;
  double high;
};

// Compass bands of the one-way directions, exclusive at both ends.
constexpr Band kBands[] = {{"eastway", 75.0, 105.0}, {"westway", 255.0, 285.0}};

const Band* band_of(std::string_view direction) {
  for (const auto& b : kBands) {
    if (direction == b.direction) return &b;
  }
  return nullptr;
}

bool going(double theta, const Band& band) {
  const double c = compass_deg(theta);
  return band.low < c && c < band.high;
}

bool inside_direction(const World& world, Vec2 p, std::string_view direction) {
  for (const auto& r : world.oneways) {
    if (r.direction == direction && point_in_polygon(p, r.polygon)) return true;
  }
  return false;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string(what) + " must be a number");
  return j.get<double>();
}

Vec2 point(const json& j, double scale, const char* what) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(std::string(what) + " must be [x, y]");
  return {scale * number(j[0], what), scale * number(j[1], what)};
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw SchemaError(std::string("missing field '") + name + "'");
  }
  return obj.at(name);
}

void check_simple_polygon(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw InvariantViolation("one-way polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e{poly[i], poly[(i + 1) % n]};
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      const Segment f{poly[j], poly[(j + 1) % n]};
      if (segments_intersect(e, f)) {
        throw InvariantViolation("one-way polygon is self-intersecting");
      }
    }
  }
}

}  // namespace

double compass_deg(double theta) {
  double deg = std::fmod(90.0 - theta * 180.0 / std::numbers::pi, 360.0);
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double min_clearance(Vec2 center, double footprint_radius, std::span<const Obstacle> obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) {
    const double d = o.kind == Obstacle::Kind::Segment
                         ? point_segment_distance(center, o.segment)
                         : distance(center, o.center) - o.radius;
    best = std::min(best, d - footprint_radius);
  }
  return best;
}

std::vector<Obstacle> wall_obstacles(const World& world) {
  std::vector<Obstacle> out;
  out.reserve(world.walls.size());
  for (const auto& w : world.walls) out.push_back(Obstacle::wall(w));
  return out;
}

bool line_of_sight(const World& world, Vec2 a, Vec2 b) {
  const Segment s{a, b};
  return std::none_of(world.walls.begin(), world.walls.end(),
                      [&](const Segment& w) { return segments_intersect(s, w); });
}

Segment door_span(const World& world, const std::string& id) {
  if (!world.doors.contains(id)) throw InvariantViolation("'" + id + "' is not a door node");
  const Vec2 p = world.nodes.at(id);
  const Segment* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : world.walls) {
    const double d = point_segment_distance(p, w);
    if (d < best && norm(w.b - w.a) > 0.0) {
      best = d;
      nearest = &w;
    }
  }
  if (nearest == nullptr) throw InvariantViolation("door '" + id + "' has no wall");
  const Vec2 u = (1.0 / norm(nearest->b - nearest->a)) * (nearest->b - nearest->a);
  const Vec2 q = nearest->a + dot(p - nearest->a, u) * u;
  // Half width: distance to the closest collinear wall endpoint.
  double half = std::numeric_limits<double>::infinity();
  for (const auto& w : world.walls) {
    for (const Vec2 e : {w.a, w.b}) {
      const double along = dot(e - q, u);
      if (std::abs(cross(e - q, u)) < 1e-9 && std::abs(along) > 1e-9) {
        half = std::min(half, std::abs(along));
      }
    }
  }
  if (!std::isfinite(half)) half = best;
  return {q - half * u, q + half * u};
}

const std::string* location_at(const World& world, Vec2 p) {
  for (const auto& [name, loc] : world.locations) {
    if (distance(p, loc.center) <= loc.radius) return &name;
  }
  return nullptr;
}

ltl::Valuation evaluate_predicates(const RobotState& pose, std::span<const Obstacle> obstacles,
                                   const World& world, const PredicateParams& params) {
  ltl::Valuation v;
  const Vec2 p = pose.position();
  v["dangerously_close(obstacles)"] =
      min_clearance(p, params.footprint_radius, obstacles) < params.safety_margin;
  for (const auto& b : kBands) {
    v[spec::atom_key("inside", {b.direction})] = inside_direction(world, p, b.direction);
    v[spec::atom_key("going", {b.direction})] = going(pose.theta, b);
  }
  for (const auto& [name, loc] : world.locations) {
    const bool in = distance(p, loc.center) <= loc.radius;
    v[spec::atom_key("inside", {name})] = in;
    v[spec::atom_key("outside", {name})] = !in;
  }
  return v;
}

PredicateEvaluator::PredicateEvaluator(const World& world, const std::vector<std::string>& atoms,
                                       PredicateParams params)
    : world_(&world), params_(params) {
  for (const auto& [name, loc] : world.locations) locations_.push_back(loc);
  auto location_index = [&](const std::string& name) -> std::optional<std::size_t> {
    std::size_t i = 0;
    for (const auto& [n, loc] : world.locations) {
      if (n == name) return i;
      ++i;
    }
    return std::nullopt;
  };
  for (const auto& key : atoms) {
    const auto open = key.find('(');
    const std::string pred = key.substr(0, open);
    const std::string arg =
        open == std::string::npos ? "" : key.substr(open + 1, key.size() - open - 2);
    if (key == "dangerously_close(obstacles)") {
      bindings_.push_back({Kind::DangerouslyClose, arg, 0});
      needs_clearance_ = true;
      continue;
    }
    const bool is_direction = band_of(arg) != nullptr;
    if (pred == "inside" && is_direction) {
      bindings_.push_back({Kind::InsideOneway, arg, 0});
    } else if (pred == "going" && is_direction) {
      bindings_.push_back({Kind::Going, arg,
                           static_cast<std::size_t>(band_of(arg) - std::begin(kBands))});
    } else if ((pred == "inside" || pred == "outside") && location_index(arg)) {
      bindings_.push_back({pred == "inside" ? Kind::InsideLocation : Kind::OutsideLocation, arg,
                           *location_index(arg)});
    } else {
      throw MissingAtom("the world cannot evaluate atom '" + key + "'");
    }
  }
}

void PredicateEvaluator::evaluate(const RobotState& pose, std::span<const Obstacle> obstacles,
                                  std::vector<std::uint8_t>& out) const {
  const double clearance = needs_clearance_
                               ? min_clearance(pose.position(), params_.footprint_radius, obstacles)
                               : std::numeric_limits<double>::infinity();
  evaluate(pose, clearance, out);
}

void PredicateEvaluator::evaluate(const RobotState& pose, double clearance,
                                  std::vector<std::uint8_t>& out) const {
  out.resize(bindings_.size());
  const Vec2 p = pose.position();
  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    const Binding& b = bindings_[i];
    bool value = false;
    switch (b.kind) {
      case Kind::DangerouslyClose: value = clearance < params_.safety_margin; break;
      case Kind::InsideOneway: value = inside_direction(*world_, p, b.arg); break;
      case Kind::Going: value = going(pose.theta, kBands[b.index]); break;
      case Kind::InsideLocation:
      case Kind::OutsideLocation: {
        const Location& loc = locations_[b.index];
        const bool in = distance(p, loc.center) <= loc.radius;
        value = b.kind == Kind::InsideLocation ? in : !in;
        break;
      }
    }
    out[i] = value;
  }
}

World parse_world(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("world file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("world document must be an object");

  World w;
  w.scale = doc.contains("scale") ? number(doc.at("scale"), "scale") : 1.0;
  if (!(w.scale > 0.0)) throw InvariantViolation("scale must be positive");
  const double s = w.scale;

  const json& walls = field(doc, "walls");
  if (!walls.is_array()) throw SchemaError("walls must be an array");
  for (const auto& wall : walls) {
    if (!wall.is_array() || wall.size() != 4) throw SchemaError("wall must be [x1, y1, x2, y2]");
    w.walls.push_back({{s * number(wall[0], "wall"), s * number(wall[1], "wall")},
                       {s * number(wall[2], "wall"), s * number(wall[3], "wall")}});
  }

  if (doc.contains("oneways")) {
    const json& oneways = doc.at("oneways");
    if (!oneways.is_array()) throw SchemaError("oneways must be an array");
    for (const auto& o : oneways) {
      OnewayRegion r;
      const json& dir = field(o, "direction");
      if (!dir.is_string()) throw SchemaError("one-way direction must be a string");
      r.direction = dir.get<std::string>();
      if (band_of(r.direction) == nullptr) {
        throw SchemaError("unknown one-way direction '" + r.direction + "'");
      }
      const json& poly = field(o, "polygon");
      if (!poly.is_array()) throw SchemaError("polygon must be an array");
      for (const auto& p : poly) r.polygon.push_back(point(p, s, "polygon vertex"));
      check_simple_polygon(r.polygon);
      w.oneways.push_back(std::move(r));
    }
  }

  const json& locations = field(doc, "locations");
  if (!locations.is_object()) throw SchemaError("locations must be an object");
  for (const auto& [name, loc] : locations.items()) {
    Location l{{s * number(field(loc, "x"), "x"), s * number(field(loc, "y"), "y")},
               s * number(field(loc, "r"), "r")};
    if (!(l.radius > 0.0)) throw InvariantViolation("location '" + name + "' needs a positive radius");
    w.locations.emplace(name, l);
  }

  const json& nodes = field(doc, "nodes");
  if (!nodes.is_object()) throw SchemaError("nodes must be an object");
  for (const auto& [id, n] : nodes.items()) {
    w.nodes.emplace(id, Vec2{s * number(field(n, "x"), "x"), s * number(field(n, "y"), "y")});
    if (n.contains("door")) {
      if (!n["door"].is_boolean()) throw SchemaError("node '" + id + "': door must be a boolean");
      if (n["door"].get<bool>()) w.doors.insert(id);
    }
  }

  const json& edges = field(doc, "edges");
  if (!edges.is_array()) throw SchemaError("edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      throw SchemaError("edge must be [from, to]");
    }
    auto from = e[0].get<std::string>();
    auto to = e[1].get<std::string>();
    for (const auto& id : {from, to}) {
      if (w.nodes.count(id) == 0) {
        throw InvariantViolation("edge references undeclared node '" + id + "'");
      }
    }
    if (from == to) throw InvariantViolation("self-loop on node '" + from + "'");
    w.edges.emplace_back(std::move(from), std::move(to));
  }
  return w;
}

World load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open world file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_world(ss.str());
}

}  // namespace navstack
