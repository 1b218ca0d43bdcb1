#pragma once

// Topological route planning: k-shortest simple paths enumerated in order
// and filtered by past-time route monitors over the node sequence.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navstack/pastltl.hpp"
#include "navstack/world.hpp"

namespace navstack::route {

class TopoGraph {
 public:
  struct Edge {
    std::size_t to;
    double weight;
  };

  std::size_t add_node(const std::string& id, Vec2 position = {});
  /// Throws InvariantViolation for unknown endpoints, self-loops or negative weights.
  void add_edge(const std::string& from, const std::string& to, double weight);

  /// Nodes and directed edges of the world, weighted by Euclidean length.
  static TopoGraph from_world(const World& world);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  Vec2 position(std::size_t i) const { return positions_[i]; }
  std::optional<std::size_t> find(std::string_view id) const;
  /// As find, throwing InvariantViolation for unknown ids.
  std::size_t index(std::string_view id) const;
  const std::vector<Edge>& out_edges(std::size_t i) const { return out_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::vector<Vec2> positions_;
  std::vector<std::vector<Edge>> out_;
};

struct Route {
  std::vector<std::string> nodes;
  double cost = 0.0;
  bool operator==(const Route&) const = default;
};

/// Sum of edge weights along `nodes`; InvariantViolation if an edge is missing.
double path_cost(const TopoGraph& g, const std::vector<std::string>& nodes);

/// Yen's algorithm. Routes come out by nondecreasing cost, ties broken by the
/// lexicographic order of the node-id sequence. Lazily extends on demand.
class YenEnumerator {
 public:
  YenEnumerator(const TopoGraph& g, std::string_view source, std::string_view target);

  /// Next route, or nullopt once every simple path has been produced.
  std::optional<Route> next();

 private:
  struct Candidate {
    std::vector<std::size_t> path;
    double cost;
  };
  bool less(const Candidate& a, const Candidate& b) const;

  const TopoGraph* g_;
  std::size_t source_;
  std::size_t target_;
  std::vector<Candidate> accepted_;
  std::vector<Candidate> pending_;
  bool started_ = false;
};

/// Up to k routes in enumeration order. Throws NoPath when k > 0 and the
/// target is unreachable.
std::vector<Route> yen_k_shortest(const TopoGraph& g, std::string_view source,
                                  std::string_view target, std::size_t k);

/// Steps a fresh instance of each monitor over visit(n) valuations of `trace`
/// (every other visit atom false) and requires every verdict of every
/// monitor to be true. Throws MissingAtom for atoms that are not visit(...).
bool check_route(std::span<const std::string> trace, std::span<const ltl::MonitorProgram> monitors);

/// First of the k_max shortest routes whose trace, prefixed by `history`,
/// satisfies every monitor. A route starting where history ends is joined
/// without repeating that node. Throws NoPath, NoCompliantRoute.
Route plan_route(const TopoGraph& g, std::string_view source, std::string_view target,
                 std::span<const ltl::MonitorProgram> monitors, std::size_t k_max,
                 std::span<const std::string> history = {});

/// Progress of a robot along a route. `next` is the index of the first node
/// not yet reached.
struct RouteProgress {
  Route route;
  std::size_t next = 0;
};

/// Marks every node within `reach_radius` of the pose at or after `next` as
/// reached (together with all nodes before it) and returns the first
/// unreached node, or nullopt once the last node has been reached.
std::optional<std::string> advance_subgoal(RouteProgress& progress, const TopoGraph& g, Vec2 pose,
                                           double reach_radius);

}  // namespace navstack::route
