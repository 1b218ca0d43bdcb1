#include "navstack/router.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "navstack/errors.hpp"

namespace navstack::route {

std::size_t TopoGraph::add_node(const std::string& id, Vec2 position) {
  if (find(id)) throw InvariantViolation("duplicate graph node '" + id + "'");
  ids_.push_back(id);
  positions_.push_back(position);
  out_.emplace_back();
  return ids_.size() - 1;
}

void TopoGraph::add_edge(const std::string& from, const std::string& to, double weight) {
  const std::size_t a = index(from);
  const std::size_t b = index(to);
  if (a == b) throw InvariantViolation("self-loop at '" + from + "'");
  if (!(weight >= 0.0)) throw InvariantViolation("negative edge weight " + from + " -> " + to);
  auto& out = out_[a];
  auto it = std::find_if(out.begin(), out.end(), [&](const Edge& e) { return e.to == b; });
  if (it != out.end()) {
    it->weight = std::min(it->weight, weight);
  } else {
    out.push_back({b, weight});
  }
}

TopoGraph TopoGraph::from_world(const World& world) {
  TopoGraph g;
  for (const auto& [id, p] : world.nodes) g.add_node(id, p);
  for (const auto& [a, b] : world.edges) {
    g.add_edge(a, b, distance(world.nodes.at(a), world.nodes.at(b)));
  }
  return g;
}

std::optional<std::size_t> TopoGraph::find(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return i;
  }
  return std::nullopt;
}

std::size_t TopoGraph::index(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw InvariantViolation("unknown graph node '" + std::string(id) + "'");
}

double path_cost(const TopoGraph& g, const std::vector<std::string>& nodes) {
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const std::size_t a = g.index(nodes[i]);
    const std::size_t b = g.index(nodes[i + 1]);
    const auto& out = g.out_edges(a);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.to == b; });
    if (it == out.end()) throw InvariantViolation("no edge " + nodes[i] + " -> " + nodes[i + 1]);
    cost += it->weight;
  }
  return cost;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_cost(const TopoGraph& g, const std::vector<std::size_t>& path) {
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    for (const auto& e : g.out_edges(path[i])) {
      if (e.to == path[i + 1]) {
        cost += e.weight;
        break;
      }
    }
  }
  return cost;
}

bool near_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Shortest path from s to t avoiding banned nodes and edges. Among equal-cost
// paths, the one whose node-id sequence is lexicographically smallest.
std::optional<std::vector<std::size_t>> shortest_lexmin(
    const TopoGraph& g, std::size_t s, std::size_t t, const std::vector<bool>& banned_node,
    const std::set<std::pair<std::size_t, std::size_t>>& banned_edge) {
  const std::size_t n = g.size();
  std::vector<std::vector<TopoGraph::Edge>> rev(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (banned_node[u]) continue;
    for (const auto& e : g.out_edges(u)) {
      if (banned_node[e.to] || banned_edge.count({u, e.to}) != 0) continue;
      rev[e.to].push_back({u, e.weight});
    }
  }

  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[t] = 0.0;
  pq.push({0.0, t});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& e : rev[u]) {
      if (d + e.weight < dist[e.to]) {
        dist[e.to] = d + e.weight;
        pq.push({dist[e.to], e.to});
      }
    }
  }
  if (dist[s] == kInf) return std::nullopt;

  // Greedy walk along tight edges, taking the smallest id each time. Edge
  // weights are nonnegative, so zero-weight cycles are guarded by `seen`.
  std::vector<std::size_t> path{s};
  std::vector<bool> seen(n, false);
  seen[s] = true;
  std::size_t u = s;
  while (u != t) {
    std::optional<std::size_t> best;
    for (const auto& e : g.out_edges(u)) {
      if (banned_node[e.to] || banned_edge.count({u, e.to}) != 0 || seen[e.to]) continue;
      if (dist[e.to] == kInf || !near_equal(e.weight + dist[e.to], dist[u])) continue;
      if (!best || g.id(e.to) < g.id(*best)) best = e.to;
    }
    if (!best) return std::nullopt;
    u = *best;
    seen[u] = true;
    path.push_back(u);
  }
  return path;
}

}  // namespace

YenEnumerator::YenEnumerator(const TopoGraph& g, std::string_view source, std::string_view target)
    : g_(&g), source_(g.index(source)), target_(g.index(target)) {}

bool YenEnumerator::less(const Candidate& a, const Candidate& b) const {
  if (!near_equal(a.cost, b.cost)) return a.cost < b.cost;
  return std::lexicographical_compare(
      a.path.begin(), a.path.end(), b.path.begin(), b.path.end(),
      [&](std::size_t x, std::size_t y) { return g_->id(x) < g_->id(y); });
}

std::optional<Route> YenEnumerator::next() {
  const auto emit = [&](const Candidate& c) {
    Route r;
    for (std::size_t i : c.path) r.nodes.push_back(g_->id(i));
    r.cost = c.cost;
    return r;
  };

  if (!started_) {
    started_ = true;
    std::vector<bool> none(g_->size(), false);
    auto p = shortest_lexmin(*g_, source_, target_, none, {});
    if (!p) return std::nullopt;
    accepted_.push_back({*p, edge_cost(*g_, *p)});
    return emit(accepted_.back());
  }
  if (accepted_.empty()) return std::nullopt;

  const auto& prev = accepted_.back().path;
  for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
    const std::size_t spur = prev[i];
    std::set<std::pair<std::size_t, std::size_t>> banned_edge;
    for (const auto& a : accepted_) {
      if (a.path.size() > i + 1 && std::equal(prev.begin(), prev.begin() + i + 1, a.path.begin())) {
        banned_edge.insert({a.path[i], a.path[i + 1]});
      }
    }
    std::vector<bool> banned_node(g_->size(), false);
    for (std::size_t j = 0; j < i; ++j) banned_node[prev[j]] = true;

    auto spur_path = shortest_lexmin(*g_, spur, target_, banned_node, banned_edge);
    if (!spur_path) continue;
    std::vector<std::size_t> total(prev.begin(), prev.begin() + i);
    total.insert(total.end(), spur_path->begin(), spur_path->end());

    const auto same = [&](const Candidate& c) { return c.path == total; };
    if (std::any_of(accepted_.begin(), accepted_.end(), same) ||
        std::any_of(pending_.begin(), pending_.end(), same)) {
      continue;
    }
    pending_.push_back({std::move(total), 0.0});
    pending_.back().cost = edge_cost(*g_, pending_.back().path);
  }

  if (pending_.empty()) return std::nullopt;
  auto best = std::min_element(pending_.begin(), pending_.end(),
                               [&](const Candidate& a, const Candidate& b) { return less(a, b); });
  accepted_.push_back(std::move(*best));
  pending_.erase(best);
  return emit(accepted_.back());
}

std::vector<Route> yen_k_shortest(const TopoGraph& g, std::string_view source,
                                  std::string_view target, std::size_t k) {
  std::vector<Route> out;
  YenEnumerator e(g, source, target);
  while (out.size() < k) {
    auto r = e.next();
    if (!r) break;
    out.push_back(std::move(*r));
  }
  if (out.empty() && k > 0) {
    throw NoPath("no path from '" + std::string(source) + "' to '" + std::string(target) + "'");
  }
  return out;
}

bool check_route(std::span<const std::string> trace, std::span<const ltl::MonitorProgram> monitors) {
  std::vector<std::uint8_t> values;
  for (const auto& program : monitors) {
    std::vector<std::string> visited;
    for (const auto& key : program.atoms()) {
      if (!key.starts_with("visit(") || !key.ends_with(")")) {
        throw MissingAtom("route monitors only observe visit(...), got '" + key + "'");
      }
      visited.push_back(key.substr(6, key.size() - 7));
    }
    ltl::MonitorState st(program);
    values.assign(visited.size(), 0);
    for (const auto& node : trace) {
      for (std::size_t i = 0; i < visited.size(); ++i) values[i] = visited[i] == node ? 1 : 0;
      if (!ltl::step_values(program, st, values)) return false;
    }
  }
  return true;
}

Route plan_route(const TopoGraph& g, std::string_view source, std::string_view target,
                 std::span<const ltl::MonitorProgram> monitors, std::size_t k_max,
                 std::span<const std::string> history) {
  YenEnumerator e(g, source, target);
  std::size_t examined = 0;
  std::vector<std::string> trace;
  while (examined < k_max) {
    auto r = e.next();
    if (!r) break;
    ++examined;
    trace.assign(history.begin(), history.end());
    auto from = r->nodes.begin();
    if (!trace.empty() && trace.back() == *from) ++from;
    trace.insert(trace.end(), from, r->nodes.end());
    if (check_route(trace, monitors)) return *r;
  }
  if (examined == 0) {
    throw NoPath("no path from '" + std::string(source) + "' to '" + std::string(target) + "'");
  }
  throw NoCompliantRoute("none of the " + std::to_string(examined) + " shortest routes from '" +
                         std::string(source) + "' to '" + std::string(target) +
                         "' satisfies the route monitors");
}

std::optional<std::string> advance_subgoal(RouteProgress& progress, const TopoGraph& g, Vec2 pose,
                                           double reach_radius) {
  const auto& nodes = progress.route.nodes;
  for (std::size_t j = nodes.size(); j-- > progress.next;) {
    if (distance(g.position(g.index(nodes[j])), pose) <= reach_radius) {
      progress.next = j + 1;
      break;
    }
  }
  if (progress.next >= nodes.size()) return std::nullopt;
  return nodes[progress.next];
}

}  // namespace navstack::route
