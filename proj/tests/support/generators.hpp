#pragma once

// Random inputs shared by the property tests and the acceptance binary.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "navstack/pastltl.hpp"
#include "navstack/regexmon.hpp"
#include "navstack/router.hpp"
#include "navstack/speclang.hpp"

namespace navstack::testgen {

using Rng = std::mt19937_64;

inline std::vector<std::string> atom_names(std::size_t n) {
  static const std::vector<std::string> all{"p", "q", "r", "s"};
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Quantifier-free past-LTL formula of depth at most `depth` over `atoms`.
inline spec::FormulaAst random_formula(Rng& rng, int depth, const std::vector<std::string>& atoms) {
  using spec::FormulaAst;
  using spec::FormulaKind;
  if (depth <= 1 || coin(rng, 0.2)) {
    const int pick = uniform(rng, 0, static_cast<int>(atoms.size()) + 1);
    if (pick == static_cast<int>(atoms.size())) return FormulaAst::constant(true);
    if (pick == static_cast<int>(atoms.size()) + 1) return FormulaAst::constant(false);
    return FormulaAst::atom(atoms[static_cast<std::size_t>(pick)]);
  }
  static const FormulaKind unary[] = {FormulaKind::Not, FormulaKind::Previously, FormulaKind::Once,
                                      FormulaKind::Never};
  static const FormulaKind binary[] = {FormulaKind::And, FormulaKind::Or, FormulaKind::Implies,
                                       FormulaKind::Since};
  if (coin(rng, 0.45)) {
    return FormulaAst::unary(unary[uniform(rng, 0, 3)], random_formula(rng, depth - 1, atoms));
  }
  const FormulaKind k = binary[uniform(rng, 0, 3)];
  auto lhs = random_formula(rng, depth - 1, atoms);
  auto rhs = random_formula(rng, depth - 1, atoms);
  return FormulaAst::binary(k, std::move(lhs), std::move(rhs));
}

/// Random valuations over `atoms`.
inline std::vector<ltl::Valuation> random_trace(Rng& rng, std::size_t length,
                                                const std::vector<std::string>& atoms) {
  std::vector<ltl::Valuation> trace(length);
  for (auto& v : trace) {
    for (const auto& a : atoms) v[a] = coin(rng);
  }
  return trace;
}

/// Regex of depth at most `depth` over `atoms`.
inline spec::RegexAst random_regex(Rng& rng, int depth, const std::vector<std::string>& atoms) {
  using spec::RegexAst;
  if (depth <= 1 || coin(rng, 0.25)) {
    return RegexAst::atom(atoms[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(atoms.size()) - 1))]);
  }
  switch (uniform(rng, 0, 2)) {
    case 0:
      return RegexAst::star(random_regex(rng, depth - 1, atoms));
    case 1: {
      auto a = random_regex(rng, depth - 1, atoms);
      return RegexAst::seq(std::move(a), random_regex(rng, depth - 1, atoms));
    }
    default: {
      auto a = random_regex(rng, depth - 1, atoms);
      return RegexAst::alt(std::move(a), random_regex(rng, depth - 1, atoms));
    }
  }
}

/// Random digraph on `n` nodes n0.. with integer weights 1..5, so that cost
/// ties are common and exact.
inline route::TopoGraph random_graph(Rng& rng, int n, int max_edges) {
  route::TopoGraph g;
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const int m = std::min<int>(uniform(rng, 0, max_edges), static_cast<int>(pairs.size()));
  for (int e = 0; e < m; ++e) {
    g.add_edge("n" + std::to_string(pairs[static_cast<std::size_t>(e)].first),
               "n" + std::to_string(pairs[static_cast<std::size_t>(e)].second), uniform(rng, 1, 5));
  }
  return g;
}

/// Every simple path from `src` to `dst`, sorted by (cost, node ids).
inline std::vector<route::Route> all_simple_paths(const route::TopoGraph& g, std::size_t src,
                                                  std::size_t dst) {
  std::vector<route::Route> out;
  std::vector<std::size_t> path{src};
  std::vector<bool> on(g.size(), false);
  on[src] = true;
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double cost) {
    if (u == dst) {
      route::Route r;
      for (std::size_t i : path) r.nodes.push_back(g.id(i));
      r.cost = cost;
      out.push_back(std::move(r));
      return;
    }
    for (const auto& e : g.out_edges(u)) {
      if (on[e.to]) continue;
      on[e.to] = true;
      path.push_back(e.to);
      dfs(e.to, cost + e.weight);
      path.pop_back();
      on[e.to] = false;
    }
  };
  dfs(src, 0.0);
  std::sort(out.begin(), out.end(), [](const route::Route& a, const route::Route& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.nodes < b.nodes;
  });
  return out;
}

/// Dijkstra distance, or +infinity when unreachable.
inline double dijkstra(const route::TopoGraph& g, std::size_t src, std::size_t dst) {
  std::vector<double> d(g.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> done(g.size(), false);
  d[src] = 0.0;
  for (std::size_t it = 0; it < g.size(); ++it) {
    std::size_t u = g.size();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!done[i] && (u == g.size() || d[i] < d[u])) u = i;
    }
    if (u == g.size() || d[u] == std::numeric_limits<double>::infinity()) break;
    done[u] = true;
    for (const auto& e : g.out_edges(u)) d[e.to] = std::min(d[e.to], d[u] + e.weight);
  }
  return d[dst];
}

}  // namespace navstack::testgen
