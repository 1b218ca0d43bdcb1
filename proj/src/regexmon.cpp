#include "navstack/regexmon.hpp"

#include "navstack/errors.hpp"

namespace navstack::mission {

namespace {

struct Info {
  bool nullable = false;
  PositionSet first;
  PositionSet last;
};

void merge(PositionSet& into, const PositionSet& from) { into.insert(from.begin(), from.end()); }

Info build(const RegexAst& r, PositionAutomaton& aut) {
  switch (r.kind) {
    case RegexKind::Atom: {
      const std::size_t id = aut.positions.size();
      Position p;
      p.name = r.name;
      p.args = r.args;
      p.key = spec::atom_key(r.name, r.args);
      if (r.name == "inside" && r.args.size() == 1) p.goals.insert(r.args[0]);
      aut.positions.push_back(std::move(p));
      aut.follow.emplace_back();
      return Info{false, {id}, {id}};
    }
    case RegexKind::Seq: {
      Info a = build(r.children[0], aut);
      Info b = build(r.children[1], aut);
      for (std::size_t p : a.last) merge(aut.follow[p], b.first);
      Info out;
      out.nullable = a.nullable && b.nullable;
      out.first = a.first;
      if (a.nullable) merge(out.first, b.first);
      out.last = b.last;
      if (b.nullable) merge(out.last, a.last);
      return out;
    }
    case RegexKind::Alt: {
      Info a = build(r.children[0], aut);
      Info b = build(r.children[1], aut);
      merge(a.first, b.first);
      merge(a.last, b.last);
      a.nullable = a.nullable || b.nullable;
      return a;
    }
    case RegexKind::Star: {
      Info a = build(r.children[0], aut);
      for (std::size_t p : a.last) merge(aut.follow[p], a.first);
      a.nullable = true;
      return a;
    }
  }
  return {};
}

bool holds(const Valuation& v, const std::string& key) {
  auto it = v.find(key);
  return it != v.end() && it->second;
}

}  // namespace

PositionAutomaton compile_mission(const RegexAst& r) {
  PositionAutomaton aut;
  Info info = build(r, aut);
  aut.nullable = info.nullable;
  aut.first = std::move(info.first);
  aut.last = std::move(info.last);
  aut.loops_to_start = r.kind == RegexKind::Star;
  return aut;
}

PositionAutomaton compile_mission(const RegexAst& r, const std::set<std::string>& locations) {
  PositionAutomaton aut = compile_mission(r);
  for (const auto& p : aut.positions) {
    const bool known_predicate = (p.name == "inside" || p.name == "outside") && p.args.size() == 1;
    if (!known_predicate || locations.count(p.args[0]) == 0) {
      throw UnknownLocation("mission atom '" + p.key + "' does not name a declared location");
    }
  }
  return aut;
}

PositionSet enabled_positions(const PositionAutomaton& aut, const MissionState& st) {
  PositionSet enabled;
  if (st.at_start) enabled = aut.first;
  for (std::size_t p : st.active) merge(enabled, aut.follow[p]);
  return enabled;
}

MissionStep step_mission(const PositionAutomaton& aut, MissionState& st, const Valuation& v,
                         bool wrap) {
  for (const auto& p : aut.positions) {
    if (v.find(p.key) == v.end()) throw MissingAtom("valuation has no value for '" + p.key + "'");
  }
  PositionSet next;
  for (std::size_t q : enabled_positions(aut, st)) {
    if (holds(v, aut.positions[q].key)) next.insert(q);
  }
  if (next.empty()) {
    throw DeadMission("no continuation of the mission matches the current observation (after " +
                      std::to_string(st.completed_matches) + " completed matches)");
  }

  MissionStep out;
  for (std::size_t q : next) {
    if (aut.last.count(q) != 0) {
      out.matched = true;
      break;
    }
  }
  st.active = std::move(next);
  st.at_start = out.matched && wrap && aut.loops_to_start;
  if (out.matched) ++st.completed_matches;

  for (std::size_t q : enabled_positions(aut, st)) {
    const auto& g = aut.positions[q].goals;
    out.goals.insert(g.begin(), g.end());
  }
  return out;
}

bool membership_oracle(const RegexAst& r, const std::vector<Valuation>& trace) {
  const std::size_t n = trace.size();
  // m[i][j]: trace[i..j) is in the language of the subexpression.
  using Table = std::vector<std::vector<bool>>;
  auto table = [&](const RegexAst& e, auto&& self) -> Table {
    Table m(n + 1, std::vector<bool>(n + 1, false));
    switch (e.kind) {
      case RegexKind::Atom: {
        const std::string key = spec::atom_key(e.name, e.args);
        for (std::size_t i = 0; i < n; ++i) m[i][i + 1] = holds(trace[i], key);
        break;
      }
      case RegexKind::Alt: {
        Table a = self(e.children[0], self);
        Table b = self(e.children[1], self);
        for (std::size_t i = 0; i <= n; ++i) {
          for (std::size_t j = i; j <= n; ++j) m[i][j] = a[i][j] || b[i][j];
        }
        break;
      }
      case RegexKind::Seq: {
        Table a = self(e.children[0], self);
        Table b = self(e.children[1], self);
        for (std::size_t i = 0; i <= n; ++i) {
          for (std::size_t j = i; j <= n; ++j) {
            for (std::size_t k = i; k <= j && !m[i][j]; ++k) m[i][j] = a[i][k] && b[k][j];
          }
        }
        break;
      }
      case RegexKind::Star: {
        Table a = self(e.children[0], self);
        for (std::size_t i = 0; i <= n; ++i) m[i][i] = true;
        // Increasing interval length: [i, j) = [i, k) star-matched then [k, j) one iteration.
        for (std::size_t len = 1; len <= n; ++len) {
          for (std::size_t i = 0; i + len <= n; ++i) {
            const std::size_t j = i + len;
            for (std::size_t k = i; k < j && !m[i][j]; ++k) m[i][j] = m[i][k] && a[k][j];
          }
        }
        break;
      }
    }
    return m;
  };
  return table(r, table)[0][n];
}

}  // namespace navstack::mission
