#include <doctest.h>

#include "generators.hpp"
#include "navstack/errors.hpp"
#include "navstack/regexmon.hpp"

using namespace navstack;
using namespace navstack::mission;

namespace {

const std::set<std::string> kLocations{"A", "B", "C", "D"};

const char* kMissions =
    "reach(L) = (outside(L)){*}; inside(L)\n"
    "m1 = (reach(C); (reach(B) | reach(D)); reach(A))*\n"
    "m2 = (reach(A); reach(B); reach(C))*\n"
    "m3 = reach(A); (reach(D); reach(B); reach(C))*\n";

PositionAutomaton named(const std::string& name) {
  const auto spec = spec::parse_spec(kMissions);
  return compile_mission(spec::expand_regex(spec, name), kLocations);
}

/// Robot inside `at` (or nowhere for "").
Valuation at(const std::string& where) {
  Valuation v;
  for (const auto& l : kLocations) {
    v["inside(" + l + ")"] = l == where;
    v["outside(" + l + ")"] = l != where;
  }
  return v;
}

}  // namespace

TEST_CASE("reach automaton") {
  const auto spec = spec::parse_spec(kMissions);
  const auto aut = compile_mission(spec::expand_regex(spec, "reach", {"A"}), kLocations);
  REQUIRE(aut.positions.size() == 2);
  CHECK(aut.positions[0].key == "outside(A)");
  CHECK(aut.positions[1].key == "inside(A)");
  CHECK(aut.positions[0].goals.empty());
  CHECK(aut.positions[1].goals == GoalSet{"A"});
  CHECK(aut.first == PositionSet{0, 1});
  CHECK(aut.follow[0] == PositionSet{0, 1});
  CHECK(aut.follow[1].empty());
  CHECK(aut.last == PositionSet{1});
  CHECK_FALSE(aut.nullable);
  CHECK_FALSE(aut.loops_to_start);
}

TEST_CASE("single-atom star") {
  const auto aut = compile_mission(spec::parse_regex("p*"));
  REQUIRE(aut.positions.size() == 1);
  CHECK(aut.nullable);
  CHECK(aut.follow[0] == PositionSet{0});
  CHECK(aut.loops_to_start);
}

TEST_CASE("mission sizes") {
  const auto m2 = named("m2");
  CHECK(m2.positions.size() == 6);
  CHECK(m2.nullable);
  CHECK(m2.loops_to_start);
  const auto m3 = named("m3");
  CHECK(m3.positions.size() == 8);
  CHECK_FALSE(m3.nullable);
  CHECK_FALSE(m3.loops_to_start);
}

TEST_CASE("unknown locations are rejected") {
  CHECK_THROWS_AS(compile_mission(spec::parse_regex("inside(Z)"), kLocations), UnknownLocation);
  CHECK_THROWS_AS(compile_mission(spec::parse_regex("near(A)"), kLocations), UnknownLocation);
}

TEST_CASE("reach: outside, outside, inside") {
  const auto spec = spec::parse_spec(kMissions);
  const auto aut = compile_mission(spec::expand_regex(spec, "reach", {"A"}), kLocations);
  MissionState st;
  auto s0 = step_mission(aut, st, at(""));
  CHECK(s0.goals == GoalSet{"A"});
  CHECK_FALSE(s0.matched);
  auto s1 = step_mission(aut, st, at(""));
  CHECK(s1.goals == GoalSet{"A"});
  CHECK_FALSE(s1.matched);
  auto s2 = step_mission(aut, st, at("A"));
  CHECK(s2.matched);
  CHECK(s2.goals.empty());
  CHECK(st.completed_matches == 1);
  CHECK_THROWS_AS(step_mission(aut, st, at("")), DeadMission);
}

TEST_CASE("m2 starts toward A") {
  const auto aut = named("m2");
  MissionState st;
  CHECK(step_mission(aut, st, at("")).goals == GoalSet{"A"});
}

TEST_CASE("m1 offers B or D after C") {
  const auto aut = named("m1");
  MissionState st;
  CHECK(step_mission(aut, st, at("")).goals == GoalSet{"C"});
  CHECK(step_mission(aut, st, at("C")).goals == GoalSet{"B", "D"});
  CHECK(step_mission(aut, st, at("")).goals == GoalSet{"B", "D"});
  // outside(B) is still live at D, so B stays on offer next to A.
  CHECK(step_mission(aut, st, at("D")).goals == GoalSet{"A", "B"});
  CHECK(step_mission(aut, st, at("")).goals == GoalSet{"A", "B"});
  CHECK(step_mission(aut, st, at("A")).matched);
}

TEST_CASE("m2 counts one match per cycle") {
  const auto aut = named("m2");
  MissionState st;
  const std::vector<std::string> cycle{"", "A", "A", "", "B", "", "", "C", "C", ""};
  for (int round = 1; round <= 3; ++round) {
    for (const auto& w : cycle) step_mission(aut, st, at(w));
    CHECK(st.completed_matches == static_cast<std::size_t>(round));
  }
}

TEST_CASE("star over one region accepts at once") {
  const auto aut = compile_mission(spec::parse_regex("(inside(A))*"), kLocations);
  MissionState st;
  CHECK(step_mission(aut, st, at("A")).matched);
}

TEST_CASE("membership by hand") {
  const auto reach = spec::parse_regex("(outside(A))*; inside(A)");
  CHECK(membership_oracle(spec::parse_regex("(inside(A))*"), {}));
  CHECK(membership_oracle(reach, {at(""), at("A")}));
  CHECK_FALSE(membership_oracle(reach, {at("A"), at("")}));
}

TEST_CASE("matched flags follow the oracle on random regexes") {
  testgen::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto atoms = testgen::atom_names(static_cast<std::size_t>(testgen::uniform(rng, 1, 4)));
    const auto r = testgen::random_regex(rng, 4, atoms);
    const auto aut = compile_mission(r);
    const auto t = testgen::random_trace(rng, static_cast<std::size_t>(testgen::uniform(rng, 1, 20)), atoms);
    MissionState st;
    bool dead = false;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const std::vector<Valuation> prefix(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k + 1));
      bool matched = false;
      if (!dead) {
        try {
          matched = step_mission(aut, st, t[k], false).matched;
        } catch (const DeadMission&) {
          dead = true;
        }
      }
      CHECK(matched == membership_oracle(r, prefix));
    }
  }
}

TEST_CASE("goals come from inside positions of the frontier") {
  testgen::Rng rng(13);
  const std::vector<std::string> locs{"A", "B", "C"};
  for (int i = 0; i < 200; ++i) {
    // Build over opaque names, then rename to inside/outside atoms.
    const auto shape = testgen::random_regex(rng, 4, testgen::atom_names(4));
    std::function<spec::RegexAst(const spec::RegexAst&)> rename = [&](const spec::RegexAst& e) {
      if (e.kind == spec::RegexKind::Atom) {
        const std::size_t k = static_cast<std::size_t>(e.name[0] - 'p');
        return spec::RegexAst::atom(k % 2 == 0 ? "inside" : "outside", {locs[k % 3]});
      }
      spec::RegexAst out = e;
      for (auto& c : out.children) c = rename(c);
      return out;
    };
    const auto r = rename(shape);
    const auto aut = compile_mission(r, kLocations);
    GoalSet mentioned;
    for (const auto& p : aut.positions) {
      if (p.name == "inside") mentioned.insert(p.args[0]);
    }
    MissionState st;
    for (int k = 0; k < 20; ++k) {
      const std::string where = testgen::coin(rng) ? "" : locs[static_cast<std::size_t>(testgen::uniform(rng, 0, 2))];
      MissionStep out;
      try {
        out = step_mission(aut, st, at(where));
      } catch (const DeadMission&) {
        break;
      }
      for (const auto& g : out.goals) CHECK(mentioned.count(g) == 1);
      if (out.goals.empty()) {
        for (std::size_t q : enabled_positions(aut, st)) CHECK(aut.positions[q].name == "outside");
      }
    }
  }
}
