#pragma once

// Mission monitors: a mission regular expression compiled into a Glushkov
// position automaton whose positions carry goal locations. Stepping the
// automaton yields the set of locations the robot may head to next.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "navstack/pastltl.hpp"
#include "navstack/speclang.hpp"

namespace navstack::mission {

using spec::RegexAst;
using spec::RegexKind;
using ltl::Valuation;

using PositionSet = std::set<std::size_t>;
using GoalSet = std::set<std::string>;

struct Position {
  std::string name;  // predicate, e.g. "inside"
  std::vector<std::string> args;
  std::string key;  // instantiated atom, e.g. "inside(A)"
  GoalSet goals;    // {L} for inside(L), empty otherwise
};

struct PositionAutomaton {
  std::vector<Position> positions;
  bool nullable = false;
  PositionSet first;
  PositionSet last;
  std::vector<PositionSet> follow;  // indexed by position
  bool loops_to_start = false;      // the whole expression is a star
};

struct MissionState {
  PositionSet active;
  bool at_start = true;  // first() is enabled: before any step, or right after a wrapping match
  std::size_t completed_matches = 0;
};

struct MissionStep {
  GoalSet goals;
  bool matched = false;
};

/// Glushkov construction. No location check.
PositionAutomaton compile_mission(const RegexAst& r);

/// Glushkov construction for a mission over inside(L)/outside(L) atoms; throws
/// UnknownLocation for any other atom or for L outside `locations`.
PositionAutomaton compile_mission(const RegexAst& r, const std::set<std::string>& locations);

/// Positions enabled for the next letter.
PositionSet enabled_positions(const PositionAutomaton& aut, const MissionState& st);

/// Consumes one letter. A position becomes active when it is enabled and its
/// atom holds. `matched` reports whether the trace so far is in the language.
/// Goals are the locations of the inside(.) positions enabled for the next
/// letter. Throws DeadMission when no position survives. With `wrap` set, a
/// match of a starred mission re-enables the first positions.
MissionStep step_mission(const PositionAutomaton& aut, MissionState& st, const Valuation& v,
                         bool wrap = true);

/// Whole-trace language membership by dynamic programming over trace
/// intervals. A letter matches Atom a iff v(a) is true. Reference for tests.
bool membership_oracle(const RegexAst& r, const std::vector<Valuation>& trace);

}  // namespace navstack::mission
