#pragma once

// Online monitors for past-time LTL. A formula is compiled once into a
// MonitorProgram (a topologically ordered subformula DAG); each run keeps its
// own MonitorState and advances it in time linear in the program size.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navstack/speclang.hpp"

namespace navstack::ltl {

using spec::FormulaAst;
using spec::FormulaKind;

/// Truth value of every instantiated atom (keyed as in spec::atom_key) at one step.
using Valuation = std::map<std::string, bool, std::less<>>;

using Domains = std::map<std::string, std::vector<std::string>>;

/// Replaces each `forall X [: sort]. body` by the conjunction of body[X := c]
/// over the constants of the sort, in declaration order (left-nested). A
/// quantifier without an explicit sort ranges over the domain named like its
/// variable. An empty domain yields `true`. Throws UnknownSort.
FormulaAst instantiate_forall(const FormulaAst& f, const Domains& domains);

enum class OpCode : std::uint8_t {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Implies,
  Previously,
  Once,
  Never,
  Since
};

struct Node {
  OpCode op = OpCode::True;
  std::int32_t lhs = -1;  // child indices are always smaller than the node's own index
  std::int32_t rhs = -1;
  std::int32_t atom = -1;
  std::int32_t slot = -1;  // temporal operators only
};

class MonitorProgram {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::string>& atoms() const { return atoms_; }
  std::size_t slot_count() const { return slot_count_; }
  std::size_t root() const { return root_; }
  std::optional<std::size_t> atom_index(std::string_view key) const;

 private:
  friend MonitorProgram compile(const FormulaAst& f);

  std::vector<Node> nodes_;
  std::vector<std::string> atoms_;
  std::size_t slot_count_ = 0;
  std::size_t root_ = 0;
};

/// Builds the monitor for a quantifier-free formula, sharing syntactically
/// identical subformulas. Throws InvariantViolation if `f` still contains a
/// quantifier.
MonitorProgram compile(const FormulaAst& f);

/// Per-run monitor memory. Copying a state yields an independent monitor.
class MonitorState {
 public:
  explicit MonitorState(const MonitorProgram& program);

  std::size_t steps() const { return steps_; }
  bool verdict() const { return verdict_; }
  const std::vector<std::uint8_t>& slots() const { return slots_; }

 private:
  friend bool step_values(const MonitorProgram&, MonitorState&, std::span<const std::uint8_t>);

  std::vector<std::uint8_t> slots_;
  std::vector<std::uint8_t> scratch_;
  std::size_t steps_ = 0;
  bool verdict_ = true;
};

/// Advances `state` by one step where `atom_values[i]` is the value of
/// program.atoms()[i]. Returns the verdict at this step.
bool step_values(const MonitorProgram& program, MonitorState& state,
                 std::span<const std::uint8_t> atom_values);

/// Same as step_values, looking atoms up by name. Throws MissingAtom.
bool step(const MonitorProgram& program, MonitorState& state, const Valuation& v);

/// Verdicts of a quantifier-free formula at every index of `trace`, computed
/// directly from the trace semantics (memoized recursion, no incremental
/// state). Meant as a reference for testing. Throws MissingAtom.
std::vector<bool> eval_trace_oracle(const FormulaAst& f, const std::vector<Valuation>& trace);

}  // namespace navstack::ltl
