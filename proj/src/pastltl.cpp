#include "navstack/pastltl.hpp"

#include <functional>
#include <tuple>

#include "navstack/errors.hpp"

namespace navstack::ltl {

namespace {

FormulaAst substitute_var(const FormulaAst& f, const std::string& var, const std::string& value) {
  FormulaAst out = f;
  if (f.kind == FormulaKind::Atom) {
    for (auto& a : out.args) {
      if (a == var) a = value;
    }
    return out;
  }
  if (f.kind == FormulaKind::Forall && f.name == var) return out;  // shadowed
  for (auto& c : out.children) c = substitute_var(c, var, value);
  return out;
}

OpCode opcode_of(FormulaKind k) {
  switch (k) {
    case FormulaKind::True: return OpCode::True;
    case FormulaKind::False: return OpCode::False;
    case FormulaKind::Atom: return OpCode::Atom;
    case FormulaKind::Not: return OpCode::Not;
    case FormulaKind::And: return OpCode::And;
    case FormulaKind::Or: return OpCode::Or;
    case FormulaKind::Implies: return OpCode::Implies;
    case FormulaKind::Previously: return OpCode::Previously;
    case FormulaKind::Once: return OpCode::Once;
    case FormulaKind::Never: return OpCode::Never;
    case FormulaKind::Since: return OpCode::Since;
    case FormulaKind::Forall: break;
  }
  throw InvariantViolation("cannot compile a quantified formula; instantiate it first");
}

bool is_temporal(OpCode op) {
  return op == OpCode::Previously || op == OpCode::Once || op == OpCode::Never ||
         op == OpCode::Since;
}

class Compiler {
 public:
  std::int32_t add(const FormulaAst& f, std::vector<Node>& nodes, std::vector<std::string>& atoms,
                   std::size_t& slots) {
    Node n;
    n.op = opcode_of(f.kind);
    if (n.op == OpCode::Atom) {
      const std::string key = spec::atom_key(f.name, f.args);
      auto [it, inserted] = atom_ids_.try_emplace(key, static_cast<std::int32_t>(atoms.size()));
      if (inserted) atoms.push_back(key);
      n.atom = it->second;
    }
    if (!f.children.empty()) n.lhs = add(f.children[0], nodes, atoms, slots);
    if (f.children.size() > 1) n.rhs = add(f.children[1], nodes, atoms, slots);

    const auto key = std::make_tuple(static_cast<int>(n.op), n.lhs, n.rhs, n.atom);
    if (auto it = shared_.find(key); it != shared_.end()) return it->second;

    if (is_temporal(n.op)) n.slot = static_cast<std::int32_t>(slots++);
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(n);
    shared_.emplace(key, id);
    return id;
  }

 private:
  std::map<std::tuple<int, std::int32_t, std::int32_t, std::int32_t>, std::int32_t> shared_;
  std::map<std::string, std::int32_t> atom_ids_;
};

bool lookup(const Valuation& v, const std::string& key) {
  auto it = v.find(key);
  if (it == v.end()) throw MissingAtom("valuation has no value for atom '" + key + "'");
  return it->second;
}

}  // namespace

FormulaAst instantiate_forall(const FormulaAst& f, const Domains& domains) {
  if (f.kind == FormulaKind::Forall) {
    const std::string& sort = f.sort.empty() ? f.name : f.sort;
    auto it = domains.find(sort);
    if (it == domains.end()) {
      throw UnknownSort("no domain declared for sort '" + sort + "' of variable '" + f.name + "'");
    }
    std::optional<FormulaAst> conj;
    for (const auto& c : it->second) {
      FormulaAst inst = instantiate_forall(substitute_var(f.children[0], f.name, c), domains);
      conj = conj ? FormulaAst::binary(FormulaKind::And, std::move(*conj), std::move(inst))
                  : std::move(inst);
    }
    return conj ? *conj : FormulaAst::constant(true);
  }
  FormulaAst out = f;
  for (auto& c : out.children) c = instantiate_forall(c, domains);
  return out;
}

std::optional<std::size_t> MonitorProgram::atom_index(std::string_view key) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i] == key) return i;
  }
  return std::nullopt;
}

MonitorProgram compile(const FormulaAst& f) {
  MonitorProgram p;
  Compiler c;
  p.root_ = static_cast<std::size_t>(c.add(f, p.nodes_, p.atoms_, p.slot_count_));
  return p;
}

MonitorState::MonitorState(const MonitorProgram& program)
    : slots_(program.slot_count(), 0), scratch_(program.nodes().size(), 0) {
  // Never is seeded true (nothing has happened yet); the other operators start false.
  for (const Node& n : program.nodes()) {
    if (n.op == OpCode::Never) slots_[static_cast<std::size_t>(n.slot)] = 1;
  }
}

bool step_values(const MonitorProgram& program, MonitorState& state,
                 std::span<const std::uint8_t> atom_values) {
  const auto& nodes = program.nodes();
  auto& val = state.scratch_;
  auto& slot = state.slots_;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const bool a = n.lhs >= 0 && val[static_cast<std::size_t>(n.lhs)] != 0;
    const bool b = n.rhs >= 0 && val[static_cast<std::size_t>(n.rhs)] != 0;
    bool out = false;
    switch (n.op) {
      case OpCode::True: out = true; break;
      case OpCode::False: out = false; break;
      case OpCode::Atom: out = atom_values[static_cast<std::size_t>(n.atom)] != 0; break;
      case OpCode::Not: out = !a; break;
      case OpCode::And: out = a && b; break;
      case OpCode::Or: out = a || b; break;
      case OpCode::Implies: out = !a || b; break;
      case OpCode::Previously: {
        auto& s = slot[static_cast<std::size_t>(n.slot)];
        out = s != 0;
        s = a;
        break;
      }
      case OpCode::Once: {
        auto& s = slot[static_cast<std::size_t>(n.slot)];
        out = a || s != 0;
        s = out;
        break;
      }
      case OpCode::Never: {
        auto& s = slot[static_cast<std::size_t>(n.slot)];
        out = !a && s != 0;
        s = out;
        break;
      }
      case OpCode::Since: {
        auto& s = slot[static_cast<std::size_t>(n.slot)];
        out = b || (a && s != 0);
        s = out;
        break;
      }
    }
    val[i] = out;
  }
  state.verdict_ = val[program.root()] != 0;
  ++state.steps_;
  return state.verdict_;
}

bool step(const MonitorProgram& program, MonitorState& state, const Valuation& v) {
  std::vector<std::uint8_t> values(program.atoms().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = lookup(v, program.atoms()[i]);
  return step_values(program, state, values);
}

std::vector<bool> eval_trace_oracle(const FormulaAst& f, const std::vector<Valuation>& trace) {
  // memo[(node, i)] over the AST, keyed by node address.
  std::map<std::pair<const FormulaAst*, std::size_t>, bool> memo;
  std::function<bool(const FormulaAst&, std::size_t)> holds = [&](const FormulaAst& g,
                                                                  std::size_t i) -> bool {
    const auto key = std::make_pair(&g, i);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool r = false;
    switch (g.kind) {
      case FormulaKind::True: r = true; break;
      case FormulaKind::False: r = false; break;
      case FormulaKind::Atom: r = lookup(trace[i], spec::atom_key(g.name, g.args)); break;
      case FormulaKind::Not: r = !holds(g.children[0], i); break;
      case FormulaKind::And: r = holds(g.children[0], i) && holds(g.children[1], i); break;
      case FormulaKind::Or: r = holds(g.children[0], i) || holds(g.children[1], i); break;
      case FormulaKind::Implies: r = !holds(g.children[0], i) || holds(g.children[1], i); break;
      case FormulaKind::Previously: r = i > 0 && holds(g.children[0], i - 1); break;
      case FormulaKind::Once:
        for (std::size_t j = 0; j <= i && !r; ++j) r = holds(g.children[0], j);
        break;
      case FormulaKind::Never:
        r = true;
        for (std::size_t j = 0; j <= i && r; ++j) r = !holds(g.children[0], j);
        break;
      case FormulaKind::Since:
        // exists j <= i with rhs at j and lhs at every k in (j, i]
        for (std::size_t j = 0; j <= i && !r; ++j) {
          if (!holds(g.children[1], j)) continue;
          bool all = true;
          for (std::size_t k = j + 1; k <= i && all; ++k) all = holds(g.children[0], k);
          r = all;
        }
        break;
      case FormulaKind::Forall:
        throw InvariantViolation("trace oracle needs a quantifier-free formula");
    }
    memo.emplace(key, r);
    return r;
  };
  std::vector<bool> out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) out.push_back(holds(f, i));
  return out;
}

}  // namespace navstack::ltl
