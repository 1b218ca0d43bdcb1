#include <doctest.h>

#include "generators.hpp"
#include "navstack/errors.hpp"
#include "navstack/pastltl.hpp"

using namespace navstack;
using namespace navstack::ltl;
using spec::parse_formula;

namespace {

std::vector<bool> run(const FormulaAst& f, const std::vector<Valuation>& trace) {
  const auto prog = compile(f);
  MonitorState st(prog);
  std::vector<bool> out;
  for (const auto& v : trace) out.push_back(step(prog, st, v));
  return out;
}

std::vector<Valuation> trace1(const std::string& atom, std::initializer_list<bool> values) {
  std::vector<Valuation> t;
  for (bool b : values) t.push_back({{atom, b}});
  return t;
}

std::size_t count(const MonitorProgram& p, OpCode op) {
  std::size_t n = 0;
  for (const auto& node : p.nodes()) n += node.op == op ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("since by hand") {
  const std::vector<Valuation> t{
      {{"p", true}, {"q", false}},
      {{"p", true}, {"q", true}},
      {{"p", true}, {"q", false}},
      {{"p", false}, {"q", false}},
  };
  const auto f = parse_formula("p since q");
  const std::vector<bool> expected{false, true, true, false};
  CHECK(eval_trace_oracle(f, t) == expected);
  CHECK(run(f, t) == expected);
}

TEST_CASE("never is a running conjunction") {
  const auto f = parse_formula("never p");
  const auto t = trace1("p", {false, false, true, false});
  const std::vector<bool> expected{true, true, false, false};
  CHECK(eval_trace_oracle(f, t) == expected);
  CHECK(run(f, t) == expected);
}

TEST_CASE("once and previously") {
  const auto once = parse_formula("once p");
  CHECK(run(once, trace1("p", {false, true, false})) == std::vector<bool>{false, true, true});
  const auto prev = parse_formula("previously p");
  CHECK(run(prev, trace1("p", {true, false})) == std::vector<bool>{false, true});
}

TEST_CASE("single step agrees with the oracle") {
  testgen::Rng rng(3);
  const auto atoms = testgen::atom_names(3);
  for (int i = 0; i < 200; ++i) {
    const auto f = testgen::random_formula(rng, 4, atoms);
    const auto t = testgen::random_trace(rng, 1, atoms);
    CHECK(run(f, t) == eval_trace_oracle(f, t));
  }
}

TEST_CASE("one-way eastway example") {
  const auto spec = spec::parse_spec(
      "entered(X) : inside(X) and not previously inside(X)\n"
      "ow_e : inside(eastway) implies (going(eastway) since entered(eastway))\n");
  const auto f = spec::expand_formula(spec, "ow_e");
  const std::vector<Valuation> t{
      {{"inside(eastway)", false}, {"going(eastway)", true}},
      {{"inside(eastway)", true}, {"going(eastway)", true}},
      {{"inside(eastway)", true}, {"going(eastway)", false}},
  };
  CHECK(run(f, t) == std::vector<bool>{true, true, false});
  CHECK(eval_trace_oracle(f, t) == std::vector<bool>{true, true, false});
}

TEST_CASE("program shapes") {
  const auto atom = compile(parse_formula("p"));
  CHECK(atom.nodes().size() == 1);
  CHECK(atom.slot_count() == 0);

  const auto since = compile(parse_formula("p since q"));
  CHECK(since.nodes().size() == 3);
  CHECK(since.slot_count() == 1);

  const auto ca = compile(parse_formula("never dangerously_close(obstacles)"));
  CHECK(ca.nodes().size() == 2);
  CHECK(ca.slot_count() == 1);
  CHECK(ca.nodes()[ca.root()].op == OpCode::Never);
  CHECK(ca.atoms() == std::vector<std::string>{"dangerously_close(obstacles)"});

  // Shared subformulas compile once.
  const auto shared = compile(parse_formula("(once p and q) or (once p and q)"));
  CHECK(count(shared, OpCode::Once) == 1);
  CHECK(count(shared, OpCode::And) == 1);
}

TEST_CASE("program structure invariants on random formulas") {
  testgen::Rng rng(11);
  const auto atoms = testgen::atom_names(4);
  for (int i = 0; i < 300; ++i) {
    const auto prog = compile(testgen::random_formula(rng, 5, atoms));
    std::vector<int> slot_owner(prog.slot_count(), 0);
    for (std::size_t k = 0; k < prog.nodes().size(); ++k) {
      const auto& n = prog.nodes()[k];
      if (n.lhs >= 0) CHECK(static_cast<std::size_t>(n.lhs) < k);
      if (n.rhs >= 0) CHECK(static_cast<std::size_t>(n.rhs) < k);
      const bool temporal = n.op == OpCode::Previously || n.op == OpCode::Once ||
                            n.op == OpCode::Never || n.op == OpCode::Since;
      CHECK(temporal == (n.slot >= 0));
      if (n.slot >= 0) ++slot_owner[static_cast<std::size_t>(n.slot)];
    }
    for (int owners : slot_owner) CHECK(owners == 1);
    CHECK(MonitorState(prog).slots().size() == prog.slot_count());
  }
}

TEST_CASE("forall instantiation") {
  const Domains d{{"oneway", {"eastway", "westway"}}, {"s1", {"a", "b"}}, {"s2", {"c"}},
                  {"single", {"d"}}, {"none", {}}};
  const auto ow = instantiate_forall(
      parse_formula("forall X : oneway. inside(X) implies (going(X) since inside(X))"), d);
  const auto ow_e = parse_formula("inside(eastway) implies (going(eastway) since inside(eastway))");
  const auto ow_w = parse_formula("inside(westway) implies (going(westway) since inside(westway))");
  CHECK(ow == FormulaAst::binary(FormulaKind::And, ow_e, ow_w));

  CHECK(instantiate_forall(parse_formula("forall X : single. p(X)"), d) == parse_formula("p(d)"));
  CHECK(instantiate_forall(parse_formula("forall X : s1. forall Y : s2. p(X, Y)"), d) ==
        parse_formula("p(a, c) and p(b, c)"));
  CHECK(instantiate_forall(parse_formula("forall X : none. p(X)"), d) == FormulaAst::constant(true));
  // Without an explicit sort the variable names its domain.
  CHECK(instantiate_forall(parse_formula("forall s2. p(s2)"), d) == parse_formula("p(c)"));
  CHECK_THROWS_AS(instantiate_forall(parse_formula("forall X. p(X)"), d), UnknownSort);
  CHECK_THROWS_AS(compile(parse_formula("forall X : s2. p(X)")), InvariantViolation);
}

TEST_CASE("missing atom") {
  const auto prog = compile(parse_formula("p and q"));
  MonitorState st(prog);
  CHECK_THROWS_AS(step(prog, st, Valuation{{"p", true}}), MissingAtom);
  CHECK_THROWS_AS(eval_trace_oracle(parse_formula("p and q"), {Valuation{{"p", true}}}), MissingAtom);
}

TEST_CASE("identities hold on random traces") {
  testgen::Rng rng(23);
  const auto atoms = testgen::atom_names(4);
  for (int i = 0; i < 200; ++i) {
    const auto phi = testgen::random_formula(rng, 3, atoms);
    const auto psi = testgen::random_formula(rng, 3, atoms);
    const auto t = testgen::random_trace(rng, 1 + static_cast<std::size_t>(i % 30), atoms);
    using K = FormulaKind;
    const auto once = FormulaAst::unary(K::Once, phi);
    CHECK(run(once, t) == run(FormulaAst::binary(K::Since, FormulaAst::constant(true), phi), t));
    // never phi holds while phi has been false throughout, so it is the
    // negation of once phi; always phi (never not phi) is not once not phi.
    const auto never = FormulaAst::unary(K::Never, phi);
    CHECK(run(never, t) == run(FormulaAst::unary(K::Not, FormulaAst::unary(K::Once, phi)), t));
    const auto always = FormulaAst::unary(K::Never, FormulaAst::unary(K::Not, phi));
    CHECK(run(always, t) ==
          run(FormulaAst::unary(K::Not, FormulaAst::unary(K::Once, FormulaAst::unary(K::Not, phi))), t));
    const auto prev_and = FormulaAst::unary(K::Previously, FormulaAst::binary(K::And, phi, psi));
    const auto and_prev = FormulaAst::binary(K::And, FormulaAst::unary(K::Previously, phi),
                                             FormulaAst::unary(K::Previously, psi));
    CHECK(run(prev_and, t) == run(and_prev, t));
  }
}

TEST_CASE("cloned states are independent and deterministic") {
  testgen::Rng rng(31);
  const auto atoms = testgen::atom_names(4);
  for (int i = 0; i < 100; ++i) {
    const auto prog = compile(testgen::random_formula(rng, 5, atoms));
    const auto t = testgen::random_trace(rng, 30, atoms);
    MonitorState a(prog);
    for (std::size_t k = 0; k < 10; ++k) step(prog, a, t[k]);
    MonitorState b = a;
    const auto frozen = a.slots();
    MonitorState c = a;
    for (std::size_t k = 10; k < t.size(); ++k) {
      CHECK(step(prog, b, t[k]) == step(prog, c, t[k]));
    }
    CHECK(a.slots() == frozen);
    CHECK(a.steps() == 10);
  }
}

TEST_CASE("a violated never stays violated") {
  testgen::Rng rng(37);
  const auto atoms = testgen::atom_names(4);
  for (int i = 0; i < 200; ++i) {
    const auto f = FormulaAst::unary(FormulaKind::Never, testgen::random_formula(rng, 4, atoms));
    const auto v = run(f, testgen::random_trace(rng, 40, atoms));
    bool seen_false = false;
    for (bool b : v) {
      if (seen_false) CHECK_FALSE(b);
      seen_false = seen_false || !b;
    }
  }
}

TEST_CASE("oracle equivalence on random pairs") {
  testgen::Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    const auto atoms = testgen::atom_names(static_cast<std::size_t>(testgen::uniform(rng, 1, 4)));
    const auto f = testgen::random_formula(rng, 5, atoms);
    const auto t = testgen::random_trace(rng, static_cast<std::size_t>(testgen::uniform(rng, 1, 50)), atoms);
    CHECK(run(f, t) == eval_trace_oracle(f, t));
  }
}
