#pragma once

// Textual specification language: past-time LTL safety formulas, mission
// regular expressions, named (optionally parametric) definitions and finite
// domain declarations.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace navstack::spec {

enum class TokenKind { Identifier, Keyword, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // keywords are normalized: `->` is "implies", `&&` "and", `||` "or", `!` "not"
  std::size_t line = 1;
  std::size_t column = 1;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool operator==(const Token&) const = default;
};

/// Splits `src` into tokens. The returned sequence always ends with an End
/// token. `#` starts a comment that runs to the end of the line.
std::vector<Token> tokenize(std::string_view src);

/// Canonical key of an instantiated atom, e.g. `inside(eastway)` or `p`.
std::string atom_key(std::string_view name, const std::vector<std::string>& args);

enum class FormulaKind {
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
  Since,
  Forall
};

struct FormulaAst {
  FormulaKind kind = FormulaKind::True;
  std::string name;               // atom predicate, or the bound variable of a Forall
  std::vector<std::string> args;  // atom arguments
  std::string sort;               // Forall only; empty means "sort named like the variable"
  std::vector<FormulaAst> children;

  static FormulaAst constant(bool value);
  static FormulaAst atom(std::string name, std::vector<std::string> args = {});
  static FormulaAst unary(FormulaKind kind, FormulaAst child);
  static FormulaAst binary(FormulaKind kind, FormulaAst lhs, FormulaAst rhs);
  static FormulaAst forall(std::string var, std::string sort, FormulaAst body);

  bool operator==(const FormulaAst&) const = default;
};

enum class RegexKind { Atom, Seq, Alt, Star };

struct RegexAst {
  RegexKind kind = RegexKind::Atom;
  std::string name;
  std::vector<std::string> args;
  std::vector<RegexAst> children;

  static RegexAst atom(std::string name, std::vector<std::string> args = {});
  static RegexAst seq(RegexAst lhs, RegexAst rhs);
  static RegexAst alt(RegexAst lhs, RegexAst rhs);
  static RegexAst star(RegexAst body);

  bool operator==(const RegexAst&) const = default;
};

/// Precedence, tightest first: unary (not, previously, once, never, always),
/// since, and, or, implies. `implies` is right associative, the other binary
/// operators are left associative and `forall X [: sort].` scopes as far right
/// as possible. `always f` is read as `never not f`.
FormulaAst parse_formula(const std::vector<Token>& tokens);
FormulaAst parse_formula(std::string_view src);

/// Precedence, tightest first: postfix star (`*` or `{*}`), `;`, `|`.
RegexAst parse_regex(const std::vector<Token>& tokens);
RegexAst parse_regex(std::string_view src);

/// Fully parenthesized rendering; parse(to_string(x)) == x.
std::string to_string(const FormulaAst& f);
std::string to_string(const RegexAst& r);

struct Definition {
  std::string name;
  std::vector<std::string> params;
  // A body is kept in every form it parses as; bare atoms and references parse as both.
  std::optional<FormulaAst> formula;
  std::optional<RegexAst> regex;
  std::size_t line = 0;
};

struct SpecFile {
  std::vector<Definition> definitions;
  std::map<std::string, std::vector<std::string>> domains;

  const Definition* find(std::string_view name) const;

  /// Appends a definition. Throws InvariantViolation on a duplicate name.
  void define(Definition def);
};

/// Parses the line-oriented spec format:
///   # comment
///   domain <sort> = {c1, c2, ...}
///   name[(p1, ...)] : body      (or `=`; both separators work for both kinds)
/// A definition may only reference names defined on earlier lines.
SpecFile parse_spec(std::string_view text);
SpecFile load_spec(const std::filesystem::path& path);

/// Inlines every reference to a defined name below `root`. The result only
/// has primitive atoms as leaves. Formal parameters of `root` are bound to
/// `args` positionally. Throws UndefinedName, CyclicDefinition, ArityMismatch.
std::variant<FormulaAst, RegexAst> expand_definitions(const SpecFile& spec, const std::string& root,
                                                      const std::vector<std::string>& args = {});
FormulaAst expand_formula(const SpecFile& spec, const std::string& root,
                          const std::vector<std::string>& args = {});
RegexAst expand_regex(const SpecFile& spec, const std::string& root,
                      const std::vector<std::string>& args = {});

}  // namespace navstack::spec
