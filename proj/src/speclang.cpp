#include "navstack/speclang.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "navstack/errors.hpp"

namespace navstack::spec {

namespace {

constexpr std::array kKeywords = {"and",  "or",    "not",    "implies",    "since",  "once",
                                  "never", "always", "previously", "forall", "true", "false"};

constexpr std::size_t kMaxNesting = 256;

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Identifier: return "identifier '" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) {
      throw ParseError(1, 1, {"end"}, "unterminated token stream");
    }
  }

  FormulaAst formula_root() {
    FormulaAst f = formula();
    expect_end();
    return f;
  }

  RegexAst regex_root() {
    RegexAst r = alt();
    expect_end();
    return r;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxNesting) {
        const Token& t = parser.peek();
        throw ParseError(t.line, t.column, {"shallower nesting"}, describe(t));
      }
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  const Token& peek() const { return tokens_[pos_]; }

  bool accept(TokenKind kind, std::string_view text) {
    if (peek().is(kind, text)) {
      if (peek().kind != TokenKind::End) ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    throw ParseError(t.line, t.column, std::move(expected), describe(t));
  }

  void expect(TokenKind kind, std::string_view text) {
    if (!accept(kind, text)) fail({"'" + std::string(text) + "'"});
  }

  std::string expect_identifier() {
    if (peek().kind != TokenKind::Identifier) fail({"identifier"});
    return tokens_[pos_++].text;
  }

  void expect_end() {
    if (peek().kind != TokenKind::End) fail({"end of input"});
  }

  std::vector<std::string> atom_args() {
    std::vector<std::string> args;
    if (!accept(TokenKind::Punct, "(")) return args;
    args.push_back(expect_identifier());
    while (accept(TokenKind::Punct, ",")) args.push_back(expect_identifier());
    expect(TokenKind::Punct, ")");
    return args;
  }

  // ---- formulas ----

  FormulaAst formula() {
    DepthGuard guard(*this);
    if (accept(TokenKind::Keyword, "forall")) {
      std::string var = expect_identifier();
      std::string sort;
      if (accept(TokenKind::Punct, ":")) sort = expect_identifier();
      expect(TokenKind::Punct, ".");
      return FormulaAst::forall(std::move(var), std::move(sort), formula());
    }
    FormulaAst lhs = disjunction();
    if (accept(TokenKind::Keyword, "implies")) {
      return FormulaAst::binary(FormulaKind::Implies, std::move(lhs), formula());
    }
    return lhs;
  }

  FormulaAst disjunction() {
    FormulaAst lhs = conjunction();
    while (accept(TokenKind::Keyword, "or")) {
      lhs = FormulaAst::binary(FormulaKind::Or, std::move(lhs), conjunction());
    }
    return lhs;
  }

  FormulaAst conjunction() {
    FormulaAst lhs = since();
    while (accept(TokenKind::Keyword, "and")) {
      lhs = FormulaAst::binary(FormulaKind::And, std::move(lhs), since());
    }
    return lhs;
  }

  FormulaAst since() {
    FormulaAst lhs = unary();
    while (accept(TokenKind::Keyword, "since")) {
      lhs = FormulaAst::binary(FormulaKind::Since, std::move(lhs), unary());
    }
    return lhs;
  }

  FormulaAst unary() {
    DepthGuard guard(*this);
    if (accept(TokenKind::Keyword, "not")) return FormulaAst::unary(FormulaKind::Not, unary());
    if (accept(TokenKind::Keyword, "previously")) {
      return FormulaAst::unary(FormulaKind::Previously, unary());
    }
    if (accept(TokenKind::Keyword, "once")) return FormulaAst::unary(FormulaKind::Once, unary());
    if (accept(TokenKind::Keyword, "never")) return FormulaAst::unary(FormulaKind::Never, unary());
    if (accept(TokenKind::Keyword, "always")) {
      return FormulaAst::unary(FormulaKind::Never,
                               FormulaAst::unary(FormulaKind::Not, unary()));
    }
    return primary();
  }

  FormulaAst primary() {
    if (accept(TokenKind::Punct, "(")) {
      FormulaAst f = formula();
      expect(TokenKind::Punct, ")");
      return f;
    }
    if (accept(TokenKind::Keyword, "true")) return FormulaAst::constant(true);
    if (accept(TokenKind::Keyword, "false")) return FormulaAst::constant(false);
    if (peek().kind == TokenKind::Identifier) {
      std::string name = expect_identifier();
      return FormulaAst::atom(std::move(name), atom_args());
    }
    fail({"'('", "identifier", "'not'", "'previously'", "'once'", "'never'", "'always'", "'true'",
          "'false'"});
  }

  // ---- regexes ----

  RegexAst alt() {
    DepthGuard guard(*this);
    RegexAst lhs = seq();
    while (accept(TokenKind::Punct, "|")) lhs = RegexAst::alt(std::move(lhs), seq());
    return lhs;
  }

  RegexAst seq() {
    RegexAst lhs = postfix();
    while (accept(TokenKind::Punct, ";")) lhs = RegexAst::seq(std::move(lhs), postfix());
    return lhs;
  }

  RegexAst postfix() {
    RegexAst r = regex_primary();
    for (;;) {
      if (accept(TokenKind::Punct, "*")) {
        r = RegexAst::star(std::move(r));
      } else if (peek().is(TokenKind::Punct, "{")) {
        ++pos_;
        expect(TokenKind::Punct, "*");
        expect(TokenKind::Punct, "}");
        r = RegexAst::star(std::move(r));
      } else {
        return r;
      }
    }
  }

  RegexAst regex_primary() {
    if (accept(TokenKind::Punct, "(")) {
      RegexAst r = alt();
      expect(TokenKind::Punct, ")");
      return r;
    }
    if (peek().kind == TokenKind::Identifier) {
      std::string name = expect_identifier();
      return RegexAst::atom(std::move(name), atom_args());
    }
    fail({"'('", "identifier"});
  }

  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

// ---- printing ----

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i != 0) out += ", ";
    out += args[i];
  }
  return out;
}

std::string_view binary_symbol(FormulaKind k) {
  switch (k) {
    case FormulaKind::And: return "and";
    case FormulaKind::Or: return "or";
    case FormulaKind::Implies: return "implies";
    case FormulaKind::Since: return "since";
    default: return "?";
  }
}

// ---- substitution and expansion ----

using Bindings = std::map<std::string, std::string>;

std::vector<std::string> substitute_args(const std::vector<std::string>& args, const Bindings& b) {
  std::vector<std::string> out = args;
  for (auto& a : out) {
    if (auto it = b.find(a); it != b.end()) a = it->second;
  }
  return out;
}

FormulaAst substitute(const FormulaAst& f, const Bindings& b) {
  FormulaAst out = f;
  if (f.kind == FormulaKind::Atom) {
    out.args = substitute_args(f.args, b);
    return out;
  }
  if (f.kind == FormulaKind::Forall && b.count(f.name) != 0) {
    Bindings inner = b;
    inner.erase(f.name);
    out.children[0] = substitute(f.children[0], inner);
    return out;
  }
  for (auto& c : out.children) c = substitute(c, b);
  return out;
}

RegexAst substitute(const RegexAst& r, const Bindings& b) {
  RegexAst out = r;
  if (r.kind == RegexKind::Atom) {
    out.args = substitute_args(r.args, b);
    return out;
  }
  for (auto& c : out.children) c = substitute(c, b);
  return out;
}

Bindings bind(const Definition& def, const std::vector<std::string>& args) {
  if (def.params.size() != args.size()) {
    throw ArityMismatch("definition '" + def.name + "' takes " + std::to_string(def.params.size()) +
                        " argument(s), got " + std::to_string(args.size()));
  }
  Bindings b;
  for (std::size_t i = 0; i < args.size(); ++i) b[def.params[i]] = args[i];
  return b;
}

class Expander {
 public:
  explicit Expander(const SpecFile& spec) : spec_(spec) {}

  FormulaAst formula(const std::string& name, const std::vector<std::string>& args) {
    const Definition& def = lookup(name);
    if (!def.formula) throw UndefinedName("'" + name + "' is not a formula definition");
    Frame frame(*this, name);
    return expand(substitute(*def.formula, bind(def, args)));
  }

  RegexAst regex(const std::string& name, const std::vector<std::string>& args) {
    const Definition& def = lookup(name);
    if (!def.regex) throw UndefinedName("'" + name + "' is not a regular expression definition");
    Frame frame(*this, name);
    return expand(substitute(*def.regex, bind(def, args)));
  }

 private:
  struct Frame {
    Frame(Expander& e, const std::string& name) : expander(e) {
      auto& stack = expander.stack_;
      if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
        std::string cycle;
        for (const auto& s : stack) cycle += s + " -> ";
        throw CyclicDefinition("cyclic definition: " + cycle + name);
      }
      stack.push_back(name);
    }
    ~Frame() { expander.stack_.pop_back(); }
    Expander& expander;
  };

  const Definition& lookup(const std::string& name) const {
    const Definition* def = spec_.find(name);
    if (def == nullptr) throw UndefinedName("undefined name '" + name + "'");
    return *def;
  }

  FormulaAst expand(const FormulaAst& f) {
    if (f.kind == FormulaKind::Atom) {
      if (spec_.find(f.name) == nullptr) return f;
      return formula(f.name, f.args);
    }
    FormulaAst out = f;
    for (auto& c : out.children) c = expand(c);
    return out;
  }

  RegexAst expand(const RegexAst& r) {
    if (r.kind == RegexKind::Atom) {
      if (spec_.find(r.name) == nullptr) return r;
      return regex(r.name, r.args);
    }
    RegexAst out = r;
    for (auto& c : out.children) c = expand(c);
    return out;
  }

  const SpecFile& spec_;
  std::vector<std::string> stack_;
};

void collect_atoms(const FormulaAst& f, std::set<std::string>& out) {
  if (f.kind == FormulaKind::Atom) out.insert(f.name);
  for (const auto& c : f.children) collect_atoms(c, out);
}

void collect_atoms(const RegexAst& r, std::set<std::string>& out) {
  if (r.kind == RegexKind::Atom) out.insert(r.name);
  for (const auto& c : r.children) collect_atoms(c, out);
}

bool prefers_regex(const SpecFile& spec, const Definition& def, std::size_t depth = 0) {
  if (!def.regex) return false;
  if (!def.formula) return true;
  // Bare atom bodies parse both ways; follow the reference to decide.
  if (depth < spec.definitions.size() && def.formula->kind == FormulaKind::Atom) {
    if (const Definition* ref = spec.find(def.formula->name)) {
      return prefers_regex(spec, *ref, depth + 1);
    }
  }
  return false;
}

// Shifts token positions from a single-line tokenization to file coordinates.
std::vector<Token> tokenize_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> tokens;
  try {
    tokens = tokenize(line);
  } catch (const LexError& e) {
    throw LexError(line_no, e.column(), "unrecognized character");
  }
  for (auto& t : tokens) t.line = line_no;
  return tokens;
}

}  // namespace

// ---- tokenizer ----

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto push = [&](TokenKind kind, std::string text, std::size_t width) {
    out.push_back(Token{kind, std::move(text), line, col});
    i += width;
    col += width;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      const bool keyword =
          std::find(kKeywords.begin(), kKeywords.end(), std::string_view(word)) != kKeywords.end();
      push(keyword ? TokenKind::Keyword : TokenKind::Identifier, std::move(word), j - i);
      continue;
    }
    const char next = i + 1 < src.size() ? src[i + 1] : '\0';
    if (c == '-' && next == '>') {
      push(TokenKind::Keyword, "implies", 2);
    } else if (c == '&' && next == '&') {
      push(TokenKind::Keyword, "and", 2);
    } else if (c == '|' && next == '|') {
      push(TokenKind::Keyword, "or", 2);
    } else if (c == '!') {
      push(TokenKind::Keyword, "not", 1);
    } else if (std::string_view(";|*(),:.{}=").find(c) != std::string_view::npos) {
      push(TokenKind::Punct, std::string(1, c), 1);
    } else {
      throw LexError(line, col, "unrecognized character");
    }
  }
  out.push_back(Token{TokenKind::End, "", line, col});
  return out;
}

std::string atom_key(std::string_view name, const std::vector<std::string>& args) {
  std::string key(name);
  if (args.empty()) return key;
  key += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i != 0) key += ',';
    key += args[i];
  }
  key += ')';
  return key;
}

// ---- AST factories ----

FormulaAst FormulaAst::constant(bool value) {
  FormulaAst f;
  f.kind = value ? FormulaKind::True : FormulaKind::False;
  return f;
}

FormulaAst FormulaAst::atom(std::string name, std::vector<std::string> args) {
  FormulaAst f;
  f.kind = FormulaKind::Atom;
  f.name = std::move(name);
  f.args = std::move(args);
  return f;
}

FormulaAst FormulaAst::unary(FormulaKind kind, FormulaAst child) {
  FormulaAst f;
  f.kind = kind;
  f.children.push_back(std::move(child));
  return f;
}

FormulaAst FormulaAst::binary(FormulaKind kind, FormulaAst lhs, FormulaAst rhs) {
  FormulaAst f;
  f.kind = kind;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

FormulaAst FormulaAst::forall(std::string var, std::string sort, FormulaAst body) {
  FormulaAst f;
  f.kind = FormulaKind::Forall;
  f.name = std::move(var);
  f.sort = std::move(sort);
  f.children.push_back(std::move(body));
  return f;
}

RegexAst RegexAst::atom(std::string name, std::vector<std::string> args) {
  RegexAst r;
  r.kind = RegexKind::Atom;
  r.name = std::move(name);
  r.args = std::move(args);
  return r;
}

RegexAst RegexAst::seq(RegexAst lhs, RegexAst rhs) {
  RegexAst r;
  r.kind = RegexKind::Seq;
  r.children.push_back(std::move(lhs));
  r.children.push_back(std::move(rhs));
  return r;
}

RegexAst RegexAst::alt(RegexAst lhs, RegexAst rhs) {
  RegexAst r;
  r.kind = RegexKind::Alt;
  r.children.push_back(std::move(lhs));
  r.children.push_back(std::move(rhs));
  return r;
}

RegexAst RegexAst::star(RegexAst body) {
  RegexAst r;
  r.kind = RegexKind::Star;
  r.children.push_back(std::move(body));
  return r;
}

// ---- parsing entry points ----

FormulaAst parse_formula(const std::vector<Token>& tokens) { return Parser(tokens).formula_root(); }
FormulaAst parse_formula(std::string_view src) { return parse_formula(tokenize(src)); }
RegexAst parse_regex(const std::vector<Token>& tokens) { return Parser(tokens).regex_root(); }
RegexAst parse_regex(std::string_view src) { return parse_regex(tokenize(src)); }

std::string to_string(const FormulaAst& f) {
  switch (f.kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Atom:
      return f.args.empty() ? f.name : f.name + "(" + join_args(f.args) + ")";
    case FormulaKind::Not: return "not " + to_string(f.children[0]);
    case FormulaKind::Previously: return "previously " + to_string(f.children[0]);
    case FormulaKind::Once: return "once " + to_string(f.children[0]);
    case FormulaKind::Never: return "never " + to_string(f.children[0]);
    case FormulaKind::Forall: {
      std::string head = "forall " + f.name;
      if (!f.sort.empty()) head += " : " + f.sort;
      return "(" + head + ". " + to_string(f.children[0]) + ")";
    }
    default:
      return "(" + to_string(f.children[0]) + " " + std::string(binary_symbol(f.kind)) + " " +
             to_string(f.children[1]) + ")";
  }
}

std::string to_string(const RegexAst& r) {
  switch (r.kind) {
    case RegexKind::Atom:
      return r.args.empty() ? r.name : r.name + "(" + join_args(r.args) + ")";
    case RegexKind::Star: return to_string(r.children[0]) + "*";
    case RegexKind::Seq:
      return "(" + to_string(r.children[0]) + "; " + to_string(r.children[1]) + ")";
    case RegexKind::Alt:
      return "(" + to_string(r.children[0]) + " | " + to_string(r.children[1]) + ")";
  }
  return {};
}

// ---- spec files ----

const Definition* SpecFile::find(std::string_view name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

void SpecFile::define(Definition def) {
  if (find(def.name) != nullptr) {
    throw InvariantViolation("duplicate definition '" + def.name + "'");
  }
  definitions.push_back(std::move(def));
}

SpecFile parse_spec(std::string_view text) {
  SpecFile spec;
  std::set<std::string> referenced;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    std::vector<Token> tokens = tokenize_line(raw, line_no);
    if (tokens.size() == 1) continue;  // blank or comment

    std::size_t pos = 0;
    auto at = [&](std::size_t k) -> const Token& { return tokens[std::min(k, tokens.size() - 1)]; };
    auto bad = [&](std::vector<std::string> expected) {
      const Token& t = at(pos);
      throw ParseError(t.line, t.column, std::move(expected), describe(t));
    };

    if (at(0).kind != TokenKind::Identifier) bad({"identifier"});

    if (at(0).text == "domain" && at(1).kind == TokenKind::Identifier) {
      std::string sort = at(1).text;
      pos = 2;
      if (!at(pos).is(TokenKind::Punct, "=")) bad({"'='"});
      ++pos;
      if (!at(pos).is(TokenKind::Punct, "{")) bad({"'{'"});
      ++pos;
      std::vector<std::string> constants;
      if (!at(pos).is(TokenKind::Punct, "}")) {
        for (;;) {
          if (at(pos).kind != TokenKind::Identifier) bad({"identifier"});
          constants.push_back(at(pos++).text);
          if (at(pos).is(TokenKind::Punct, ",")) {
            ++pos;
            continue;
          }
          break;
        }
      }
      if (!at(pos).is(TokenKind::Punct, "}")) bad({"'}'", "','"});
      ++pos;
      if (at(pos).kind != TokenKind::End) bad({"end of line"});
      if (spec.domains.count(sort) != 0) {
        throw InvariantViolation("duplicate domain '" + sort + "'");
      }
      spec.domains[sort] = std::move(constants);
      continue;
    }

    Definition def;
    def.name = at(0).text;
    def.line = line_no;
    pos = 1;
    if (at(pos).is(TokenKind::Punct, "(")) {
      ++pos;
      for (;;) {
        if (at(pos).kind != TokenKind::Identifier) bad({"identifier"});
        def.params.push_back(at(pos++).text);
        if (at(pos).is(TokenKind::Punct, ",")) {
          ++pos;
          continue;
        }
        break;
      }
      if (!at(pos).is(TokenKind::Punct, ")")) bad({"')'", "','"});
      ++pos;
    }
    if (!at(pos).is(TokenKind::Punct, ":") && !at(pos).is(TokenKind::Punct, "=")) {
      bad({"':'", "'='"});
    }
    ++pos;
    const std::vector<Token> body(tokens.begin() + static_cast<std::ptrdiff_t>(pos), tokens.end());
    if (body.size() == 1) {
      pos = tokens.size() - 1;
      bad({"definition body"});
    }

    std::optional<ParseError> formula_error;
    std::optional<ParseError> regex_error;
    try {
      def.formula = parse_formula(body);
    } catch (const ParseError& e) {
      formula_error = e;
    }
    try {
      def.regex = parse_regex(body);
    } catch (const ParseError& e) {
      regex_error = e;
    }
    if (!def.formula && !def.regex) {
      // Report the error of the reading that got furthest.
      const ParseError& f = *formula_error;
      const ParseError& r = *regex_error;
      if (r.column() > f.column()) throw r;
      throw f;
    }

    // References must point to earlier lines; this also rules out recursion.
    std::set<std::string> used;
    if (def.formula) collect_atoms(*def.formula, used);
    if (def.regex) collect_atoms(*def.regex, used);
    if (used.count(def.name) != 0) {
      throw CyclicDefinition("definition '" + def.name + "' refers to itself (line " +
                             std::to_string(line_no) + ")");
    }
    if (referenced.count(def.name) != 0) {
      throw UndefinedName("'" + def.name + "' is used before its definition (line " +
                          std::to_string(line_no) + ")");
    }
    referenced.insert(used.begin(), used.end());
    spec.define(std::move(def));
  }
  return spec;
}

SpecFile load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::variant<FormulaAst, RegexAst> expand_definitions(const SpecFile& spec, const std::string& root,
                                                      const std::vector<std::string>& args) {
  const Definition* def = spec.find(root);
  if (def == nullptr) throw UndefinedName("undefined name '" + root + "'");
  if (prefers_regex(spec, *def)) return Expander(spec).regex(root, args);
  return Expander(spec).formula(root, args);
}

FormulaAst expand_formula(const SpecFile& spec, const std::string& root,
                          const std::vector<std::string>& args) {
  return Expander(spec).formula(root, args);
}

RegexAst expand_regex(const SpecFile& spec, const std::string& root,
                      const std::vector<std::string>& args) {
  return Expander(spec).regex(root, args);
}

}  // namespace navstack::spec
