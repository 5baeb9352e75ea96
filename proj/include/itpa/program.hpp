#pragma once

// Control-flow-graph programs over individual variables and arrays, the
// text format they are read from, weakest preconditions, and the concrete
// formula of a path.

#include "itpa/logic.hpp"

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace itpa {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public ProgramError {
 public:
  SyntaxError(const std::string& msg, int line, int col)
      : ProgramError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
  int line, col;
};

class UndeclaredSymbol : public ProgramError {
 public:
  using ProgramError::ProgramError;
};

class DuplicateLocation : public ProgramError {
 public:
  using ProgramError::ProgramError;
};

struct Assign {
  Symbol lhs;
  LinTerm rhs;
};

struct Store {
  Symbol array;
  Symbol index;
  LinTerm rhs;
};

struct Assume {
  Formula cond;
};

using Statement = std::variant<Assign, Store, Assume>;

inline std::string to_string(const Statement& s) {
  if (const auto* a = std::get_if<Assign>(&s)) return a->lhs.str() + " := " + a->rhs.str();
  if (const auto* st = std::get_if<Store>(&s)) {
    return st->array.str() + "[" + st->index.str() + "] := " + st->rhs.str();
  }
  return "assume " + to_string(std::get<Assume>(s).cond);
}

using Location = int;

struct Operation {
  Location entry = 0;
  Statement stmt;
  Location exit = 0;
};

struct Program {
  std::vector<std::string> locations;
  std::vector<Operation> ops;
  Location initial = 0;
  Location error = 0;
  std::set<Symbol> variables;
  std::set<Symbol> arrays;

  Location location(const std::string& name) const {
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (locations[i] == name) return static_cast<Location>(i);
    }
    throw UndeclaredSymbol("unknown location " + name);
  }
};

/// A path is a sequence of indices into Program::ops.
using Path = std::vector<std::size_t>;

inline bool path_chains(const Program& p, const Path& path) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (p.ops.at(path[i]).exit != p.ops.at(path[i + 1]).entry) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

struct Token {
  enum Kind { Ident, Int, Sym, End } kind;
  std::string text;
  int line, col;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* two[] = {"->", ":=", "==", "!=", "<=", ">=", "&&", "||"};
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::Ident, src.substr(i, j - i), l, cl});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Token::Int, src.substr(i, j - i), l, cl});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char* t : two) {
      if (src.compare(i, 2, t) == 0) {
        out.push_back({Token::Sym, t, l, cl});
        adv(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("+-*()[];:<>!,").find(c) != std::string::npos) {
      out.push_back({Token::Sym, std::string(1, c), l, cl});
      adv(1);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Token::End, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::set<Symbol>* vars = nullptr, const std::set<Symbol>* arrays = nullptr)
      : toks_(std::move(toks)) {
    if (vars) vars_ = *vars;
    if (arrays) arrays_ = *arrays;
  }

  Program program() {
    Program p;
    std::set<std::string> declared_locs;
    bool have_init = false, have_error = false;
    std::string init, err;
    struct RawOp {
      std::string from, to;
      Token at;
      std::variant<Assign, Store, Assume> stmt;
      bool is_assert = false;
    };
    std::vector<RawOp> raw;
    while (peek().kind != Token::End) {
      const Token& t = peek();
      if (t.kind == Token::Ident && (t.text == "var" || t.text == "array")) {
        bool arr = t.text == "array";
        next();
        do {
          Token id = expect_ident();
          Symbol s = arr ? Symbol::array(id.text) : Symbol::individual(id.text);
          if (is_keyword(id.text)) throw SyntaxError("reserved word " + id.text, id.line, id.col);
          if (vars_.contains(Symbol::individual(id.text)) || arrays_.contains(Symbol::array(id.text))) {
            throw SyntaxError("symbol declared twice: " + id.text, id.line, id.col);
          }
          (arr ? arrays_ : vars_).insert(s);
        } while (peek().kind == Token::Ident);
        expect(";");
        continue;
      }
      if (t.kind == Token::Ident && (t.text == "init" || t.text == "error")) {
        bool is_init = t.text == "init";
        Token kw = next();
        Token id = expect_ident();
        expect(";");
        if ((is_init && have_init) || (!is_init && have_error)) {
          throw SyntaxError(kw.text + " given twice", kw.line, kw.col);
        }
        (is_init ? init : err) = id.text;
        (is_init ? have_init : have_error) = true;
        continue;
      }
      if (t.kind == Token::Ident && t.text == "loc") {
        next();
        do {
          Token id = expect_ident();
          if (!declared_locs.insert(id.text).second) throw DuplicateLocation("location declared twice: " + id.text);
          add_loc(p, id.text);
        } while (peek().kind == Token::Ident);
        expect(";");
        continue;
      }
      Token from = expect_ident();
      expect("->");
      Token to = expect_ident();
      expect(":");
      RawOp op{from.text, to.text, from, Assume{mk_true()}, false};
      const Token& s = peek();
      if (s.kind == Token::Ident && s.text == "assume") {
        next();
        op.stmt = Assume{cond()};
      } else if (s.kind == Token::Ident && s.text == "assert") {
        next();
        op.stmt = Assume{cond()};
        op.is_assert = true;
      } else {
        Token lhs = expect_ident();
        if (accept("[")) {
          Token idx = expect_ident();
          expect("]");
          expect(":=");
          Symbol arr = require_array(lhs);
          Symbol ix = require_var(idx);
          op.stmt = Store{arr, ix, expr()};
        } else {
          expect(":=");
          op.stmt = Assign{require_var(lhs), expr()};
        }
      }
      expect(";");
      raw.push_back(std::move(op));
    }
    if (!have_init) throw SyntaxError("missing init declaration", peek().line, peek().col);
    if (!have_error) throw SyntaxError("missing error declaration", peek().line, peek().col);
    add_loc(p, init);
    add_loc(p, err);
    for (auto& r : raw) {
      Location a = add_loc(p, r.from);
      Location b = add_loc(p, r.to);
      if (r.is_assert) {
        const Formula& c = std::get<Assume>(r.stmt).cond;
        p.ops.push_back({a, Assume{mk_not(c)}, -1});
        p.ops.push_back({a, Assume{c}, b});
      } else {
        p.ops.push_back({a, std::move(r.stmt), b});
      }
    }
    p.initial = p.location(init);
    p.error = p.location(err);
    for (auto& op : p.ops) {
      if (op.exit < 0) op.exit = p.error;
    }
    p.variables = vars_;
    p.arrays = arrays_;
    return p;
  }

  std::vector<Formula> predicates() {
    std::vector<Formula> out;
    while (peek().kind != Token::End) {
      out.push_back(cond());
      accept(";");
    }
    return out;
  }

  Formula single_condition() {
    Formula f = cond();
    if (peek().kind != Token::End) fail("trailing input");
    return f;
  }

 private:
  static bool is_keyword(const std::string& s) {
    return s == "var" || s == "array" || s == "init" || s == "error" || s == "loc" || s == "assume" ||
           s == "assert" || s == "true" || s == "false";
  }

  static Location add_loc(Program& p, const std::string& name) {
    for (std::size_t i = 0; i < p.locations.size(); ++i) {
      if (p.locations[i] == name) return static_cast<Location>(i);
    }
    p.locations.push_back(name);
    return static_cast<Location>(p.locations.size() - 1);
  }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw SyntaxError(msg + (t.kind == Token::End ? " at end of input" : " near '" + t.text + "'"), t.line, t.col);
  }
  bool accept(const std::string& sym) {
    if (peek().kind == Token::Sym && peek().text == sym) {
      next();
      return true;
    }
    return false;
  }
  void expect(const std::string& sym) {
    if (!accept(sym)) fail("expected '" + sym + "'");
  }
  Token expect_ident() {
    if (peek().kind != Token::Ident) fail("expected identifier");
    return next();
  }

  Symbol require_var(const Token& t) {
    Symbol s = Symbol::individual(t.text);
    if (!vars_.contains(s)) throw UndeclaredSymbol(std::to_string(t.line) + ":" + std::to_string(t.col) + ": undeclared variable " + t.text);
    return s;
  }
  Symbol require_array(const Token& t) {
    Symbol s = Symbol::array(t.text);
    if (!arrays_.contains(s)) throw UndeclaredSymbol(std::to_string(t.line) + ":" + std::to_string(t.col) + ": undeclared array " + t.text);
    return s;
  }

  Formula cond() {
    std::vector<Formula> ds{conj()};
    while (accept("||")) ds.push_back(conj());
    return mk_or(ds);
  }
  Formula conj() {
    std::vector<Formula> cs{unary()};
    while (accept("&&")) cs.push_back(unary());
    return mk_and(cs);
  }
  Formula unary() {
    if (accept("!")) return mk_not(unary());
    const Token& t = peek();
    if (t.kind == Token::Ident && t.text == "true") {
      next();
      return mk_true();
    }
    if (t.kind == Token::Ident && t.text == "false") {
      next();
      return mk_false();
    }
    if (t.kind == Token::Sym && t.text == "(") {
      // Either a parenthesized condition or a relation starting with a
      // parenthesized term; try the former first.
      std::size_t save = pos_;
      try {
        next();
        Formula f = cond();
        expect(")");
        const Token& n = peek();
        bool continues_term = n.kind == Token::Sym &&
                              (n.text == "+" || n.text == "-" || n.text == "*" || n.text == "==" || n.text == "!=" ||
                               n.text == "<=" || n.text == "<" || n.text == ">=" || n.text == ">");
        if (!continues_term) return f;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
    }
    return relation();
  }
  Formula relation() {
    LinTerm a = expr();
    const Token& t = peek();
    static const std::map<std::string, RelOp> ops{{"==", RelOp::Eq}, {"!=", RelOp::Ne}, {"<=", RelOp::Le},
                                                  {"<", RelOp::Lt},  {">=", RelOp::Ge}, {">", RelOp::Gt}};
    if (t.kind != Token::Sym || !ops.contains(t.text)) fail("expected relation operator");
    RelOp op = ops.at(next().text);
    LinTerm b = expr();
    return mk_rel(a, op, b);
  }
  LinTerm expr() {
    LinTerm t = term();
    while (true) {
      if (accept("+")) {
        t += term();
      } else if (accept("-")) {
        t -= term();
      } else {
        return t;
      }
    }
  }
  LinTerm term() {
    LinTerm t = factor();
    while (accept("*")) {
      Token at = peek();
      LinTerm u = factor();
      if (u.is_constant()) {
        t *= u.constant_part();
      } else if (t.is_constant()) {
        Rational k = t.constant_part();
        t = u * k;
      } else {
        throw SyntaxError("nonlinear product", at.line, at.col);
      }
    }
    return t;
  }
  LinTerm factor() {
    if (accept("-")) return -factor();
    if (accept("(")) {
      LinTerm t = expr();
      expect(")");
      return t;
    }
    const Token& t = peek();
    if (t.kind == Token::Int) {
      next();
      return LinTerm(Rational(mpz_class(t.text)));
    }
    if (t.kind == Token::Ident) {
      if (is_keyword(t.text)) fail("unexpected keyword");
      Token id = next();
      if (accept("[")) {
        Symbol arr = require_array(id);
        if (peek().kind != Token::Ident || peek(1).kind != Token::Sym || peek(1).text != "]") {
          const Token& bad = peek();
          throw UnsupportedNesting(std::to_string(bad.line) + ":" + std::to_string(bad.col) +
                                   ": array index must be a plain variable");
        }
        Symbol idx = require_var(next());
        expect("]");
        return LinTerm(Var::read(arr, idx));
      }
      return LinTerm(Var::of(require_var(id)));
    }
    fail("expected term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<Symbol> vars_, arrays_;
};

}  // namespace detail

inline Program parse_program(const std::string& text) { return detail::Parser(detail::lex(text)).program(); }

/// Predicates file: one condition per line over the program's symbols.
inline std::vector<Formula> parse_predicates(const std::string& text, const Program& p) {
  std::vector<Formula> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    auto toks = detail::lex(line);
    if (toks.size() > 1) {
      detail::Parser ps(std::move(toks), &p.variables, &p.arrays);
      for (auto& f : ps.predicates()) out.push_back(std::move(f));
    }
    start = end + 1;
  }
  return out;
}

inline Formula parse_condition(const std::string& text, const Program& p) {
  detail::Parser ps(detail::lex(text), &p.variables, &p.arrays);
  return ps.single_condition();
}

// ---------------------------------------------------------------------------
// Weakest preconditions.

namespace detail {

inline std::vector<Var> reads_of_array(const Atom& a, const Symbol& arr) {
  std::vector<Var> out;
  if (a.is_prop()) return out;
  for (const auto& [v, c] : a.rel().lhs.coeffs()) {
    if (v.is_read() && v.sym == arr) out.push_back(v);
  }
  return out;
}

}  // namespace detail

inline Formula wp(const Statement& s, const Formula& phi) {
  if (const auto* a = std::get_if<Assign>(&s)) return substitute(phi, {{a->lhs, a->rhs}});
  if (const auto* g = std::get_if<Assume>(&s)) return mk_implies(g->cond, phi);
  const auto& st = std::get<Store>(s);
  LinTerm idx{Var::of(st.index)};
  return map_atoms(phi, [&](const Atom& atom) -> Formula {
    Formula base = Formula::make_atom(atom);
    auto reads = detail::reads_of_array(atom, st.array);
    if (reads.empty()) return base;
    if (reads.size() > 16) throw LogicError("too many reads of one array in an atom");
    std::vector<Formula> cases;
    for (std::uint32_t mask = 0; mask < (1u << reads.size()); ++mask) {
      std::vector<Formula> conj;
      std::map<Var, LinTerm> sub;
      for (std::size_t k = 0; k < reads.size(); ++k) {
        Formula same = mk_eq(idx, LinTerm(Var::of(*reads[k].index)));
        if (mask & (1u << k)) {
          conj.push_back(same);
          sub.emplace(reads[k], st.rhs);
        } else {
          conj.push_back(mk_not(same));
        }
      }
      conj.push_back(substitute_vars(base, sub));
      cases.push_back(mk_and(conj));
    }
    return mk_or(cases);
  });
}

/// Every symbol a statement mentions, with reads split into parts.
inline std::set<Symbol> statement_symbols(const Statement& s) {
  std::set<Symbol> out;
  auto add_term = [&](const LinTerm& t) {
    for (const auto& [v, c] : t.coeffs()) {
      out.insert(v.sym);
      if (v.index) out.insert(*v.index);
    }
  };
  if (const auto* a = std::get_if<Assign>(&s)) {
    out.insert(a->lhs);
    add_term(a->rhs);
  } else if (const auto* st = std::get_if<Store>(&s)) {
    out.insert(st->array);
    out.insert(st->index);
    add_term(st->rhs);
  } else {
    for (const auto& sym : base_symbols(std::get<Assume>(s).cond)) out.insert(sym);
  }
  return out;
}

inline std::set<Var> statement_reads(const Statement& s) {
  std::set<Var> out;
  auto add_term = [&](const LinTerm& t) {
    for (const auto& [v, c] : t.coeffs()) {
      if (v.is_read()) out.insert(v);
    }
  };
  if (const auto* a = std::get_if<Assign>(&s)) {
    add_term(a->rhs);
  } else if (const auto* st = std::get_if<Store>(&s)) {
    add_term(st->rhs);
  } else {
    for (const auto& v : symbols(std::get<Assume>(s).cond)) {
      if (v.is_read()) out.insert(v);
    }
  }
  return out;
}

/// Transition formula of one statement over unprimed/primed symbols.
/// Individual symbols in `live` get frame equalities; arrays are observed
/// only through the reads in `reads`, related across the step by
/// read-over-write and congruence constraints.
inline Formula concrete_transition(const Statement& s, const std::set<Symbol>& live, const std::set<Var>& reads) {
  std::vector<Formula> conj;
  const Assign* asg = std::get_if<Assign>(&s);
  const Store* st = std::get_if<Store>(&s);
  if (const auto* g = std::get_if<Assume>(&s)) conj.push_back(g->cond);
  for (const auto& sym : live) {
    if (sym.kind != SymbolKind::Individual) continue;
    LinTerm next{Var::of(sym.shifted(1))};
    if (asg && asg->lhs == sym) {
      conj.push_back(mk_eq(next, asg->rhs));
    } else {
      conj.push_back(mk_eq(next, LinTerm(Var::of(sym))));
    }
  }
  // Congruence in the pre-state, and the array's relation to its successor.
  for (const auto& r : reads) {
    for (const auto& m : reads) {
      if (m.sym != r.sym) continue;
      if (r < m) {
        conj.push_back(mk_implies(mk_eq(LinTerm(Var::of(*r.index)), LinTerm(Var::of(*m.index))),
                                  mk_eq(LinTerm(r), LinTerm(m))));
      }
      Var rn = r.shifted(1);
      Formula idx_eq = mk_eq(LinTerm(Var::of(*rn.index)), LinTerm(Var::of(*m.index)));
      Formula carry = mk_eq(LinTerm(rn), LinTerm(m));
      if (st && st->array == r.sym) {
        Formula hit = mk_eq(LinTerm(Var::of(*rn.index)), LinTerm(Var::of(st->index)));
        conj.push_back(mk_implies(mk_and(mk_not(hit), idx_eq), carry));
      } else {
        conj.push_back(mk_implies(idx_eq, carry));
      }
    }
    if (st && st->array == r.sym) {
      Var rn = r.shifted(1);
      Formula hit = mk_eq(LinTerm(Var::of(*rn.index)), LinTerm(Var::of(st->index)));
      conj.push_back(mk_implies(hit, mk_eq(LinTerm(rn), st->rhs)));
    }
  }
  return mk_and(conj);
}

/// Symbols relevant to a path: those of its statements and of `extra`.
inline void path_vocabulary(const Program& p, const Path& path, const std::vector<Formula>& extra,
                            std::set<Symbol>& live, std::set<Var>& reads) {
  for (std::size_t k : path) {
    const auto& s = p.ops.at(k).stmt;
    for (const auto& sym : statement_symbols(s)) live.insert(sym);
    for (const auto& r : statement_reads(s)) reads.insert(r);
  }
  for (const auto& f : extra) {
    for (const auto& v : symbols(f)) {
      live.insert(v.sym);
      if (v.index) {
        live.insert(*v.index);
        reads.insert(v);
      }
    }
  }
  for (const auto& r : reads) live.insert(*r.index);
}

/// One conjunct per step, step i over times i and i+1. The conjunction is
/// satisfiable whenever the path is executable.
inline std::vector<Formula> concrete_path_formula(const Program& p, const Path& path,
                                                  const std::vector<Formula>& preds = {}) {
  std::set<Symbol> live;
  std::set<Var> reads;
  path_vocabulary(p, path, preds, live, reads);
  std::vector<Formula> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    Formula t = concrete_transition(p.ops.at(path[i]).stmt, live, reads);
    out.push_back(prime_shift(t, static_cast<int>(i)));
  }
  return out;
}

}  // namespace itpa
