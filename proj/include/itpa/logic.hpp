#pragma once

// Terms, atoms and quantifier-free formulas over primed and unprimed
// symbols. Formulas are immutable DAGs with shared children; every
// transformation here is a pure function of its inputs.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace itpa {

using Rational = mpq_class;

inline std::string to_string(const Rational& r) { return r.get_str(); }

/// Separator reserved for generated names; the program parser rejects it.
inline constexpr const char* kReservedSeparator = "\xC2\xA7";  // U+00A7

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativeShiftInfeasible : public LogicError {
 public:
  using LogicError::LogicError;
};

class SortMismatch : public LogicError {
 public:
  using LogicError::LogicError;
};

class UnsupportedNesting : public LogicError {
 public:
  using LogicError::LogicError;
};

enum class SymbolKind : std::uint8_t { Individual, Propositional, Array };

struct Symbol {
  std::string name;
  int primes = 0;
  SymbolKind kind = SymbolKind::Individual;

  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;

  static Symbol individual(std::string n, int p = 0) { return {std::move(n), p, SymbolKind::Individual}; }
  static Symbol prop(std::string n, int p = 0) { return {std::move(n), p, SymbolKind::Propositional}; }
  static Symbol array(std::string n, int p = 0) { return {std::move(n), p, SymbolKind::Array}; }

  Symbol shifted(int i) const {
    if (primes + i < 0) {
      throw NegativeShiftInfeasible("cannot remove " + std::to_string(-i) + " primes from " + str());
    }
    return {name, primes + i, kind};
  }

  std::string str() const { return name + std::string(static_cast<std::size_t>(primes), '\''); }
};

/// A leaf of the arithmetic vocabulary: an individual symbol, a
/// propositional symbol, or an opaque array read `a[i]`. Reads never nest;
/// the read `a[i]` at time t is a'..'[i'..'] with t primes on both parts.
struct Var {
  Symbol sym;
  std::optional<Symbol> index;

  auto operator<=>(const Var&) const = default;
  bool operator==(const Var&) const = default;

  static Var individual(std::string n, int p = 0) { return {Symbol::individual(std::move(n), p), std::nullopt}; }
  static Var of(Symbol s) { return {std::move(s), std::nullopt}; }
  static Var read(Symbol arr, Symbol idx) {
    if (arr.kind != SymbolKind::Array || idx.kind != SymbolKind::Individual) {
      throw SortMismatch("array read needs an array symbol and an individual index");
    }
    return {std::move(arr), std::move(idx)};
  }

  bool is_read() const { return index.has_value(); }

  Var shifted(int i) const {
    Var v{sym.shifted(i), std::nullopt};
    if (index) v.index = index->shifted(i);
    return v;
  }

  /// Common prime count of the symbols this leaf is built from.
  int primes() const { return index ? std::min(sym.primes, index->primes) : sym.primes; }
  int max_primes() const { return index ? std::max(sym.primes, index->primes) : sym.primes; }

  std::string str() const {
    if (!index) return sym.str();
    return sym.str() + "[" + index->str() + "]";
  }
};

/// Linear combination Σ c_i·v_i + k with exact coefficients; zero
/// coefficients are never stored.
class LinTerm {
 public:
  LinTerm() = default;
  explicit LinTerm(Rational c) : constant_(std::move(c)) {}
  explicit LinTerm(const Var& v, Rational c = 1) { add(v, c); }

  static LinTerm constant(Rational c) { return LinTerm(std::move(c)); }

  const std::map<Var, Rational>& coeffs() const { return coeffs_; }
  const Rational& constant_part() const { return constant_; }
  bool is_constant() const { return coeffs_.empty(); }

  /// Returns the variable if this term is exactly `1·v`.
  std::optional<Var> as_plain_var() const {
    if (constant_ != 0 || coeffs_.size() != 1) return std::nullopt;
    const auto& [v, c] = *coeffs_.begin();
    if (c != 1) return std::nullopt;
    return v;
  }

  void add(const Var& v, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = coeffs_.try_emplace(v, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }
  void add_constant(const Rational& c) { constant_ += c; }

  LinTerm& operator+=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, c);
    constant_ += o.constant_;
    return *this;
  }
  LinTerm& operator-=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, -c);
    constant_ -= o.constant_;
    return *this;
  }
  LinTerm& operator*=(const Rational& k) {
    if (k == 0) {
      coeffs_.clear();
      constant_ = 0;
      return *this;
    }
    for (auto& [v, c] : coeffs_) c *= k;
    constant_ *= k;
    return *this;
  }
  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
  friend LinTerm operator*(LinTerm a, const Rational& k) { return a *= k; }
  friend LinTerm operator*(const Rational& k, LinTerm a) { return a *= k; }
  LinTerm operator-() const { return *this * Rational(-1); }

  bool operator==(const LinTerm& o) const { return constant_ == o.constant_ && coeffs_ == o.coeffs_; }
  bool operator<(const LinTerm& o) const {
    if (coeffs_ != o.coeffs_) return coeffs_ < o.coeffs_;
    return constant_ < o.constant_;
  }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [v, c] : coeffs_) {
      Rational a = c;
      if (first) {
        if (a < 0) {
          os << "-";
          a = -a;
        }
      } else {
        os << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      }
      if (a != 1) os << a.get_str() << "*";
      os << v.str();
      first = false;
    }
    if (first) {
      os << constant_.get_str();
    } else if (constant_ != 0) {
      os << (constant_ < 0 ? " - " : " + ") << Rational(abs(constant_)).get_str();
    }
    return os.str();
  }

 private:
  std::map<Var, Rational> coeffs_;
  Rational constant_ = 0;
};

enum class RelOp : std::uint8_t { Le, Lt, Ge, Gt, Eq, Ne };

inline const char* to_string(RelOp op) {
  switch (op) {
    case RelOp::Le: return "<=";
    case RelOp::Lt: return "<";
    case RelOp::Ge: return ">=";
    case RelOp::Gt: return ">";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "?";
}

inline RelOp negate(RelOp op) {
  switch (op) {
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Ge: return RelOp::Lt;
    case RelOp::Gt: return RelOp::Le;
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
  }
  return op;
}

inline RelOp mirror(RelOp op) {
  switch (op) {
    case RelOp::Le: return RelOp::Ge;
    case RelOp::Lt: return RelOp::Gt;
    case RelOp::Ge: return RelOp::Le;
    case RelOp::Gt: return RelOp::Lt;
    default: return op;
  }
}

inline bool holds(RelOp op, const Rational& lhs, const Rational& rhs) {
  switch (op) {
    case RelOp::Le: return lhs <= rhs;
    case RelOp::Lt: return lhs < rhs;
    case RelOp::Ge: return lhs >= rhs;
    case RelOp::Gt: return lhs > rhs;
    case RelOp::Eq: return lhs == rhs;
    case RelOp::Ne: return lhs != rhs;
  }
  return false;
}

/// Normalized relation `lhs op rhs`: lhs has no constant part, at least one
/// variable, and leading coefficient exactly 1.
struct Relation {
  LinTerm lhs;
  RelOp op = RelOp::Le;
  Rational rhs = 0;

  bool operator==(const Relation& o) const { return op == o.op && rhs == o.rhs && lhs == o.lhs; }
  bool operator<(const Relation& o) const {
    if (!(lhs == o.lhs)) return lhs < o.lhs;
    if (op != o.op) return op < o.op;
    return rhs < o.rhs;
  }
};

struct Atom {
  std::variant<Relation, Symbol> value;

  bool is_prop() const { return std::holds_alternative<Symbol>(value); }
  const Symbol& prop() const { return std::get<Symbol>(value); }
  const Relation& rel() const { return std::get<Relation>(value); }

  bool operator==(const Atom& o) const { return value == o.value; }
  bool operator<(const Atom& o) const {
    if (value.index() != o.value.index()) return value.index() < o.value.index();
    if (is_prop()) return prop() < o.prop();
    return rel() < o.rel();
  }

  std::string str() const {
    if (is_prop()) return prop().str();
    const auto& r = rel();
    return r.lhs.str() + " " + to_string(r.op) + " " + r.rhs.get_str();
  }
};

enum class FormulaKind : std::uint8_t { True, False, Atom, Not, And, Or, Implies };

class Formula;

struct FormulaNode {
  FormulaKind kind;
  std::optional<Atom> atom;
  std::vector<Formula> kids;
};

class Formula {
 public:
  Formula() : node_(truth().node_) {}

  static const Formula& truth() {
    static const Formula t(std::make_shared<FormulaNode>(FormulaNode{FormulaKind::True, std::nullopt, {}}));
    return t;
  }
  static const Formula& falsity() {
    static const Formula f(std::make_shared<FormulaNode>(FormulaNode{FormulaKind::False, std::nullopt, {}}));
    return f;
  }
  static Formula make(FormulaKind k, std::vector<Formula> kids) {
    return Formula(std::make_shared<FormulaNode>(FormulaNode{k, std::nullopt, std::move(kids)}));
  }
  static Formula make_atom(Atom a) {
    return Formula(std::make_shared<FormulaNode>(FormulaNode{FormulaKind::Atom, std::move(a), {}}));
  }

  FormulaKind kind() const { return node_->kind; }
  bool is_true() const { return kind() == FormulaKind::True; }
  bool is_false() const { return kind() == FormulaKind::False; }
  bool is_atom() const { return kind() == FormulaKind::Atom; }
  const Atom& atom() const { return *node_->atom; }
  const std::vector<Formula>& kids() const { return node_->kids; }
  const FormulaNode* id() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    if (a.is_atom()) return a.atom() == b.atom();
    return a.kids() == b.kids();
  }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

// ---------------------------------------------------------------------------
// Constructors with light simplification (constant folding, flattening).

inline Formula mk_true() { return Formula::truth(); }
inline Formula mk_false() { return Formula::falsity(); }
inline Formula mk_bool(bool b) { return b ? mk_true() : mk_false(); }

inline Formula mk_prop(const Symbol& s) {
  if (s.kind != SymbolKind::Propositional) throw SortMismatch("not a propositional symbol: " + s.str());
  return Formula::make_atom(Atom{s});
}

/// Builds `lhs op rhs`, normalizing to `Σ c·v op k` with leading coefficient
/// 1. Variable-free relations fold to True/False.
inline Formula mk_rel(const LinTerm& lhs, RelOp op, const LinTerm& rhs) {
  LinTerm diff = lhs - rhs;
  Rational k = -diff.constant_part();
  LinTerm t;
  for (const auto& [v, c] : diff.coeffs()) t.add(v, c);
  if (t.is_constant()) return mk_bool(holds(op, Rational(0), k));
  Rational lead = t.coeffs().begin()->second;
  if (lead != 1) {
    Rational inv = 1 / lead;
    t *= inv;
    k *= inv;
    if (lead < 0) op = mirror(op);
  }
  return Formula::make_atom(Atom{Relation{std::move(t), op, std::move(k)}});
}

inline Formula mk_rel(const Relation& r) { return mk_rel(r.lhs, r.op, LinTerm(r.rhs)); }

inline Formula mk_not(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::True: return mk_false();
    case FormulaKind::False: return mk_true();
    case FormulaKind::Not: return f.kids()[0];
    default: return Formula::make(FormulaKind::Not, {f});
  }
}

namespace detail {
inline Formula mk_nary(FormulaKind k, const std::vector<Formula>& in) {
  const bool is_and = k == FormulaKind::And;
  std::vector<Formula> out;
  out.reserve(in.size());
  std::set<const FormulaNode*> seen;
  auto push = [&](const Formula& f) {
    if (seen.insert(f.id()).second) out.push_back(f);
  };
  for (const auto& f : in) {
    if (f.is_true()) {
      if (is_and) continue;
      return mk_true();
    }
    if (f.is_false()) {
      if (!is_and) continue;
      return mk_false();
    }
    if (f.kind() == k) {
      for (const auto& g : f.kids()) push(g);
    } else {
      push(f);
    }
  }
  if (out.empty()) return mk_bool(is_and);
  if (out.size() == 1) return out[0];
  return Formula::make(k, std::move(out));
}
}  // namespace detail

inline Formula mk_and(const std::vector<Formula>& fs) { return detail::mk_nary(FormulaKind::And, fs); }
inline Formula mk_or(const std::vector<Formula>& fs) { return detail::mk_nary(FormulaKind::Or, fs); }
inline Formula mk_and(const Formula& a, const Formula& b) { return mk_and(std::vector<Formula>{a, b}); }
inline Formula mk_or(const Formula& a, const Formula& b) { return mk_or(std::vector<Formula>{a, b}); }

inline Formula mk_implies(const Formula& a, const Formula& b) {
  if (a.is_false() || b.is_true()) return mk_true();
  if (a.is_true()) return b;
  if (b.is_false()) return mk_not(a);
  return Formula::make(FormulaKind::Implies, {a, b});
}

inline Formula mk_iff(const Formula& a, const Formula& b) {
  if (a == b) return mk_true();
  return mk_and(mk_implies(a, b), mk_implies(b, a));
}

inline Formula mk_eq(const LinTerm& a, const LinTerm& b) { return mk_rel(a, RelOp::Eq, b); }

// ---------------------------------------------------------------------------
// Traversals.

/// Rebuilds `f` with each atom replaced by `fn(atom)`; shared subformulas
/// are rewritten once.
inline Formula map_atoms(const Formula& f, const std::function<Formula(const Atom&)>& fn) {
  std::unordered_map<const FormulaNode*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula r;
    switch (g.kind()) {
      case FormulaKind::True:
      case FormulaKind::False: r = g; break;
      case FormulaKind::Atom: r = fn(g.atom()); break;
      case FormulaKind::Not: r = mk_not(go(g.kids()[0])); break;
      case FormulaKind::Implies: r = mk_implies(go(g.kids()[0]), go(g.kids()[1])); break;
      case FormulaKind::And:
      case FormulaKind::Or: {
        std::vector<Formula> ks;
        ks.reserve(g.kids().size());
        for (const auto& k : g.kids()) ks.push_back(go(k));
        r = g.kind() == FormulaKind::And ? mk_and(ks) : mk_or(ks);
        break;
      }
    }
    memo.emplace(g.id(), r);
    return r;
  };
  return go(f);
}

inline void for_each_atom(const Formula& f, const std::function<void(const Atom&)>& fn) {
  std::set<const FormulaNode*> seen;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g.id()).second) continue;
    if (g.is_atom()) {
      fn(g.atom());
    } else {
      for (const auto& k : g.kids()) stack.push_back(k);
    }
  }
}

/// Distinct atoms in first-occurrence (depth-first, left to right) order.
inline std::vector<Atom> atoms_of(const Formula& f) {
  std::vector<Atom> out;
  std::set<Atom> seen;
  std::set<const FormulaNode*> visited;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (!visited.insert(g.id()).second) return;
    if (g.is_atom()) {
      if (seen.insert(g.atom()).second) out.push_back(g.atom());
      return;
    }
    for (const auto& k : g.kids()) go(k);
  };
  go(f);
  return out;
}

/// The leaf vocabulary: individual and propositional symbols plus opaque
/// read pseudo-symbols.
inline std::set<Var> symbols(const Formula& f) {
  std::set<Var> out;
  for_each_atom(f, [&](const Atom& a) {
    if (a.is_prop()) {
      out.insert(Var::of(a.prop()));
    } else {
      for (const auto& [v, c] : a.rel().lhs.coeffs()) out.insert(v);
    }
  });
  return out;
}

/// Underlying uninterpreted symbols, with array reads split into the array
/// and index symbol.
inline std::set<Symbol> base_symbols(const Formula& f) {
  std::set<Symbol> out;
  for (const auto& v : symbols(f)) {
    out.insert(v.sym);
    if (v.index) out.insert(*v.index);
  }
  return out;
}

inline bool is_state_formula(const Formula& f) {
  for (const auto& s : base_symbols(f)) {
    if (s.primes != 0) return false;
  }
  return true;
}

inline bool is_transition_formula(const Formula& f) {
  for (const auto& s : base_symbols(f)) {
    if (s.primes > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Priming, substitution, hiding.

inline Formula replace_vars(const Formula& f, const std::function<LinTerm(const Var&)>& term_of,
                            const std::function<Symbol(const Symbol&)>& prop_of) {
  return map_atoms(f, [&](const Atom& a) -> Formula {
    if (a.is_prop()) return mk_prop(prop_of(a.prop()));
    const auto& r = a.rel();
    LinTerm t;
    for (const auto& [v, c] : r.lhs.coeffs()) t += term_of(v) * c;
    return mk_rel(t, r.op, LinTerm(r.rhs));
  });
}

/// Adds `i` primes (removes `-i` when negative) to every uninterpreted symbol.
inline Formula prime_shift(const Formula& f, int i) {
  if (i == 0) return f;
  return replace_vars(
      f, [i](const Var& v) { return LinTerm(v.shifted(i)); },
      [i](const Symbol& s) { return s.shifted(i); });
}

inline LinTerm prime_shift(const LinTerm& t, int i) {
  LinTerm out(t.constant_part());
  for (const auto& [v, c] : t.coeffs()) out.add(v.shifted(i), c);
  return out;
}

inline LinTerm substitute(const LinTerm& t, const std::map<Symbol, LinTerm>& m) {
  LinTerm out(t.constant_part());
  for (const auto& [v, c] : t.coeffs()) {
    if (v.is_read()) {
      auto it = m.find(*v.index);
      if (it == m.end()) {
        out.add(v, c);
        continue;
      }
      auto plain = it->second.as_plain_var();
      if (!plain || plain->is_read()) {
        throw UnsupportedNesting("read index " + v.index->str() + " replaced by non-symbol " + it->second.str());
      }
      out.add(Var::read(v.sym, plain->sym), c);
      continue;
    }
    auto it = m.find(v.sym);
    if (it == m.end()) {
      out.add(v, c);
    } else {
      out += it->second * c;
    }
  }
  return out;
}

/// Simultaneous substitution of individual symbols by terms.
inline Formula substitute(const Formula& f, const std::map<Symbol, LinTerm>& m) {
  for (const auto& [s, t] : m) {
    if (s.kind != SymbolKind::Individual) throw SortMismatch("substitution key is not individual: " + s.str());
  }
  if (m.empty()) return f;
  return map_atoms(f, [&](const Atom& a) -> Formula {
    if (a.is_prop()) return Formula::make_atom(a);
    const auto& r = a.rel();
    return mk_rel(substitute(r.lhs, m), r.op, LinTerm(r.rhs));
  });
}

/// Simultaneous substitution of whole leaves (including reads) by terms.
inline Formula substitute_vars(const Formula& f, const std::map<Var, LinTerm>& m) {
  if (m.empty()) return f;
  return replace_vars(
      f,
      [&](const Var& v) {
        auto it = m.find(v);
        return it == m.end() ? LinTerm(v) : it->second;
      },
      [](const Symbol& s) { return s; });
}

/// Supplies globally fresh names; owned by one verification instance.
class FreshNames {
 public:
  Symbol fresh(const Symbol& like) {
    return Symbol{like.name + kReservedSeparator + std::to_string(++counter_), 0, like.kind};
  }
  std::uint64_t issued() const { return counter_; }

 private:
  std::uint64_t counter_ = 0;
};

/// Renames every uninterpreted symbol outside `keep` to a fresh symbol.
inline Formula hide_symbols(const Formula& f, const std::set<Symbol>& keep, FreshNames& fresh) {
  std::map<Symbol, Symbol> ren;
  for (const auto& s : base_symbols(f)) {
    if (!keep.contains(s)) ren.emplace(s, fresh.fresh(s));
  }
  if (ren.empty()) return f;
  auto rn = [&](const Symbol& s) {
    auto it = ren.find(s);
    return it == ren.end() ? s : it->second;
  };
  return replace_vars(
      f,
      [&](const Var& v) {
        Var w{rn(v.sym), std::nullopt};
        if (v.index) w.index = rn(*v.index);
        return LinTerm(w);
      },
      rn);
}

// ---------------------------------------------------------------------------
// Evaluation.

struct Model {
  std::map<Var, Rational> values;
  std::map<Symbol, bool> props;

  Rational value(const Var& v) const {
    auto it = values.find(v);
    return it == values.end() ? Rational(0) : it->second;
  }
  bool prop(const Symbol& s) const {
    auto it = props.find(s);
    return it != props.end() && it->second;
  }
};

inline Rational evaluate(const LinTerm& t, const Model& m) {
  Rational r = t.constant_part();
  for (const auto& [v, c] : t.coeffs()) r += c * m.value(v);
  return r;
}

inline bool evaluate(const Atom& a, const Model& m) {
  if (a.is_prop()) return m.prop(a.prop());
  const auto& r = a.rel();
  return holds(r.op, evaluate(r.lhs, m), r.rhs);
}

inline bool evaluate(const Formula& f, const Model& m) {
  switch (f.kind()) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Atom: return evaluate(f.atom(), m);
    case FormulaKind::Not: return !evaluate(f.kids()[0], m);
    case FormulaKind::Implies: return !evaluate(f.kids()[0], m) || evaluate(f.kids()[1], m);
    case FormulaKind::And:
      for (const auto& k : f.kids()) {
        if (!evaluate(k, m)) return false;
      }
      return true;
    case FormulaKind::Or:
      for (const auto& k : f.kids()) {
        if (evaluate(k, m)) return true;
      }
      return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing and shape queries.

inline std::string to_string(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Atom: return f.atom().str();
    case FormulaKind::Not: return "!(" + to_string(f.kids()[0]) + ")";
    case FormulaKind::Implies: return "(" + to_string(f.kids()[0]) + " => " + to_string(f.kids()[1]) + ")";
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::string sep = f.kind() == FormulaKind::And ? " && " : " || ";
      std::string s = "(";
      for (std::size_t i = 0; i < f.kids().size(); ++i) {
        if (i) s += sep;
        s += to_string(f.kids()[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << to_string(f); }

/// Number of distinct nodes in the formula DAG.
inline std::size_t dag_size(const Formula& f) {
  std::set<const FormulaNode*> seen;
  std::vector<Formula> st{f};
  while (!st.empty()) {
    Formula g = st.back();
    st.pop_back();
    if (!seen.insert(g.id()).second) continue;
    for (const auto& k : g.kids()) st.push_back(k);
  }
  return seen.size();
}

namespace detail {
inline bool is_literal(const Formula& f) {
  return f.is_atom() || (f.kind() == FormulaKind::Not && f.kids()[0].is_atom());
}
inline bool is_clause(const Formula& f) {
  if (is_literal(f) || f.is_true() || f.is_false()) return true;
  if (f.kind() == FormulaKind::Implies) {
    return is_literal(f.kids()[0]) && is_clause(f.kids()[1]);
  }
  if (f.kind() != FormulaKind::Or) return false;
  for (const auto& k : f.kids()) {
    if (!is_clause(k)) return false;
  }
  return true;
}
}  // namespace detail

/// Conjunction of disjunctions of literals (an implication `l => c` counts
/// as the clause `!l || c`).
inline bool is_cnf(const Formula& f) {
  if (f.kind() == FormulaKind::And) {
    for (const auto& k : f.kids()) {
      if (!is_cnf(k)) return false;
    }
    return true;
  }
  return detail::is_clause(f);
}

}  // namespace itpa
