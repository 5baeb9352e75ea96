#pragma once

// Structural CNF over a Boolean variable space shared by all partitions of
// one refutation problem. Theory atoms are stored as relations with
// operator <=, < or ==; the other operators are literals over those.

#include "itpa/logic.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

namespace itpa {

using BoolVar = int;
using Lit = int;

inline Lit mk_lit(BoolVar v, bool neg = false) { return 2 * v + (neg ? 1 : 0); }
inline BoolVar lit_var(Lit l) { return l >> 1; }
inline bool lit_neg(Lit l) { return (l & 1) != 0; }
inline Lit lit_not(Lit l) { return l ^ 1; }

using Clause = std::vector<Lit>;

/// Sorts and deduplicates; returns false for a tautology.
inline bool normalize_clause(Clause& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] == lit_not(c[i - 1])) return false;
  }
  return true;
}

inline bool clause_has(const Clause& c, Lit l) { return std::binary_search(c.begin(), c.end(), l); }

enum class VarKind : std::uint8_t { Theory, Prop, Aux };

struct VarInfo {
  VarKind kind = VarKind::Aux;
  Relation rel;  // Theory
  Symbol prop;   // Prop
  int partition = -1;  // Aux: the formula that introduced it
};

class AtomTable {
 public:
  BoolVar theory_var(const Relation& r) {
    auto it = theory_.find(r);
    if (it != theory_.end()) return it->second;
    BoolVar v = static_cast<BoolVar>(info_.size());
    info_.push_back(VarInfo{VarKind::Theory, r, {}, -1});
    theory_.emplace(r, v);
    return v;
  }
  BoolVar prop_var(const Symbol& s) {
    auto it = props_.find(s);
    if (it != props_.end()) return it->second;
    BoolVar v = static_cast<BoolVar>(info_.size());
    info_.push_back(VarInfo{VarKind::Prop, {}, s, -1});
    props_.emplace(s, v);
    return v;
  }
  BoolVar aux_var(int partition) {
    BoolVar v = static_cast<BoolVar>(info_.size());
    info_.push_back(VarInfo{VarKind::Aux, {}, {}, partition});
    return v;
  }

  std::size_t size() const { return info_.size(); }
  const VarInfo& info(BoolVar v) const { return info_.at(static_cast<std::size_t>(v)); }

  std::optional<BoolVar> find_prop(const Symbol& s) const {
    auto it = props_.find(s);
    if (it == props_.end()) return std::nullopt;
    return it->second;
  }

  /// The atom a non-auxiliary variable stands for.
  Formula atom_formula(BoolVar v) const {
    const auto& in = info(v);
    if (in.kind == VarKind::Prop) return mk_prop(in.prop);
    if (in.kind == VarKind::Theory) return Formula::make_atom(Atom{in.rel});
    throw LogicError("auxiliary variable has no atom");
  }

  Formula lit_formula(Lit l) const {
    Formula a = atom_formula(lit_var(l));
    return lit_neg(l) ? mk_not(a) : a;
  }

  /// Maps a relation with any operator to a literal over stored atoms.
  /// Disequalities are not literals; callers expand them first.
  Lit relation_lit(const Relation& r) {
    Relation base{r.lhs, r.op, r.rhs};
    switch (r.op) {
      case RelOp::Le:
      case RelOp::Lt:
      case RelOp::Eq: return mk_lit(theory_var(base));
      case RelOp::Ge: base.op = RelOp::Lt; return mk_lit(theory_var(base), true);
      case RelOp::Gt: base.op = RelOp::Le; return mk_lit(theory_var(base), true);
      case RelOp::Ne: break;
    }
    throw LogicError("disequality is not a literal");
  }

 private:
  std::vector<VarInfo> info_;
  std::map<Relation, BoolVar> theory_;
  std::map<Symbol, BoolVar> props_;
};

struct CnfResult {
  std::vector<Clause> clauses;
  std::set<BoolVar> aux_vars;
};

namespace detail {

/// Negation normal form: And/Or over positive relation atoms (never Ne) and
/// possibly negated propositional atoms.
class Nnf {
 public:
  Formula run(const Formula& f, bool neg) {
    auto key = std::make_pair(f.id(), neg);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Formula r = compute(f, neg);
    memo_.emplace(key, r);
    return r;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<const FormulaNode*, bool>& k) const {
      return std::hash<const void*>()(k.first) * 2 + (k.second ? 1 : 0);
    }
  };

  Formula compute(const Formula& f, bool neg) {
    switch (f.kind()) {
      case FormulaKind::True: return mk_bool(!neg);
      case FormulaKind::False: return mk_bool(neg);
      case FormulaKind::Not: return run(f.kids()[0], !neg);
      case FormulaKind::Implies: {
        Formula a = run(f.kids()[0], !neg);
        Formula b = run(f.kids()[1], neg);
        return neg ? mk_and(a, b) : mk_or(a, b);
      }
      case FormulaKind::And:
      case FormulaKind::Or: {
        std::vector<Formula> ks;
        for (const auto& k : f.kids()) ks.push_back(run(k, neg));
        bool conj = (f.kind() == FormulaKind::And) != neg;
        return conj ? mk_and(ks) : mk_or(ks);
      }
      case FormulaKind::Atom: {
        const Atom& a = f.atom();
        if (a.is_prop()) return neg ? mk_not(f) : f;
        Relation r = a.rel();
        if (neg) r.op = negate(r.op);
        if (r.op == RelOp::Ne) {
          Relation lt = r, gt = r;
          lt.op = RelOp::Lt;
          gt.op = RelOp::Gt;
          return mk_or(Formula::make_atom(Atom{lt}), Formula::make_atom(Atom{gt}));
        }
        return Formula::make_atom(Atom{r});
      }
    }
    return f;
  }

  std::unordered_map<std::pair<const FormulaNode*, bool>, Formula, KeyHash> memo_;
};

class CnfBuilder {
 public:
  CnfBuilder(AtomTable& t, int partition) : table_(t), partition_(partition) {}

  void top(const Formula& f) {
    if (f.is_true()) return;
    if (f.is_false()) {
      out_.clauses.push_back({});
      return;
    }
    if (f.kind() == FormulaKind::And) {
      for (const auto& k : f.kids()) top(k);
      return;
    }
    if (f.kind() == FormulaKind::Or) {
      Clause c;
      for (const auto& k : f.kids()) c.push_back(def(k));
      emit(std::move(c));
      return;
    }
    emit({literal(f)});
  }

  CnfResult take() { return std::move(out_); }

 private:
  static bool is_lit(const Formula& f) {
    return f.is_atom() || (f.kind() == FormulaKind::Not && f.kids()[0].is_atom());
  }

  Lit literal(const Formula& f) {
    if (f.kind() == FormulaKind::Not) return lit_not(literal(f.kids()[0]));
    const Atom& a = f.atom();
    if (a.is_prop()) return mk_lit(table_.prop_var(a.prop()));
    return table_.relation_lit(a.rel());
  }

  // A literal that implies f (one-sided definition).
  Lit def(const Formula& f) {
    if (is_lit(f)) return literal(f);
    if (auto it = defs_.find(f.id()); it != defs_.end()) return it->second;
    BoolVar a = table_.aux_var(partition_);
    out_.aux_vars.insert(a);
    Lit al = mk_lit(a);
    if (f.kind() == FormulaKind::Or) {
      Clause c{lit_not(al)};
      for (const auto& k : f.kids()) c.push_back(def(k));
      emit(std::move(c));
    } else {
      for (const auto& k : f.kids()) emit({lit_not(al), def(k)});
    }
    defs_.emplace(f.id(), al);
    return al;
  }

  void emit(Clause c) {
    if (normalize_clause(c)) out_.clauses.push_back(std::move(c));
  }

  AtomTable& table_;
  int partition_;
  CnfResult out_;
  std::unordered_map<const FormulaNode*, Lit> defs_;
};

}  // namespace detail

inline Formula to_nnf(const Formula& f) { return detail::Nnf().run(f, false); }

/// Equisatisfiable clauses for `f`; auxiliary variables are tagged with
/// `partition` and appear in no other call's output.
inline CnfResult to_cnf(const Formula& f, AtomTable& table, int partition = 0) {
  detail::CnfBuilder b(table, partition);
  b.top(to_nnf(f));
  return b.take();
}

}  // namespace itpa
