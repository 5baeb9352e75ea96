#pragma once

// Reduced ordered decision diagrams over numbered Boolean variables.
// Variable 2k is predicate symbol k, variable 2k+1 its primed copy.

#include "itpa/logic.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

namespace itpa {

using BddVar = std::uint32_t;

class BddManager;

/// Handle into a manager's node table; 0 is false, 1 is true.
struct Bdd {
  std::uint32_t id = 0;
  bool operator==(const Bdd&) const = default;
  bool is_false() const { return id == 0; }
  bool is_true() const { return id == 1; }
};

class BddManager {
 public:
  static constexpr BddVar kTerminal = std::numeric_limits<BddVar>::max();

  BddManager() {
    nodes_.push_back({kTerminal, 0, 0});
    nodes_.push_back({kTerminal, 1, 1});
  }

  Bdd zero() const { return {0}; }
  Bdd one() const { return {1}; }
  Bdd constant(bool b) const { return {b ? 1u : 0u}; }

  Bdd var(BddVar v) { return node(v, zero(), one()); }
  Bdd nvar(BddVar v) { return node(v, one(), zero()); }

  BddVar top(Bdd f) const { return nodes_[f.id].var; }
  Bdd low(Bdd f) const { return {nodes_[f.id].lo}; }
  Bdd high(Bdd f) const { return {nodes_[f.id].hi}; }

  Bdd ite(Bdd f, Bdd g, Bdd h) {
    if (f.is_true()) return g;
    if (f.is_false()) return h;
    if (g == h) return g;
    if (g.is_true() && h.is_false()) return f;
    Key k{f.id, g.id, h.id};
    if (auto it = ite_cache_.find(k); it != ite_cache_.end()) return {it->second};
    BddVar v = std::min({top(f), top(g), top(h)});
    Bdd r = node(v, ite(cof(f, v, false), cof(g, v, false), cof(h, v, false)),
                 ite(cof(f, v, true), cof(g, v, true), cof(h, v, true)));
    ite_cache_.emplace(k, r.id);
    return r;
  }

  Bdd neg(Bdd f) { return ite(f, zero(), one()); }
  Bdd conj(Bdd f, Bdd g) { return ite(f, g, zero()); }
  Bdd disj(Bdd f, Bdd g) { return ite(f, one(), g); }
  Bdd iff(Bdd f, Bdd g) { return ite(f, g, neg(g)); }
  bool implies(Bdd f, Bdd g) { return conj(f, neg(g)).is_false(); }

  /// Existential quantification of every variable satisfying `pred`.
  Bdd exists(Bdd f, const std::function<bool(BddVar)>& pred) {
    std::unordered_map<std::uint32_t, std::uint32_t> memo;
    std::function<Bdd(Bdd)> go = [&](Bdd g) -> Bdd {
      if (g.id <= 1) return g;
      if (auto it = memo.find(g.id); it != memo.end()) return {it->second};
      BddVar v = top(g);
      Bdd lo = go(low(g)), hi = go(high(g));
      Bdd r = pred(v) ? disj(lo, hi) : node(v, lo, hi);
      memo.emplace(g.id, r.id);
      return r;
    };
    return go(f);
  }

  /// Renames variables through an order-preserving map.
  Bdd rename(Bdd f, const std::function<BddVar(BddVar)>& to) {
    std::unordered_map<std::uint32_t, std::uint32_t> memo;
    std::function<Bdd(Bdd)> go = [&](Bdd g) -> Bdd {
      if (g.id <= 1) return g;
      if (auto it = memo.find(g.id); it != memo.end()) return {it->second};
      Bdd r = ite(var(to(top(g))), go(high(g)), go(low(g)));
      memo.emplace(g.id, r.id);
      return r;
    };
    return go(f);
  }

  /// Least satisfying assignment to `vars` (false before true, earlier
  /// variables most significant). Empty optional when f is false.
  std::optional<std::vector<bool>> least_minterm(Bdd f, const std::vector<BddVar>& vars) {
    if (f.is_false()) return std::nullopt;
    std::vector<bool> out;
    Bdd g = f;
    for (BddVar v : vars) {
      Bdd lo = restrict(g, v, false);
      if (!lo.is_false()) {
        out.push_back(false);
        g = lo;
      } else {
        out.push_back(true);
        g = restrict(g, v, true);
      }
    }
    return out;
  }

  Bdd restrict(Bdd f, BddVar v, bool val) {
    std::unordered_map<std::uint32_t, std::uint32_t> memo;
    std::function<Bdd(Bdd)> go = [&](Bdd g) -> Bdd {
      if (g.id <= 1 || top(g) > v) return g;
      if (top(g) == v) return val ? high(g) : low(g);
      if (auto it = memo.find(g.id); it != memo.end()) return {it->second};
      Bdd r = node(top(g), go(low(g)), go(high(g)));
      memo.emplace(g.id, r.id);
      return r;
    };
    return go(f);
  }

  /// Cube over the given assignment.
  Bdd cube(const std::vector<BddVar>& vars, const std::vector<bool>& vals) {
    Bdd r = one();
    for (std::size_t i = vars.size(); i-- > 0;) r = conj(vals[i] ? var(vars[i]) : nvar(vars[i]), r);
    return r;
  }

  bool eval(Bdd f, const std::function<bool(BddVar)>& val) const {
    while (f.id > 1) f = val(top(f)) ? high(f) : low(f);
    return f.is_true();
  }

  /// Satisfying assignments over variables 0..nvars-1.
  double sat_count(Bdd f, BddVar nvars) const {
    std::unordered_map<std::uint32_t, double> memo;
    std::function<double(Bdd, BddVar)> go = [&](Bdd g, BddVar level) -> double {
      BddVar t = g.id <= 1 ? nvars : top(g);
      double scale = std::ldexp(1.0, static_cast<int>(t - level));
      if (g.id <= 1) return g.is_true() ? scale : 0.0;
      double below;
      if (auto it = memo.find(g.id); it != memo.end()) {
        below = it->second;
      } else {
        below = go(low(g), t + 1) + go(high(g), t + 1);
        memo.emplace(g.id, below);
      }
      return scale * below;
    };
    return go(f, 0);
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    BddVar var;
    std::uint32_t lo, hi;
  };
  struct Key {
    std::uint32_t a, b, c;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.a;
      h = h * 0x9E3779B97F4A7C15ull + k.b;
      h = h * 0x9E3779B97F4A7C15ull + k.c;
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  Bdd node(BddVar v, Bdd lo, Bdd hi) {
    if (lo == hi) return lo;
    Key k{v, lo.id, hi.id};
    if (auto it = unique_.find(k); it != unique_.end()) return {it->second};
    nodes_.push_back({v, lo.id, hi.id});
    auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
    unique_.emplace(k, id);
    return {id};
  }

  Bdd cof(Bdd f, BddVar v, bool val) const {
    if (f.id <= 1 || top(f) != v) return f;
    return val ? high(f) : low(f);
  }

  std::vector<Node> nodes_;
  std::unordered_map<Key, std::uint32_t, KeyHash> unique_;
  std::unordered_map<Key, std::uint32_t, KeyHash> ite_cache_;
};

/// Maps propositional symbols to decision-diagram variables and back.
struct BddVocabulary {
  std::function<std::optional<BddVar>(const Symbol&)> var_of;
  std::function<Symbol(BddVar)> symbol_of;
};

class NotPropositional : public LogicError {
 public:
  using LogicError::LogicError;
};

inline Bdd to_bdd(BddManager& m, const Formula& f, const BddVocabulary& voc) {
  std::unordered_map<const FormulaNode*, Bdd> memo;
  std::function<Bdd(const Formula&)> go = [&](const Formula& g) -> Bdd {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Bdd r;
    switch (g.kind()) {
      case FormulaKind::True: r = m.one(); break;
      case FormulaKind::False: r = m.zero(); break;
      case FormulaKind::Atom: {
        if (!g.atom().is_prop()) throw NotPropositional("theory atom " + g.atom().str());
        auto v = voc.var_of(g.atom().prop());
        if (!v) throw NotPropositional("unmapped symbol " + g.atom().prop().str());
        r = m.var(*v);
        break;
      }
      case FormulaKind::Not: r = m.neg(go(g.kids()[0])); break;
      case FormulaKind::And:
        r = m.one();
        for (const auto& k : g.kids()) r = m.conj(r, go(k));
        break;
      case FormulaKind::Or:
        r = m.zero();
        for (const auto& k : g.kids()) r = m.disj(r, go(k));
        break;
      case FormulaKind::Implies: r = m.disj(m.neg(go(g.kids()[0])), go(g.kids()[1])); break;
    }
    memo.emplace(g.id(), r);
    return r;
  };
  return go(f);
}

inline Formula to_formula(BddManager& m, Bdd f, const BddVocabulary& voc) {
  std::unordered_map<std::uint32_t, Formula> memo;
  std::function<Formula(Bdd)> go = [&](Bdd g) -> Formula {
    if (g.is_true()) return mk_true();
    if (g.is_false()) return mk_false();
    if (auto it = memo.find(g.id); it != memo.end()) return it->second;
    Formula v = mk_prop(voc.symbol_of(m.top(g)));
    Formula lo = go(m.low(g)), hi = go(m.high(g));
    Formula r;
    if (lo.is_false()) {
      r = mk_and(v, hi);
    } else if (hi.is_false()) {
      r = mk_and(mk_not(v), lo);
    } else if (hi.is_true()) {
      r = mk_or(v, lo);
    } else if (lo.is_true()) {
      r = mk_or(mk_not(v), hi);
    } else {
      r = mk_or(mk_and(v, hi), mk_and(mk_not(v), lo));
    }
    memo.emplace(g.id, r);
    return r;
  };
  return go(f);
}

}  // namespace itpa
