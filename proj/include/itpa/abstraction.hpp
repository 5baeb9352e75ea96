#pragma once

// Predicate abstraction of program operations in weakest-precondition form.

#include "itpa/program.hpp"
#include "itpa/prover.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace itpa {

class ForeignSymbol : public LogicError {
 public:
  using LogicError::LogicError;
};

class PathFeasible : public std::runtime_error {
 public:
  explicit PathFeasible(Model m) : std::runtime_error("concrete path is feasible"), model(std::move(m)) {}
  Model model;
};

/// Predicates P with their propositional stand-ins v_p, named §p<k>.
class PredicateSet {
 public:
  PredicateSet() = default;
  explicit PredicateSet(const std::vector<Formula>& ps) {
    for (const auto& p : ps) add(p);
  }

  /// Appends p unless already present; returns whether it was new.
  bool add(const Formula& p) {
    if (!is_state_formula(p)) throw LogicError("predicate must be a state formula: " + to_string(p));
    if (p.is_true() || p.is_false() || index_of(p)) return false;
    preds_.push_back(p);
    return true;
  }

  std::size_t size() const { return preds_.size(); }
  const std::vector<Formula>& preds() const { return preds_; }
  const Formula& pred(std::size_t k) const { return preds_.at(k); }

  static Symbol v(std::size_t k, int primes = 0) {
    return Symbol::prop(std::string(kReservedSeparator) + "p" + std::to_string(k), primes);
  }

  /// Index k of a V symbol at prime count 0 or 1, with its prime count.
  static std::optional<std::pair<std::size_t, int>> decode(const Symbol& s) {
    const std::string head = std::string(kReservedSeparator) + "p";
    if (s.kind != SymbolKind::Propositional || s.name.rfind(head, 0) != 0) return std::nullopt;
    std::string digits = s.name.substr(head.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    return std::make_pair(static_cast<std::size_t>(std::stoul(digits)), s.primes);
  }

  bool is_v(const Symbol& s, int primes) const {
    auto d = decode(s);
    return d && d->second == primes && d->first < size();
  }

  std::optional<std::size_t> index_of(const Formula& p) const {
    for (std::size_t k = 0; k < preds_.size(); ++k) {
      if (preds_[k] == p) return k;
    }
    return std::nullopt;
  }

  std::vector<Symbol> vocabulary(int primes = 0) const {
    std::vector<Symbol> out;
    for (std::size_t k = 0; k < size(); ++k) out.push_back(v(k, primes));
    return out;
  }

  /// Predicates written out in place of their symbols, for reports.
  std::string describe(const Formula& f) const;

 private:
  std::vector<Formula> preds_;
};

/// Replaces each v_p by p.
inline Formula gamma(const Formula& phi, const PredicateSet& ps) {
  return map_atoms(phi, [&](const Atom& a) -> Formula {
    if (!a.is_prop() || !ps.is_v(a.prop(), 0)) throw ForeignSymbol("not a predicate symbol: " + a.str());
    return ps.pred(PredicateSet::decode(a.prop())->first);
  });
}

inline std::string PredicateSet::describe(const Formula& f) const {
  std::vector<std::string> names;
  for (const auto& p : preds_) names.push_back(to_string(p));
  Formula g = map_atoms(f, [&](const Atom& a) -> Formula {
    if (a.is_prop()) {
      if (auto d = decode(a.prop()); d && d->first < size()) {
        return mk_prop(Symbol::prop(names[d->first], d->second));
      }
    }
    return Formula::make_atom(a);
  });
  return to_string(g);
}

struct AbstractOp {
  Location entry = 0;
  Location exit = 0;
  std::size_t op = 0;  // index into Program::ops
  Formula t_abs;
};

inline Formula abstract_transition(const Statement& s, const PredicateSet& ps) {
  std::vector<Formula> conj;
  for (std::size_t k = 0; k < ps.size(); ++k) conj.push_back(mk_iff(mk_prop(PredicateSet::v(k)), ps.pred(k)));
  conj.push_back(mk_not(wp(s, mk_false())));
  for (std::size_t k = 0; k < ps.size(); ++k) {
    conj.push_back(mk_iff(mk_prop(PredicateSet::v(k, 1)), wp(s, ps.pred(k))));
  }
  return mk_and(conj);
}

inline AbstractOp abstract_op(const Program& prog, std::size_t op, const PredicateSet& ps) {
  const Operation& o = prog.ops.at(op);
  return {o.entry, o.exit, op, abstract_transition(o.stmt, ps)};
}

inline std::vector<AbstractOp> abstract_program(const Program& prog, const PredicateSet& ps) {
  std::vector<AbstractOp> out;
  for (std::size_t i = 0; i < prog.ops.size(); ++i) out.push_back(abstract_op(prog, i, ps));
  return out;
}

/// Minterm over V as a formula: literal k is v_k or its negation.
inline Formula minterm_formula(const std::vector<bool>& bits, int primes = 0) {
  std::vector<Formula> lits;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    Formula v = mk_prop(PredicateSet::v(k, primes));
    lits.push_back(bits[k] ? v : mk_not(v));
  }
  return mk_and(lits);
}

inline bool abstract_step_feasible(const Formula& s, const AbstractOp& r, const Formula& t) {
  return !is_unsat({mk_and({s, r.t_abs, prime_shift(t, 1)})});
}

/// Strongest cube over V forced in the post-state of r from phi, reported
/// unprimed. One refute call per literal.
inline Formula cartesian_post(const AbstractOp& r, const Formula& phi, const PredicateSet& ps) {
  std::vector<Formula> lits;
  Formula base = mk_and(phi, r.t_abs);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    Formula vp = mk_prop(PredicateSet::v(k, 1));
    bool pos = is_unsat({base, mk_not(vp)});
    bool neg = is_unsat({base, vp});
    if (pos && neg) return mk_false();
    if (pos) lits.push_back(mk_prop(PredicateSet::v(k)));
    if (neg) lits.push_back(mk_not(mk_prop(PredicateSet::v(k))));
  }
  return mk_and(lits);
}

/// Atoms of the per-step interpolants of an infeasible concrete path,
/// moved to time 0, minus those already in ps. A substitute for a real
/// predicate discovery procedure.
inline std::vector<Formula> mine_predicates(const Program& prog, const Path& path, const PredicateSet& ps) {
  auto parts = concrete_path_formula(prog, path, ps.preds());
  if (parts.empty()) throw PathFeasible(Model{});
  auto r = refute(parts);
  if (auto* sat = std::get_if<SatResult>(&r)) throw PathFeasible(sat->model);
  const Refutation& proof = std::get<UnsatResult>(r).proof;
  std::vector<Formula> out;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    // The cut after step i talks about time i+1.
    std::set<int> a_side;
    for (std::size_t j = 0; j <= i; ++j) a_side.insert(static_cast<int>(j));
    Formula itp = interpolant(proof, a_side);
    for (const auto& atom : atoms_of(itp)) {
      if (atom.is_prop()) continue;
      Formula f = Formula::make_atom(atom);
      bool single_time = true;
      for (const auto& v : symbols(f)) {
        if (v.sym.primes != static_cast<int>(i) + 1 || (v.index && v.index->primes != v.sym.primes)) {
          single_time = false;
        }
      }
      if (!single_time) continue;
      Formula g = prime_shift(f, -(static_cast<int>(i) + 1));
      if (ps.index_of(g) || std::find(out.begin(), out.end(), g) != out.end()) continue;
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace itpa
