#pragma once

// Random generators and brute-force oracles shared by the test binaries.

#include "itpa/logic.hpp"

#include <random>
#include <vector>

namespace itpa::testing {

class Gen {
 public:
  explicit Gen(std::uint32_t seed) : rng_(seed) {}

  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(range(0, static_cast<int>(xs.size()) - 1))];
  }
  std::mt19937& rng() { return rng_; }

  Rational small_rational(int num = 5, int den = 3) {
    Rational r(range(-num, num), range(1, den));
    r.canonicalize();
    return r;
  }

  LinTerm term(const std::vector<Var>& pool, int max_vars = 3, int coef = 3) {
    LinTerm t;
    int n = range(1, max_vars);
    for (int i = 0; i < n; ++i) {
      int c = range(-coef, coef);
      if (c == 0) c = 1;
      t.add(pick(pool), Rational(c));
    }
    t.add_constant(Rational(range(-4, 4)));
    return t;
  }

  Formula relation(const std::vector<Var>& pool, int max_vars = 2) {
    static const std::vector<RelOp> ops{RelOp::Le, RelOp::Lt, RelOp::Ge, RelOp::Gt, RelOp::Eq, RelOp::Ne};
    return mk_rel(term(pool, max_vars), pick(ops), LinTerm(Rational(range(-3, 3))));
  }

  /// Random Boolean structure over the given atoms.
  Formula formula(const std::vector<Formula>& atoms, int depth) {
    if (depth == 0 || coin(0.25)) {
      Formula a = pick(atoms);
      return coin() ? mk_not(a) : a;
    }
    switch (range(0, 3)) {
      case 0: return mk_not(formula(atoms, depth - 1));
      case 1: return mk_implies(formula(atoms, depth - 1), formula(atoms, depth - 1));
      case 2: {
        std::vector<Formula> ks;
        int n = range(2, 3);
        for (int i = 0; i < n; ++i) ks.push_back(formula(atoms, depth - 1));
        return mk_and(ks);
      }
      default: {
        std::vector<Formula> ks;
        int n = range(2, 3);
        for (int i = 0; i < n; ++i) ks.push_back(formula(atoms, depth - 1));
        return mk_or(ks);
      }
    }
  }

  Model model(const std::vector<Var>& pool, const std::vector<Symbol>& props, int num = 6, int den = 2) {
    Model m;
    for (const auto& v : pool) m.values[v] = small_rational(num, den);
    for (const auto& p : props) m.props[p] = coin();
    return m;
  }

 private:
  std::mt19937 rng_;
};

inline std::vector<Symbol> prop_pool(int n, const std::string& prefix = "p") {
  std::vector<Symbol> out;
  for (int i = 0; i < n; ++i) out.push_back(Symbol::prop(prefix + std::to_string(i)));
  return out;
}

inline std::vector<Var> var_pool(int n) {
  static const char* names[] = {"x", "y", "z", "w", "u", "t"};
  std::vector<Var> out;
  for (int i = 0; i < n; ++i) out.push_back(Var::individual(names[i]));
  return out;
}

/// Truth-table satisfiability of a formula over propositional symbols only.
inline bool truth_table_sat(const Formula& f, const std::vector<Symbol>& props) {
  const std::size_t n = props.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Model m;
    for (std::size_t i = 0; i < n; ++i) m.props[props[i]] = ((bits >> i) & 1) != 0;
    if (evaluate(f, m)) return true;
  }
  return false;
}

inline std::vector<Symbol> props_of(const Formula& f) {
  std::vector<Symbol> out;
  for (const auto& v : symbols(f)) {
    if (v.sym.kind == SymbolKind::Propositional) out.push_back(v.sym);
  }
  return out;
}

/// Random partitioned problem over shared atom pools; callers keep the
/// unsatisfiable ones.
inline std::vector<Formula> partitioned_problem(Gen& g, int nprops = 8, int nrels = 6, int nvars = 4) {
  auto props = prop_pool(g.range(1, nprops));
  auto vars = var_pool(g.range(1, nvars));
  std::vector<Formula> atoms;
  for (const auto& p : props) atoms.push_back(mk_prop(p));
  int nr = g.range(0, nrels);
  for (int i = 0; i < nr; ++i) {
    Formula r = g.relation(vars);
    if (r.is_atom()) atoms.push_back(r);
  }
  int parts = g.range(2, 4);
  std::vector<Formula> out;
  for (int i = 0; i < parts; ++i) {
    // Each partition sees a random subset of the atoms, so that some atoms
    // are local and some shared.
    std::vector<Formula> mine;
    for (const auto& a : atoms) {
      if (g.coin(0.6)) mine.push_back(a);
    }
    if (mine.empty()) mine.push_back(g.pick(atoms));
    std::vector<Formula> cl;
    int n = g.range(1, 4);
    for (int k = 0; k < n; ++k) cl.push_back(g.formula(mine, 2));
    out.push_back(mk_and(cl));
  }
  return out;
}

}  // namespace itpa::testing
