#include "itpa/logic.hpp"

#include <gtest/gtest.h>

#include "gen.hpp"

using namespace itpa;
using itpa::testing::Gen;

namespace {

Var X(int p = 0) { return Var::individual("x", p); }
Var Y(int p = 0) { return Var::individual("y", p); }
Var Z(int p = 0) { return Var::individual("z", p); }
LinTerm T(const Var& v) { return LinTerm(v); }
LinTerm C(int c) { return LinTerm(Rational(c)); }

// Structural isomorphism: equal after a consistent bijective renaming of
// base symbols.
bool iso(const Formula& a, const Formula& b, std::map<Symbol, Symbol>& fwd, std::map<Symbol, Symbol>& bwd) {
  auto match = [&](const Symbol& s, const Symbol& t) {
    auto f = fwd.find(s);
    auto g = bwd.find(t);
    if (f == fwd.end() && g == bwd.end()) {
      fwd.emplace(s, t);
      bwd.emplace(t, s);
      return true;
    }
    return f != fwd.end() && g != bwd.end() && f->second == t && g->second == s;
  };
  if (a.kind() != b.kind() || a.kids().size() != b.kids().size()) return false;
  if (a.is_atom()) {
    const auto& x = a.atom();
    const auto& y = b.atom();
    if (x.is_prop() != y.is_prop()) return false;
    if (x.is_prop()) return match(x.prop(), y.prop());
    const auto& r = x.rel();
    const auto& s = y.rel();
    if (r.op != s.op || r.rhs != s.rhs || r.lhs.coeffs().size() != s.lhs.coeffs().size()) return false;
    auto i = r.lhs.coeffs().begin();
    auto j = s.lhs.coeffs().begin();
    for (; i != r.lhs.coeffs().end(); ++i, ++j) {
      if (i->second != j->second) return false;
      if (!match(i->first.sym, j->first.sym)) return false;
      if (i->first.index.has_value() != j->first.index.has_value()) return false;
      if (i->first.index && !match(*i->first.index, *j->first.index)) return false;
    }
    return true;
  }
  for (std::size_t k = 0; k < a.kids().size(); ++k) {
    if (!iso(a.kids()[k], b.kids()[k], fwd, bwd)) return false;
  }
  return true;
}

}  // namespace

TEST(Symbol, EqualityNeedsAllFields) {
  EXPECT_EQ(Symbol::individual("x"), Symbol::individual("x"));
  EXPECT_NE(Symbol::individual("x"), Symbol::individual("x", 1));
  EXPECT_NE(Symbol::individual("x"), Symbol::prop("x"));
}

TEST(PrimeShift, ThreePrimes) {
  Formula f = mk_prop(Symbol::prop("s"));
  Formula g = prime_shift(f, 3);
  EXPECT_EQ(g, mk_prop(Symbol::prop("s", 3)));
  EXPECT_EQ(Symbol::prop("s", 3).str(), "s'''");
}

TEST(PrimeShift, ZeroIsIdentity) {
  Formula f = mk_rel(T(X()) + T(Y(1)), RelOp::Le, C(2));
  EXPECT_EQ(prime_shift(f, 0), f);
}

TEST(PrimeShift, NegativeShift) {
  Formula f = mk_rel(T(X(1)), RelOp::Le, T(Y(2)));
  Formula g = prime_shift(f, -1);
  EXPECT_EQ(g, mk_rel(T(X()), RelOp::Le, T(Y(1))));
  EXPECT_EQ(prime_shift(g, 1), f);
  EXPECT_THROW(prime_shift(f, -2), NegativeShiftInfeasible);
}

TEST(PrimeShift, ArrayReadsShiftBothParts) {
  Var r = Var::read(Symbol::array("a"), Symbol::individual("z"));
  Formula f = mk_eq(T(r), T(Y()));
  Formula g = prime_shift(f, 2);
  Var r2 = Var::read(Symbol::array("a", 2), Symbol::individual("z", 2));
  EXPECT_EQ(g, mk_eq(T(r2), T(Y(2))));
}

TEST(PrimeShift, RoundTripProperty) {
  Gen g(11);
  auto pool = itpa::testing::var_pool(3);
  auto props = itpa::testing::prop_pool(2);
  std::vector<Formula> atoms;
  for (int i = 0; i < 4; ++i) atoms.push_back(g.relation(pool));
  for (const auto& p : props) atoms.push_back(mk_prop(p));
  for (int k = 0; k < 200; ++k) {
    Formula f = g.formula(atoms, 3);
    int i = g.range(0, 4);
    EXPECT_EQ(prime_shift(prime_shift(f, i), -i), f);
  }
}

TEST(Normalize, LeadingCoefficientOne) {
  Formula f = mk_rel(C(0) - T(X()) * Rational(2), RelOp::Le, T(Y()) * Rational(4) + C(6));
  // -2x - 4y <= 6  ==>  x + 2y >= -3
  ASSERT_TRUE(f.is_atom());
  const auto& r = f.atom().rel();
  EXPECT_EQ(r.op, RelOp::Ge);
  EXPECT_EQ(r.rhs, Rational(-3));
  EXPECT_EQ(r.lhs.coeffs().begin()->second, Rational(1));
  EXPECT_EQ(mk_rel(r), f);
}

TEST(Normalize, ConstantRelationsFold) {
  EXPECT_TRUE(mk_rel(C(1), RelOp::Le, C(2)).is_true());
  EXPECT_TRUE(mk_rel(T(X()), RelOp::Lt, T(X())).is_false());
  EXPECT_TRUE(mk_rel(T(X()) + C(1), RelOp::Ne, T(X())).is_true());
}

TEST(Normalize, IdempotentAndModelPreserving) {
  Gen g(5);
  auto pool = itpa::testing::var_pool(3);
  static const std::vector<RelOp> ops{RelOp::Le, RelOp::Lt, RelOp::Ge, RelOp::Gt, RelOp::Eq, RelOp::Ne};
  for (int k = 0; k < 300; ++k) {
    LinTerm a = g.term(pool), b = g.term(pool);
    RelOp op = g.pick(ops);
    Formula f = mk_rel(a, op, b);
    if (f.is_atom()) {
      EXPECT_EQ(mk_rel(f.atom().rel()), f);
    }
    for (int j = 0; j < 10; ++j) {
      Model m = g.model(pool, {});
      EXPECT_EQ(evaluate(f, m), holds(op, evaluate(a, m), evaluate(b, m)));
    }
  }
}

TEST(Substitute, ReadExampleNormalizes) {
  Var az = Var::read(Symbol::array("a"), Symbol::individual("z"));
  Formula f = mk_eq(T(az), T(Y()) - C(1));
  Formula g = substitute(f, {{Symbol::individual("y"), T(Y()) + C(1)}});
  EXPECT_EQ(g, mk_eq(T(az), T(Y())));
}

TEST(Substitute, EmptyMap) {
  Formula f = mk_eq(T(X()), T(Z()));
  EXPECT_EQ(substitute(f, {}), f);
}

TEST(Substitute, RandomAssignmentsAgree) {
  // x + 2y <= 3 with x := y gives 3y <= 3, i.e. y <= 1.
  Formula f = mk_rel(T(X()) + T(Y()) * Rational(2), RelOp::Le, C(3));
  Formula g = substitute(f, {{Symbol::individual("x"), T(Y())}});
  EXPECT_EQ(g, mk_rel(T(Y()), RelOp::Le, C(1)));
  Gen gen(7);
  for (int k = 0; k < 10; ++k) {
    Model m = gen.model({X(), Y()}, {});
    Model m2 = m;
    m2.values[X()] = m.value(Y());
    EXPECT_EQ(evaluate(g, m), evaluate(f, m2));
  }
}

TEST(Substitute, Errors) {
  Formula f = mk_eq(T(X()), T(Z()));
  EXPECT_THROW(substitute(f, {{Symbol::prop("p"), T(Y())}}), SortMismatch);
  Var az = Var::read(Symbol::array("a"), Symbol::individual("z"));
  Formula g = mk_eq(T(az), C(0));
  EXPECT_THROW(substitute(g, {{Symbol::individual("z"), T(Y()) + C(1)}}), UnsupportedNesting);
  EXPECT_EQ(substitute(g, {{Symbol::individual("z"), T(Y())}}),
            mk_eq(T(Var::read(Symbol::array("a"), Symbol::individual("y"))), C(0)));
}

TEST(Hide, RenamesOutsideKeep) {
  FreshNames fresh;
  Symbol v = Symbol::prop("v");
  Formula f = mk_and(mk_prop(v), mk_eq(T(X()), C(0)));
  Formula g = hide_symbols(f, {v}, fresh);
  Symbol x1{std::string("x") + kReservedSeparator + "1", 0, SymbolKind::Individual};
  EXPECT_EQ(g, mk_and(mk_prop(v), mk_eq(LinTerm(Var::of(x1)), C(0))));
}

TEST(Hide, KeepAllIsIdentity) {
  FreshNames fresh;
  Formula f = mk_and(mk_prop(Symbol::prop("v")), mk_eq(T(X()), T(Y(1))));
  EXPECT_EQ(hide_symbols(f, base_symbols(f), fresh), f);
  EXPECT_EQ(fresh.issued(), 0u);
}

TEST(Hide, TwiceIsIsomorphicAndNeverCaptures) {
  Gen g(3);
  auto pool = itpa::testing::var_pool(3);
  auto props = itpa::testing::prop_pool(3);
  std::vector<Formula> atoms;
  for (int i = 0; i < 4; ++i) atoms.push_back(g.relation(pool));
  for (const auto& p : props) atoms.push_back(mk_prop(p));
  FreshNames fresh;
  for (int k = 0; k < 100; ++k) {
    Formula f = g.formula(atoms, 3);
    std::set<Symbol> keep{props[0], Symbol::individual("x")};
    Formula h1 = hide_symbols(f, keep, fresh);
    Formula h2 = hide_symbols(f, keep, fresh);
    std::map<Symbol, Symbol> fw, bw;
    EXPECT_TRUE(iso(h1, h2, fw, bw));
    std::set<std::string> orig;
    for (const auto& s : base_symbols(f)) orig.insert(s.name);
    for (const auto& s : base_symbols(h1)) {
      if (keep.contains(s)) continue;
      EXPECT_FALSE(orig.contains(s.name));
      EXPECT_NE(s.name.find(kReservedSeparator), std::string::npos);
    }
  }
}

TEST(Formula, StateAndTransitionClassification) {
  EXPECT_TRUE(is_state_formula(mk_eq(T(X()), T(Y()))));
  EXPECT_FALSE(is_state_formula(mk_eq(T(X(1)), T(Y()))));
  EXPECT_TRUE(is_transition_formula(mk_eq(T(X(1)), T(Y()))));
  EXPECT_FALSE(is_transition_formula(mk_eq(T(X(2)), T(Y()))));
}

TEST(Formula, SimplifyingConstructors) {
  Formula p = mk_prop(Symbol::prop("p"));
  EXPECT_TRUE(mk_and(p, mk_false()).is_false());
  EXPECT_EQ(mk_and(p, mk_true()), p);
  EXPECT_TRUE(mk_or(p, mk_true()).is_true());
  EXPECT_EQ(mk_not(mk_not(p)), p);
  EXPECT_TRUE(mk_implies(mk_false(), p).is_true());
  EXPECT_EQ(mk_and(p, p), p);
}

TEST(Formula, CnfShape) {
  Formula p = mk_prop(Symbol::prop("p")), q = mk_prop(Symbol::prop("q"));
  EXPECT_TRUE(is_cnf(mk_and(mk_or(p, mk_not(q)), q)));
  EXPECT_FALSE(is_cnf(mk_or(mk_and(p, q), q)));
}
