#include "itpa/approx.hpp"

#include <gtest/gtest.h>

#include <deque>

#include "gen.hpp"
#include "progs.hpp"

using namespace itpa;
using itpa::testing::Gen;

namespace {

LinTerm T(const char* n) { return LinTerm(Var::individual(n)); }
LinTerm A(const char* idx) { return LinTerm(Var::read(Symbol::array("a"), Symbol::individual(idx))); }
LinTerm C(int c) { return LinTerm(Rational(c)); }
Formula v(std::size_t k, int p = 0) { return mk_prop(PredicateSet::v(k, p)); }

const char* kStoreRead = R"(var x y z; array a; init L0; error LF;
  L0 -> L1 : a[x] := y;
  L1 -> L2 : y := y + 1;
  L2 -> L3 : assume z == x;
  L3 -> L4 : assert a[z] == y - 1;)";

std::vector<Formula> store_read_preds() {
  return {mk_eq(T("x"), T("z")), mk_eq(A("z"), T("y")), mk_eq(A("z"), T("y") - C(1))};
}

ImageFn plain(BddManager& m, const std::vector<ApproxOp>& ops) {
  return [&m, &ops](std::size_t r, Bdd phi) { return image(m, ops[r].bdd, phi); };
}

std::vector<ApproxOp> ops_for(const Program& p) {
  std::vector<ApproxOp> out;
  for (std::size_t i = 0; i < p.ops.size(); ++i) out.push_back({p.ops[i].entry, p.ops[i].exit, i, mk_true(), Bdd{1}});
  return out;
}

// Shortest distance in the location graph.
std::optional<std::size_t> bfs(const Program& p) {
  std::vector<int> dist(p.locations.size(), -1);
  std::deque<Location> q{p.initial};
  dist[static_cast<std::size_t>(p.initial)] = 0;
  while (!q.empty()) {
    Location l = q.front();
    q.pop_front();
    for (const auto& op : p.ops) {
      if (op.entry != l || dist[static_cast<std::size_t>(op.exit)] >= 0) continue;
      dist[static_cast<std::size_t>(op.exit)] = dist[static_cast<std::size_t>(l)] + 1;
      q.push_back(op.exit);
    }
  }
  int d = dist[static_cast<std::size_t>(p.error)];
  if (d < 0) return std::nullopt;
  return static_cast<std::size_t>(d);
}

Bdd bdd_of(BddManager& m, const Formula& f) { return to_bdd(m, f, predicate_vocabulary()); }

}  // namespace

TEST(McReach, InitialIsError) {
  Program p = parse_program("var x; init A; error A; A -> B : x := 1;");
  BddManager m;
  auto ops = ops_for(p);
  auto r = mc_reach(m, ops, p.locations.size(), 1, p.initial, p.error, plain(m, ops));
  ASSERT_TRUE(std::holds_alternative<Counterexample>(r));
  EXPECT_TRUE(std::get<Counterexample>(r).ops.empty());
  EXPECT_EQ(std::get<Counterexample>(r).states.size(), 1u);
}

TEST(McReach, FalseRelationIsUnreachable) {
  Program p = parse_program("var x; init A; error E; A -> E : assume false;");
  BddManager m;
  auto ops = ops_for(p);
  strengthen(m, ops[0], mk_false());
  auto r = mc_reach(m, ops, p.locations.size(), 0, p.initial, p.error, plain(m, ops));
  ASSERT_TRUE(std::holds_alternative<ReachUnreachable>(r));
  EXPECT_TRUE(std::get<ReachUnreachable>(r).invariants[1].is_false());
}

TEST(McReach, TrueRelationsGiveShortestPath) {
  Gen g(12);
  for (int k = 0; k < 60; ++k) {
    auto rp = itpa::testing::random_program(g);
    BddManager m;
    auto ops = ops_for(rp.prog);
    auto r = mc_reach(m, ops, rp.prog.locations.size(), 2, rp.prog.initial, rp.prog.error, plain(m, ops));
    auto d = bfs(rp.prog);
    ASSERT_EQ(d.has_value(), std::holds_alternative<Counterexample>(r));
    if (!d) continue;
    const auto& cex = std::get<Counterexample>(r);
    EXPECT_EQ(cex.ops.size(), *d);
    EXPECT_TRUE(path_chains(rp.prog, detail::program_path(ops, cex.ops)));
    if (!cex.ops.empty()) {
      EXPECT_EQ(rp.prog.ops[cex.ops.front()].entry, rp.prog.initial);
      EXPECT_EQ(rp.prog.ops[cex.ops.back()].exit, rp.prog.error);
    }
    // Least minterms throughout.
    for (const auto& s : cex.states) EXPECT_EQ(s, (std::vector<bool>{false, false}));
  }
}

TEST(PathBmc, Examples) {
  PredicateSet ps(store_read_preds());
  Program p = parse_program(kStoreRead);
  auto abs = abstract_program(p, ps);
  EXPECT_TRUE(std::holds_alternative<SatResult>(path_bmc({AbstractOp{0, 1, 0, abstract_transition(Assume{mk_true()}, ps)}})));
  EXPECT_TRUE(std::holds_alternative<UnsatResult>(path_bmc({abs[0], abs[1], abs[2], abs[3]})));
  // Feasible abstract path: its model projects to a consistent minterm chain.
  std::vector<AbstractOp> feas{abs[0], abs[1], abs[2], abs[4]};
  auto r = path_bmc(feas);
  ASSERT_TRUE(std::holds_alternative<SatResult>(r));
  const Model& model = std::get<SatResult>(r).model;
  for (std::size_t i = 0; i < feas.size(); ++i) {
    std::vector<bool> s, t;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      s.push_back(model.prop(PredicateSet::v(k, static_cast<int>(i))));
      t.push_back(model.prop(PredicateSet::v(k, static_cast<int>(i) + 1)));
    }
    EXPECT_TRUE(abstract_step_feasible(minterm_formula(s), feas[i], minterm_formula(t)));
  }
}

TEST(TransitionInterpolants, StoreReadTable) {
  PredicateSet ps(store_read_preds());
  Program p = parse_program(kStoreRead);
  auto abs = abstract_program(p, ps);
  std::vector<AbstractOp> path{abs[0], abs[1], abs[2], abs[3]};
  auto r = path_bmc(path);
  ASSERT_TRUE(std::holds_alternative<UnsatResult>(r));
  auto itps = transition_interpolants(std::get<UnsatResult>(r).proof, 4);
  ASSERT_EQ(itps.size(), 4u);
  std::set<Var> vocab;
  for (std::size_t k = 0; k < 3; ++k) {
    vocab.insert(Var::of(PredicateSet::v(k)));
    vocab.insert(Var::of(PredicateSet::v(k, 1)));
  }
  std::vector<Formula> shifted;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(vocabulary_within(itps[i], vocab)) << to_string(itps[i]);
    EXPECT_TRUE(implies(path[i].t_abs, itps[i]));
    shifted.push_back(prime_shift(itps[i], static_cast<int>(i)));
  }
  EXPECT_TRUE(is_unsat(shifted));
  // The reference table: v0 is x=z, v1 is a[z]=y, v2 is a[z]=y-1.
  std::vector<Formula> table{mk_implies(v(0, 1), v(1, 1)),
                             mk_and(mk_implies(v(1), v(2, 1)), mk_implies(v(0, 1), v(0))),
                             mk_and(mk_implies(v(2), v(2, 1)), v(0)), mk_not(v(2))};
  BddManager m;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(bdd_of(m, itps[i]), bdd_of(m, table[i])) << i;
}

TEST(TransitionInterpolants, SingleStep) {
  PredicateSet ps({mk_eq(T("x"), C(0))});
  AbstractOp r{0, 1, 0, mk_and(abstract_transition(Assign{Symbol::individual("x"), C(1)}, ps), v(0, 1))};
  auto res = path_bmc({r});
  ASSERT_TRUE(std::holds_alternative<UnsatResult>(res));
  auto itps = transition_interpolants(std::get<UnsatResult>(res).proof, 1);
  ASSERT_EQ(itps.size(), 1u);
  EXPECT_TRUE(itps[0].is_false());
}

TEST(RefineInterp, Examples) {
  Program p = parse_program("var x; init A; error E; A -> A : x := x + 1; A -> E : assume x < 0;");
  BddManager m;
  auto ops = ops_for(p);
  // Op 0 occurs twice: it receives both interpolants.
  auto out = refine_interp(m, ops, {0, 0, 1}, {v(0, 1), mk_implies(v(0), v(1, 1)), mk_true()});
  EXPECT_TRUE(out.strengthened);
  EXPECT_EQ(bdd_of(m, ops[0].t_approx), bdd_of(m, mk_and(v(0, 1), mk_implies(v(0), v(1, 1)))));
  EXPECT_TRUE(ops[1].t_approx.is_true());
  ASSERT_EQ(out.warnings.size(), 1u);
  auto again = refine_interp(m, ops, {0}, {v(0, 1)});
  EXPECT_FALSE(again.strengthened);
}

TEST(RefineInterp, PathBecomesInfeasible) {
  PredicateSet ps(store_read_preds());
  Program p = parse_program(kStoreRead);
  auto abs = abstract_program(p, ps);
  std::vector<std::size_t> idx{0, 1, 2, 3};
  std::vector<AbstractOp> path;
  for (auto i : idx) path.push_back(abs[i]);
  auto r = path_bmc(path);
  auto itps = transition_interpolants(std::get<UnsatResult>(r).proof, 4);
  BddManager m;
  auto ops = ops_for(p);
  EXPECT_TRUE(approx_path_feasible(m, ops, idx));
  refine_interp(m, ops, idx, itps);
  EXPECT_FALSE(approx_path_feasible(m, ops, idx));
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < idx.size(); ++i) parts.push_back(prime_shift(ops[idx[i]].t_approx, static_cast<int>(i)));
  EXPECT_TRUE(is_unsat(parts));
}

TEST(RefineDasDill, GuardCube) {
  PredicateSet ps({mk_eq(T("x"), T("z"))});
  Program p = parse_program("var x z; init A; error E; A -> E : assume z == x;");
  auto abs = abstract_program(p, ps);
  BddManager m;
  auto ops = ops_for(p);
  Counterexample cex{{{false}, {true}}, {0}};
  ASSERT_TRUE(cex_valid(m, ops, cex));
  auto res = refine_dasdill(m, ops, cex, abs);
  ASSERT_TRUE(std::holds_alternative<RefineOutcome>(res));
  EXPECT_EQ(bdd_of(m, ops[0].t_approx), bdd_of(m, v(0)));
  EXPECT_FALSE(cex_valid(m, ops, cex));
  // A consistent counterexample is genuine.
  Counterexample ok{{{true}, {true}}, {0}};
  EXPECT_TRUE(std::holds_alternative<GenuineAbstractCex>(refine_dasdill(m, ops, ok, abs)));
}

TEST(HybridImage, Sandwich) {
  Gen g(14);
  int checked = 0;
  for (int k = 0; k < 25; ++k) {
    auto rp = itpa::testing::random_program(g, 4, 2);
    PredicateSet ps(rp.preds);
    auto abs = abstract_program(rp.prog, ps);
    BddManager m;
    auto ops = ops_for(rp.prog);
    CartesianCache cache;
    const std::size_t n = ps.size();
    auto bits = [&](std::uint32_t c) {
      std::vector<bool> b;
      for (std::size_t i = 0; i < n; ++i) b.push_back(((c >> i) & 1) != 0);
      return b;
    };
    for (std::size_t r = 0; r < abs.size(); ++r) {
      // Approximate relation: one interpolant-like weakening of t_abs.
      strengthen(m, ops[r], mk_or(v(0), mk_not(v(0, 1))));
      if (!implies(abs[r].t_abs, ops[r].t_approx)) {
        ops[r] = ApproxOp{ops[r].entry, ops[r].exit, r, mk_true(), Bdd{1}};
      }
      Formula phi = g.coin() ? mk_true() : (g.coin() ? v(0) : mk_not(v(0)));
      Bdd phib = bdd_of(m, phi);
      Bdd exact = m.zero();
      for (std::uint32_t c = 0; c < (1u << n); ++c) {
        if (!m.eval(phib, [&](BddVar x) { return ((c >> (x / 2)) & 1) != 0; })) continue;
        for (std::uint32_t d = 0; d < (1u << n); ++d) {
          if (abstract_step_feasible(minterm_formula(bits(c)), abs[r], minterm_formula(bits(d)))) {
            exact = m.disj(exact, m.cube(state_vars(n), bits(d)));
          }
        }
      }
      Bdd hyb = hybrid_image(m, ops[r], abs[r], phib, ps, cache);
      Bdd pl = image(m, ops[r].bdd, phib);
      EXPECT_TRUE(m.implies(exact, hyb));
      EXPECT_TRUE(m.implies(hyb, pl));
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Verify, StoreReadUnreachable) {
  Program p = parse_program(kStoreRead);
  for (Engine e : {Engine::Interp, Engine::DasDill}) {
    for (bool h : {false, true}) {
      VerifyOptions o;
      o.engine = e;
      o.hybrid = h;
      Verdict v = verify(p, store_read_preds(), o);
      ASSERT_TRUE(std::holds_alternative<Unreachable>(v.result)) << v.tag();
      EXPECT_EQ(v.stats.pred_additions, 0u);
      EXPECT_EQ(v.stats.progress_failures, 0u);
      EXPECT_EQ(v.stats.stalls, 0u);
      EXPECT_TRUE(invariants_inductive(p, v, h));
      if (e == Engine::Interp) {
        EXPECT_EQ(v.stats.refinement_iterations, 1u);
      }
    }
  }
}

TEST(Verify, MinedPredicatesSuffice) {
  Program p = parse_program(kStoreRead);
  Verdict v = verify(p, {});
  ASSERT_TRUE(std::holds_alternative<Unreachable>(v.result)) << v.tag();
  EXPECT_GT(v.stats.pred_additions, 0u);
  // Rerun from scratch with just the mined atoms.
  Verdict again = verify(p, v.preds.preds());
  EXPECT_TRUE(std::holds_alternative<Unreachable>(again.result));
  EXPECT_EQ(again.stats.pred_additions, 0u);
}

TEST(Verify, ReachableToyHasWitness) {
  Program p = parse_program(R"(var x; init A; error E;
    A -> B : assume x == 0; B -> C : x := x + 1; C -> D : assert x == 0;)");
  for (Engine e : {Engine::Interp, Engine::DasDill}) {
    VerifyOptions o;
    o.engine = e;
    Verdict v = verify(p, {mk_eq(T("x"), C(0))}, o);
    ASSERT_TRUE(std::holds_alternative<ConcretePathFeasible>(v.result)) << v.tag();
    const auto& w = std::get<ConcretePathFeasible>(v.result);
    EXPECT_EQ(w.path.size(), 3u);
    EXPECT_TRUE(evaluate(mk_and(concrete_path_formula(p, w.path, v.preds.preds())), w.witness));
  }
}

TEST(Verify, InitialIsError) {
  Program p = parse_program("var x; init A; error A; A -> B : x := 1;");
  Verdict v = verify(p, {});
  ASSERT_TRUE(std::holds_alternative<ConcretePathFeasible>(v.result));
  EXPECT_TRUE(std::get<ConcretePathFeasible>(v.result).path.empty());
}

TEST(Verify, FixedPredicatesReportAbstractPath) {
  Program p = parse_program(kStoreRead);
  VerifyOptions o;
  o.mine = false;
  Verdict v = verify(p, {mk_eq(T("x"), T("z"))}, o);
  EXPECT_TRUE(std::holds_alternative<AbstractPathFeasible>(v.result)) << v.tag();
}

TEST(Verify, BudgetExceeded) {
  Program p = parse_program(kStoreRead);
  VerifyOptions o;
  o.max_iter = 1;
  o.engine = Engine::DasDill;
  EXPECT_THROW(verify(p, store_read_preds(), o), IterationBudgetExceeded);
}

TEST(Verify, DumpsProofs) {
  Program p = parse_program(kStoreRead);
  VerifyOptions o;
  auto dir = std::filesystem::temp_directory_path() / "itpa_dump_test";
  std::filesystem::remove_all(dir);
  o.dump_proofs = dir;
  verify(p, store_read_preds(), o);
  EXPECT_TRUE(std::filesystem::exists(dir / "proof_0.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Verify, Deterministic) {
  Gen g(21);
  for (int k = 0; k < 10; ++k) {
    auto rp = itpa::testing::random_program(g);
    for (Engine e : {Engine::Interp, Engine::DasDill}) {
      VerifyOptions o;
      o.engine = e;
      o.mine = false;
      Verdict a = verify(rp.prog, rp.preds, o);
      Verdict b = verify(rp.prog, rp.preds, o);
      EXPECT_EQ(a.result.index(), b.result.index());
      EXPECT_EQ(a.stats.refinement_iterations, b.stats.refinement_iterations);
      EXPECT_EQ(a.stats.refute_calls, b.stats.refute_calls);
    }
  }
}

TEST(ApproximateReachSystem, Examples) {
  Symbol vs = Symbol::prop("v");
  Formula sv = mk_prop(vs), svp = mk_prop(vs.shifted(1));
  Formula x0 = mk_eq(LinTerm(Var::individual("x")), C(0));
  // psi = I: reachable in zero steps.
  auto r0 = approximate_reach_system(sv, mk_true(), sv, {vs});
  EXPECT_TRUE(r0.reachable);
  EXPECT_EQ(r0.steps, 0u);
  // v is preserved while hidden arithmetic runs alongside.
  Formula t = mk_and(mk_iff(svp, sv), mk_eq(LinTerm(Var::individual("x", 1)), T("x") + C(1)));
  auto r1 = approximate_reach_system(sv, t, mk_not(sv), {vs});
  EXPECT_FALSE(r1.reachable);
  EXPECT_LE(r1.iterations, 1u);
  // Reachable through the hidden part.
  Formula t2 = mk_and({mk_iff(svp, x0), mk_eq(LinTerm(Var::individual("x", 1)), T("x") + C(1))});
  auto r2 = approximate_reach_system(mk_not(sv), t2, sv, {vs});
  EXPECT_TRUE(r2.reachable);
}

TEST(ApproximateReachSystem, StrictShrinking) {
  Gen g(30);
  std::vector<Symbol> vars{Symbol::prop("a"), Symbol::prop("b"), Symbol::prop("c")};
  std::vector<Formula> atoms;
  for (const auto& s : vars) {
    atoms.push_back(mk_prop(s));
    atoms.push_back(mk_prop(s.shifted(1)));
  }
  std::vector<Formula> state_atoms{mk_prop(vars[0]), mk_prop(vars[1]), mk_prop(vars[2])};
  int refined = 0;
  for (int k = 0; k < 150; ++k) {
    auto cube = [&]() {
      std::vector<Formula> lits;
      for (const auto& a : state_atoms) lits.push_back(g.coin() ? a : mk_not(a));
      return mk_and(lits);
    };
    Formula init = cube();
    Formula trans = mk_and({g.formula(atoms, 2), g.formula(atoms, 2), g.formula(atoms, 2)});
    Formula psi = cube();
    auto r = approximate_reach_system(init, trans, psi, vars);
    for (std::size_t i = 1; i < r.model_counts.size(); ++i) EXPECT_LT(r.model_counts[i], r.model_counts[i - 1]);
    if (!r.model_counts.empty()) {
      EXPECT_LT(r.model_counts[0], 64.0);
    }
    refined += static_cast<int>(r.iterations);
    // Agrees with explicit reachability over the exact relation.
    BddManager m;
    std::map<Symbol, BddVar> idx;
    for (std::size_t i = 0; i < 3; ++i) {
      idx[vars[i]] = bdd_var(i, 0);
      idx[vars[i].shifted(1)] = bdd_var(i, 1);
    }
    BddVocabulary voc{[&](const Symbol& s) -> std::optional<BddVar> { return idx.at(s); },
                      [&](BddVar x) { return vars[x / 2].shifted(static_cast<int>(x % 2)); }};
    Bdd reach = to_bdd(m, init, voc), tb = to_bdd(m, trans, voc);
    while (true) {
      Bdd next = m.disj(reach, image(m, tb, reach));
      if (next == reach) break;
      reach = next;
    }
    EXPECT_EQ(r.reachable, !m.conj(reach, to_bdd(m, psi, voc)).is_false());
  }
  EXPECT_GT(refined, 10);
}
