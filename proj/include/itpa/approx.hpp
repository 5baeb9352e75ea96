#pragma once

// Approximate abstract transition relations, symbolic reachability over
// them, and the two refinement engines.

#include "itpa/abstraction.hpp"
#include "itpa/bdd.hpp"
#include "itpa/proofxform.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace itpa {

// ---------------------------------------------------------------------------
// Decision-diagram encoding of V and V'.

inline BddVar bdd_var(std::size_t k, int primes) { return static_cast<BddVar>(2 * k + static_cast<std::size_t>(primes)); }

inline BddVocabulary predicate_vocabulary() {
  return {[](const Symbol& s) -> std::optional<BddVar> {
            auto d = PredicateSet::decode(s);
            if (!d || d->second < 0 || d->second > 1) return std::nullopt;
            return bdd_var(d->first, d->second);
          },
          [](BddVar v) { return PredicateSet::v(v / 2, static_cast<int>(v % 2)); }};
}

inline std::vector<BddVar> state_vars(std::size_t n) {
  std::vector<BddVar> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(bdd_var(k, 0));
  return out;
}

/// Post-image of phi (over V) under tr (over V and V'), returned over V.
inline Bdd image(BddManager& m, Bdd tr, Bdd phi) {
  Bdd both = m.exists(m.conj(phi, tr), [](BddVar v) { return v % 2 == 0; });
  return m.rename(both, [](BddVar v) { return v - 1; });
}

/// States over V with some tr-successor in phi (phi over V).
inline Bdd preimage(BddManager& m, Bdd tr, Bdd phi) {
  Bdd next = m.rename(phi, [](BddVar v) { return v + 1; });
  return m.exists(m.conj(next, tr), [](BddVar v) { return v % 2 == 1; });
}

inline Formula image(const Formula& tr, const Formula& phi) {
  BddManager m;
  auto voc = predicate_vocabulary();
  return to_formula(m, image(m, to_bdd(m, tr, voc), to_bdd(m, phi, voc)), voc);
}

// ---------------------------------------------------------------------------
// Approximate program.

struct ApproxOp {
  Location entry = 0;
  Location exit = 0;
  std::size_t op = 0;
  Formula t_approx = mk_true();
  Bdd bdd{1};
};

inline std::vector<ApproxOp> initial_approximation(const std::vector<AbstractOp>& abs) {
  std::vector<ApproxOp> out;
  for (const auto& a : abs) out.push_back({a.entry, a.exit, a.op, mk_true(), Bdd{1}});
  return out;
}

struct Counterexample {
  std::vector<std::vector<bool>> states;  // minterms over V, one more than ops
  std::vector<std::size_t> ops;           // indices into the approximate program
};

struct ReachUnreachable {
  std::vector<Bdd> invariants;  // per location, over V
};

using ReachResult = std::variant<ReachUnreachable, Counterexample>;

using ImageFn = std::function<Bdd(std::size_t op, Bdd phi)>;

/// Whole-set layered reachability from (l0, True). Layer j+1 adds the
/// images of every location's layer-j set. On reaching lf, walks back from
/// the least minterm there, choosing the first op and least predecessor.
inline ReachResult mc_reach(BddManager& m, const std::vector<ApproxOp>& ops, std::size_t nlocs, std::size_t nvars,
                            Location l0, Location lf, const ImageFn& image_fn) {
  auto vars = state_vars(nvars);
  std::vector<std::vector<Bdd>> layers;
  layers.emplace_back(nlocs, m.zero());
  layers[0][static_cast<std::size_t>(l0)] = m.one();
  std::map<std::pair<std::size_t, std::uint32_t>, Bdd> memo;
  auto img = [&](std::size_t r, Bdd phi) {
    auto key = std::make_pair(r, phi.id);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Bdd out = image_fn(r, phi);
    memo.emplace(key, out);
    return out;
  };
  auto lfi = static_cast<std::size_t>(lf);
  while (layers.back()[lfi].is_false()) {
    const auto& cur = layers.back();
    std::vector<Bdd> next = cur;
    for (std::size_t r = 0; r < ops.size(); ++r) {
      Bdd src = cur[static_cast<std::size_t>(ops[r].entry)];
      if (src.is_false()) continue;
      auto e = static_cast<std::size_t>(ops[r].exit);
      next[e] = m.disj(next[e], img(r, src));
    }
    if (next == cur) return ReachUnreachable{cur};
    layers.push_back(std::move(next));
  }

  Counterexample cex;
  std::size_t j = layers.size() - 1;
  Location loc = lf;
  std::vector<bool> sigma = *m.least_minterm(layers[j][lfi], vars);
  cex.states.push_back(sigma);
  while (j > 0) {
    Bdd s_bdd = m.cube(vars, sigma);
    bool found = false;
    for (std::size_t r = 0; r < ops.size() && !found; ++r) {
      if (ops[r].exit != loc) continue;
      Bdd src = layers[j - 1][static_cast<std::size_t>(ops[r].entry)];
      if (src.is_false() || !m.implies(s_bdd, img(r, src))) continue;
      Bdd cand = m.conj(src, preimage(m, ops[r].bdd, s_bdd));
      auto pred = m.least_minterm(cand, vars);
      if (!pred) continue;
      found = true;
      sigma = *pred;
      loc = ops[r].entry;
      Bdd p_bdd = m.cube(vars, sigma);
      std::size_t first = 0;
      while (!m.implies(p_bdd, layers[first][static_cast<std::size_t>(loc)])) ++first;
      j = first;
      cex.ops.push_back(r);
      cex.states.push_back(sigma);
    }
    if (!found) throw LogicError("counterexample reconstruction failed");
  }
  std::reverse(cex.ops.begin(), cex.ops.end());
  std::reverse(cex.states.begin(), cex.states.end());
  return cex;
}

/// Whether each step of cex satisfies its op's approximate relation.
inline bool cex_valid(BddManager& m, const std::vector<ApproxOp>& ops, const Counterexample& cex) {
  for (std::size_t i = 0; i < cex.ops.size(); ++i) {
    const auto& pre = cex.states[i];
    const auto& post = cex.states[i + 1];
    bool ok = m.eval(ops[cex.ops[i]].bdd, [&](BddVar v) {
      std::size_t k = v / 2;
      const auto& s = v % 2 == 0 ? pre : post;
      return k < s.size() && s[k];
    });
    if (!ok) return false;
  }
  return true;
}

/// Whether some state sequence follows the ops of `path` in the
/// approximate program, starting anywhere.
inline bool approx_path_feasible(BddManager& m, const std::vector<ApproxOp>& ops, const std::vector<std::size_t>& path) {
  Bdd cur = m.one();
  for (std::size_t r : path) {
    cur = image(m, ops[r].bdd, cur);
    if (cur.is_false()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Path BMC and transition interpolants.

inline RefuteResult path_bmc(const std::vector<AbstractOp>& path) {
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < path.size(); ++i) parts.push_back(prime_shift(path[i].t_abs, static_cast<int>(i)));
  return refute(parts);
}

/// Per-step interpolants of a path refutation, moved back to V and V'.
inline std::vector<Formula> transition_interpolants(const Refutation& proof, std::size_t k,
                                                    TransformStats* stats = nullptr) {
  if (static_cast<std::size_t>(proof.num_partitions) != k) throw InvalidProof("partition count mismatch");
  Refutation t = transform_proof(proof, PivotClass::partition_local(proof), stats);
  auto parts = symmetric_interpolant(t);
  std::vector<Formula> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(prime_shift(parts[i], -static_cast<int>(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Refinement.

inline void strengthen(BddManager& m, ApproxOp& op, const Formula& f) {
  op.t_approx = mk_and(op.t_approx, f);
  op.bdd = m.conj(op.bdd, to_bdd(m, f, predicate_vocabulary()));
}

struct RefineOutcome {
  bool strengthened = false;  // some op's relation lost models
  std::vector<std::string> warnings;
};

inline RefineOutcome refine_interp(BddManager& m, std::vector<ApproxOp>& ops, const std::vector<std::size_t>& path,
                                   const std::vector<Formula>& itps) {
  if (itps.size() != path.size()) throw LogicError("one interpolant per step expected");
  RefineOutcome out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    ApproxOp& op = ops[path[i]];
    if (itps[i].is_true()) {
      out.warnings.push_back("interpolant for step " + std::to_string(i) + " is True");
      continue;
    }
    Bdd before = op.bdd;
    strengthen(m, op, itps[i]);
    if (!(op.bdd == before)) out.strengthened = true;
  }
  return out;
}

struct GenuineAbstractCex {};

/// Learns, for every step of cex whose transition minterm contradicts the
/// abstract relation, the negation of a greedily shrunk cube.
inline std::variant<RefineOutcome, GenuineAbstractCex> refine_dasdill(BddManager& m, std::vector<ApproxOp>& ops,
                                                                       const Counterexample& cex,
                                                                       const std::vector<AbstractOp>& abs) {
  RefineOutcome out;
  bool any = false;
  for (std::size_t i = 0; i < cex.ops.size(); ++i) {
    const AbstractOp& r = abs.at(ops[cex.ops[i]].op);
    std::vector<Formula> lits;
    const auto& pre = cex.states[i];
    const auto& post = cex.states[i + 1];
    for (std::size_t k = 0; k < pre.size(); ++k) {
      Formula v = mk_prop(PredicateSet::v(k));
      lits.push_back(pre[k] ? v : mk_not(v));
    }
    for (std::size_t k = 0; k < post.size(); ++k) {
      Formula v = mk_prop(PredicateSet::v(k, 1));
      lits.push_back(post[k] ? v : mk_not(v));
    }
    if (!is_unsat({mk_and(lits), r.t_abs})) continue;
    any = true;
    std::vector<bool> keep(lits.size(), true);
    for (std::size_t k = 0; k < lits.size(); ++k) {
      keep[k] = false;
      std::vector<Formula> rest;
      for (std::size_t j = 0; j < lits.size(); ++j) {
        if (keep[j]) rest.push_back(lits[j]);
      }
      if (!is_unsat({mk_and(rest), r.t_abs})) keep[k] = true;
    }
    std::vector<Formula> cube;
    for (std::size_t j = 0; j < lits.size(); ++j) {
      if (keep[j]) cube.push_back(lits[j]);
    }
    ApproxOp& op = ops[cex.ops[i]];
    Bdd before = op.bdd;
    strengthen(m, op, mk_not(mk_and(cube)));
    if (!(op.bdd == before)) out.strengthened = true;
  }
  if (!any) return GenuineAbstractCex{};
  return out;
}

// ---------------------------------------------------------------------------
// Verification loop.

enum class Engine { Interp, DasDill };

inline const char* to_string(Engine e) { return e == Engine::Interp ? "interp" : "dasdill"; }

struct VerifyOptions {
  Engine engine = Engine::Interp;
  bool hybrid = false;
  std::size_t max_iter = 200;
  bool mine = true;     // add mined predicates when an abstract path is spurious
  bool refine = true;   // false freezes every approximate relation at True
  std::optional<std::filesystem::path> dump_proofs;
};

struct VerifyStats {
  std::size_t refinement_iterations = 0;
  std::size_t pred_additions = 0;
  std::uint64_t refute_calls = 0;
  double wall_time_ms = 0;
  std::size_t progress_failures = 0;  // refinements that did not exclude their trigger
  std::size_t stalls = 0;             // refinements that removed no models
  std::size_t exchanges = 0;          // proof transformation steps
  std::vector<std::string> warnings;
};

struct Unreachable {
  std::vector<Formula> invariants;  // per location, over V
};

struct AbstractPathFeasible {
  Path path;
  std::vector<std::vector<bool>> witness;
  bool genuine_cex = false;  // reported by the minterm-consistency check
};

struct ConcretePathFeasible {
  Path path;
  Model witness;
};

struct InsufficientPredicates {
  Path path;
};

struct Verdict {
  std::variant<Unreachable, AbstractPathFeasible, ConcretePathFeasible, InsufficientPredicates> result;
  VerifyStats stats;
  PredicateSet preds;
  std::vector<ApproxOp> approx;
  std::vector<AbstractOp> abs;
  std::shared_ptr<BddManager> bdds;

  const char* tag() const {
    switch (result.index()) {
      case 0: return "unreachable";
      case 1: return "abstract_path_feasible";
      case 2: return "concrete_path_feasible";
      default: return "insufficient_predicates";
    }
  }
};

class IterationBudgetExceeded : public std::runtime_error {
 public:
  explicit IterationBudgetExceeded(VerifyStats s)
      : std::runtime_error("iteration budget exceeded"), stats(std::move(s)) {}
  VerifyStats stats;
};

/// Memoized strongest Cartesian postconditions, keyed by op and state set.
class CartesianCache {
 public:
  Bdd get(BddManager& m, const AbstractOp& r, std::size_t op, Bdd phi, const PredicateSet& ps) {
    auto key = std::make_pair(op, phi.id);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto voc = predicate_vocabulary();
    Formula cube = cartesian_post(r, to_formula(m, phi, voc), ps);
    Bdd out = to_bdd(m, cube, voc);
    memo_.emplace(key, out);
    return out;
  }
  void clear() { memo_.clear(); }

 private:
  std::map<std::pair<std::size_t, std::uint32_t>, Bdd> memo_;
};

inline Bdd hybrid_image(BddManager& m, const ApproxOp& r, const AbstractOp& a, Bdd phi, const PredicateSet& ps,
                        CartesianCache& cache) {
  return m.conj(image(m, r.bdd, phi), cache.get(m, a, r.op, phi, ps));
}

namespace detail {

inline Path program_path(const std::vector<ApproxOp>& ops, const std::vector<std::size_t>& idx) {
  Path out;
  for (std::size_t i : idx) out.push_back(ops[i].op);
  return out;
}

}  // namespace detail

inline Verdict verify(const Program& prog, const std::vector<Formula>& preds, const VerifyOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t calls0 = refute_call_counter();
  Verdict v;
  v.preds = PredicateSet(preds);
  v.bdds = std::make_shared<BddManager>();
  BddManager& m = *v.bdds;
  v.abs = abstract_program(prog, v.preds);
  v.approx = initial_approximation(v.abs);
  CartesianCache cache;

  auto finish = [&](auto result) {
    v.result = std::move(result);
    v.stats.refute_calls = refute_call_counter() - calls0;
    v.stats.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return v;
  };
  auto dump = [&](const Refutation& p) {
    if (!opt.dump_proofs) return;
    std::filesystem::create_directories(*opt.dump_proofs);
    std::ofstream out(*opt.dump_proofs / ("proof_" + std::to_string(v.stats.refinement_iterations) + ".txt"));
    out << dump_proof(p);
  };

  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    ImageFn fn = [&](std::size_t r, Bdd phi) {
      if (opt.hybrid) return hybrid_image(m, v.approx[r], v.abs[v.approx[r].op], phi, v.preds, cache);
      return image(m, v.approx[r].bdd, phi);
    };
    auto reach = mc_reach(m, v.approx, prog.locations.size(), v.preds.size(), prog.initial, prog.error, fn);
    if (auto* u = std::get_if<ReachUnreachable>(&reach)) {
      Unreachable out;
      auto voc = predicate_vocabulary();
      for (Bdd b : u->invariants) out.invariants.push_back(to_formula(m, b, voc));
      return finish(out);
    }
    const auto& cex = std::get<Counterexample>(reach);
    Path path = detail::program_path(v.approx, cex.ops);
    if (!opt.refine) return finish(AbstractPathFeasible{path, cex.states, false});

    bool abstract_feasible = false;
    if (opt.engine == Engine::Interp) {
      std::vector<AbstractOp> apath;
      for (std::size_t r : cex.ops) apath.push_back(v.abs[v.approx[r].op]);
      auto bmc = path_bmc(apath);
      if (auto* un = std::get_if<UnsatResult>(&bmc)) {
        dump(un->proof);
        TransformStats ts;
        auto itps = transition_interpolants(un->proof, apath.size(), &ts);
        v.stats.exchanges += ts.exchanges;
        auto res = refine_interp(m, v.approx, cex.ops, itps);
        for (auto& w : res.warnings) v.stats.warnings.push_back(std::move(w));
        v.stats.refinement_iterations++;
        if (!res.strengthened) v.stats.stalls++;
        if (approx_path_feasible(m, v.approx, cex.ops)) v.stats.progress_failures++;
        continue;
      }
      abstract_feasible = true;
    } else {
      auto res = refine_dasdill(m, v.approx, cex, v.abs);
      if (auto* ro = std::get_if<RefineOutcome>(&res)) {
        v.stats.refinement_iterations++;
        if (!ro->strengthened) v.stats.stalls++;
        if (cex_valid(m, v.approx, cex)) v.stats.progress_failures++;
        continue;
      }
      abstract_feasible = true;
    }

    if (abstract_feasible) {
      if (path.empty()) return finish(ConcretePathFeasible{path, Model{}});
      auto parts = concrete_path_formula(prog, path, v.preds.preds());
      auto cr = refute(parts);
      if (auto* sat = std::get_if<SatResult>(&cr)) return finish(ConcretePathFeasible{path, sat->model});
      if (!opt.mine) return finish(AbstractPathFeasible{path, cex.states, opt.engine == Engine::DasDill});
      auto mined = mine_predicates(prog, path, v.preds);
      std::size_t added = 0;
      for (const auto& p : mined) added += v.preds.add(p) ? 1 : 0;
      if (added == 0) return finish(InsufficientPredicates{path});
      v.stats.pred_additions += added;
      v.abs = abstract_program(prog, v.preds);
      cache.clear();
    }
  }
  v.stats.refute_calls = refute_call_counter() - calls0;
  throw IterationBudgetExceeded(v.stats);
}

/// Checks that each op maps its entry invariant into its exit invariant
/// under the image the run used.
inline bool invariants_inductive(const Program& prog, Verdict& v, bool hybrid) {
  const auto* u = std::get_if<Unreachable>(&v.result);
  if (!u) return false;
  BddManager& m = *v.bdds;
  auto voc = predicate_vocabulary();
  CartesianCache cache;
  std::vector<Bdd> inv;
  for (const auto& f : u->invariants) inv.push_back(to_bdd(m, f, voc));
  if (!inv[static_cast<std::size_t>(prog.initial)].is_true()) return false;
  if (!inv[static_cast<std::size_t>(prog.error)].is_false()) return false;
  for (const auto& r : v.approx) {
    Bdd src = inv[static_cast<std::size_t>(r.entry)];
    Bdd img = hybrid ? hybrid_image(m, r, v.abs[r.op], src, v.preds, cache) : image(m, r.bdd, src);
    if (!m.implies(img, inv[static_cast<std::size_t>(r.exit)])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The generic loop over a propositional system (I, T) and target psi.

struct SystemVerdict {
  bool reachable = false;
  std::size_t steps = 0;  // trace length when reachable
  std::size_t iterations = 0;
  Formula t_approx = mk_true();
  std::vector<double> model_counts;  // of T~ after each refinement
};

inline SystemVerdict approximate_reach_system(const Formula& init, const Formula& trans, const Formula& psi,
                                              const std::vector<Symbol>& vars, std::size_t max_iter = 200) {
  BddManager m;
  std::map<Symbol, BddVar> index;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    index[vars[k]] = bdd_var(k, 0);
    index[vars[k].shifted(1)] = bdd_var(k, 1);
  }
  BddVocabulary voc{[&](const Symbol& s) -> std::optional<BddVar> {
                      auto it = index.find(s);
                      if (it == index.end()) return std::nullopt;
                      return it->second;
                    },
                    [&](BddVar v) { return vars[v / 2].shifted(static_cast<int>(v % 2)); }};
  std::set<Symbol> keep;
  for (const auto& [s, b] : index) keep.insert(s);
  FreshNames fresh;
  Formula t_hidden = hide_symbols(trans, keep, fresh);

  SystemVerdict out;
  Bdd i_bdd = to_bdd(m, init, voc);
  Bdd psi_bdd = to_bdd(m, psi, voc);
  Bdd approx = m.one();
  auto nvars = static_cast<BddVar>(2 * vars.size());
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Shortest k with psi reachable in the approximate system.
    Bdd reach = i_bdd;
    std::size_t k = 0;
    bool hit = !m.conj(reach, psi_bdd).is_false();
    while (!hit) {
      Bdd next = m.disj(reach, image(m, approx, reach));
      if (next == reach) {
        out.t_approx = to_formula(m, approx, voc);
        return out;
      }
      reach = next;
      ++k;
      hit = !m.conj(reach, psi_bdd).is_false();
    }
    std::vector<Formula> parts{init};
    for (std::size_t i = 0; i < k; ++i) parts.push_back(prime_shift(t_hidden, static_cast<int>(i)));
    parts.push_back(prime_shift(psi, static_cast<int>(k)));
    auto r = refute(parts);
    if (std::holds_alternative<SatResult>(r)) {
      out.reachable = true;
      out.steps = k;
      out.t_approx = to_formula(m, approx, voc);
      return out;
    }
    const Refutation& proof = std::get<UnsatResult>(r).proof;
    Refutation t = transform_proof(proof, PivotClass::partition_local(proof));
    auto itps = symmetric_interpolant(t);
    for (std::size_t i = 0; i < k; ++i) {
      approx = m.conj(approx, to_bdd(m, prime_shift(itps[i + 1], -static_cast<int>(i)), voc));
    }
    out.iterations++;
    out.model_counts.push_back(m.sat_count(approx, nvars));
  }
  throw IterationBudgetExceeded(VerifyStats{});
}

}  // namespace itpa
