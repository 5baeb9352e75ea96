#pragma once

// Lazy refuter: CDCL over the Boolean skeleton, a total-assignment theory
// check with Fourier-Motzkin, and a resolution proof recorded on the side.
// Interpolants are read off the proof.

#include "itpa/cnf.hpp"
#include "itpa/lra.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <queue>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace itpa {

class InvalidProof : public LogicError {
 public:
  using LogicError::LogicError;
};

struct TheoryLemma {
  std::vector<LinConstraint> constraints;
  std::vector<Lit> constraint_lit;  // the asserted literal each constraint comes from
  FarkasCertificate cert;
};

enum class Origin : std::uint8_t { Hypothesis, Lemma, Derived };

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

struct ProofVertex {
  Clause clause;
  Origin origin = Origin::Hypothesis;
  int partition = -1;
  std::shared_ptr<const TheoryLemma> lemma;
  BoolVar pivot = -1;
  VertexId ante_pos = kNoVertex;
  VertexId ante_neg = kNoVertex;
  std::uint32_t successors = 0;
  bool alive = true;
};

struct Refutation {
  std::vector<ProofVertex> vertices;
  VertexId leaf = kNoVertex;
  std::shared_ptr<const AtomTable> table;
  int num_partitions = 0;
  std::vector<std::vector<int>> var_partitions;  // BoolVar -> sorted partitions whose clauses mention it
  std::vector<std::vector<Clause>> partition_clauses;

  const ProofVertex& at(VertexId id) const { return vertices.at(id); }
  ProofVertex& at(VertexId id) { return vertices.at(id); }

  bool occurs_in(BoolVar v, int part) const {
    if (v < 0 || static_cast<std::size_t>(v) >= var_partitions.size()) return false;
    const auto& ps = var_partitions[static_cast<std::size_t>(v)];
    return std::binary_search(ps.begin(), ps.end(), part);
  }
};

inline Clause resolvent(const Clause& pos, const Clause& neg, BoolVar pivot) {
  Clause out;
  out.reserve(pos.size() + neg.size());
  for (Lit l : pos) {
    if (lit_var(l) != pivot) out.push_back(l);
  }
  for (Lit l : neg) {
    if (lit_var(l) != pivot) out.push_back(l);
  }
  normalize_clause(out);
  return out;
}

/// Ids of vertices reachable from the leaf, antecedents first; among
/// vertices whose antecedents are all placed, the smallest id goes first.
inline std::vector<VertexId> leaf_cone(const Refutation& p) {
  std::vector<std::uint8_t> in(p.vertices.size(), 0);
  std::vector<VertexId> st{p.leaf};
  in[p.leaf] = 1;
  while (!st.empty()) {
    VertexId id = st.back();
    st.pop_back();
    const auto& v = p.vertices[id];
    if (v.origin != Origin::Derived) continue;
    for (VertexId a : {v.ante_pos, v.ante_neg}) {
      if (!in[a]) {
        in[a] = 1;
        st.push_back(a);
      }
    }
  }
  std::vector<std::uint8_t> pending(p.vertices.size(), 0);
  std::vector<std::vector<VertexId>> consumers(p.vertices.size());
  std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
  for (VertexId id = 0; id < p.vertices.size(); ++id) {
    if (!in[id]) continue;
    const auto& v = p.vertices[id];
    if (v.origin == Origin::Derived) {
      pending[id] = 2;
      consumers[v.ante_pos].push_back(id);
      consumers[v.ante_neg].push_back(id);
    } else {
      ready.push(id);
    }
  }
  std::vector<VertexId> order;
  while (!ready.empty()) {
    VertexId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (VertexId c : consumers[id]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  return order;
}

/// Renumbers the leaf cone topologically and recomputes successor counts.
inline void compact(Refutation& p) {
  auto order = leaf_cone(p);
  std::vector<VertexId> remap(p.vertices.size(), kNoVertex);
  std::vector<ProofVertex> out;
  out.reserve(order.size());
  for (VertexId id : order) {
    remap[id] = static_cast<VertexId>(out.size());
    out.push_back(std::move(p.vertices[id]));
  }
  for (auto& v : out) {
    v.successors = 0;
    v.alive = true;
    if (v.origin == Origin::Derived) {
      v.ante_pos = remap[v.ante_pos];
      v.ante_neg = remap[v.ante_neg];
    }
  }
  for (auto& v : out) {
    if (v.origin == Origin::Derived) {
      out[v.ante_pos].successors++;
      out[v.ante_neg].successors++;
    }
  }
  p.leaf = remap[p.leaf];
  p.vertices = std::move(out);
}

inline bool lemma_valid(const TheoryLemma& lem, const Clause& clause) {
  if (lem.constraints.size() != lem.constraint_lit.size()) return false;
  if (!certificate_valid(lem.constraints, lem.cert)) return false;
  Clause expect;
  for (Lit l : lem.constraint_lit) expect.push_back(lit_not(l));
  normalize_clause(expect);
  return expect == clause;
}

/// Structural check of the leaf cone. Returns an empty string when valid.
inline std::string validate_reason(const Refutation& p) {
  if (p.leaf == kNoVertex || p.leaf >= p.vertices.size()) return "no leaf";
  if (!p.at(p.leaf).clause.empty()) return "leaf clause not empty";
  auto order = leaf_cone(p);
  std::vector<std::uint32_t> succ(p.vertices.size(), 0);
  std::vector<std::uint8_t> pos(p.vertices.size(), 0);
  std::size_t k = 0;
  for (VertexId id : order) {
    const auto& v = p.at(id);
    pos[id] = 1;
    ++k;
    switch (v.origin) {
      case Origin::Hypothesis: {
        if (v.partition < 0 || v.partition >= p.num_partitions) return "hypothesis without partition";
        const auto& pcs = p.partition_clauses[static_cast<std::size_t>(v.partition)];
        if (std::find(pcs.begin(), pcs.end(), v.clause) == pcs.end()) {
          return "hypothesis " + std::to_string(id) + " not in its partition";
        }
        break;
      }
      case Origin::Lemma:
        if (!v.lemma || !lemma_valid(*v.lemma, v.clause)) return "invalid lemma " + std::to_string(id);
        break;
      case Origin::Derived: {
        if (!pos[v.ante_pos] || !pos[v.ante_neg]) return "antecedent after consequent at " + std::to_string(id);
        const auto& a = p.at(v.ante_pos).clause;
        const auto& b = p.at(v.ante_neg).clause;
        if (!clause_has(a, mk_lit(v.pivot)) || !clause_has(b, mk_lit(v.pivot, true))) {
          return "pivot missing at " + std::to_string(id);
        }
        Clause r = resolvent(a, b, v.pivot);
        for (std::size_t i = 1; i < r.size(); ++i) {
          if (r[i] == lit_not(r[i - 1])) return "tautological resolvent at " + std::to_string(id);
        }
        if (r != v.clause) return "resolvent mismatch at " + std::to_string(id);
        succ[v.ante_pos]++;
        succ[v.ante_neg]++;
        break;
      }
    }
  }
  (void)k;
  for (VertexId id : order) {
    if (succ[id] != p.at(id).successors) return "successor count mismatch at " + std::to_string(id);
  }
  return "";
}

inline bool validate(const Refutation& p) { return validate_reason(p).empty(); }

inline std::string clause_str(const Clause& c) {
  std::string s = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += " ";
    s += (lit_neg(c[i]) ? "-" : "") + std::to_string(lit_var(c[i]));
  }
  return s + "}";
}

/// Line-oriented dump of the leaf cone.
inline std::string dump_proof(const Refutation& p) {
  std::ostringstream os;
  for (VertexId id : leaf_cone(p)) {
    const auto& v = p.at(id);
    os << id << ": " << clause_str(v.clause) << " | ";
    switch (v.origin) {
      case Origin::Hypothesis: os << "HYP part=" << v.partition; break;
      case Origin::Lemma: {
        os << "LEMMA mult=";
        bool first = true;
        for (const auto& [i, m] : v.lemma->cert.multipliers) {
          if (!first) os << ",";
          os << i << ":" << m.get_str();
          first = false;
        }
        break;
      }
      case Origin::Derived:
        os << "RES piv=" << v.pivot << " left=" << v.ante_pos << " right=" << v.ante_neg;
        break;
    }
    os << "\n";
  }
  os << "# atoms\n";
  for (std::size_t i = 0; i < p.table->size(); ++i) {
    const auto& in = p.table->info(static_cast<BoolVar>(i));
    os << "# " << i << " = ";
    if (in.kind == VarKind::Aux) {
      os << "aux part=" << in.partition;
    } else {
      os << to_string(p.table->atom_formula(static_cast<BoolVar>(i)));
    }
    os << "\n";
  }
  return os.str();
}

struct SatResult {
  Model model;
};

struct UnsatResult {
  Refutation proof;
};

using RefuteResult = std::variant<SatResult, UnsatResult>;

inline std::uint64_t& refute_call_counter() {
  thread_local std::uint64_t n = 0;
  return n;
}

namespace detail {

/// Theory constraints asserted by a literal: Le/Lt/Eq atoms with either
/// polarity, except a false equality (equalities occur only positively in
/// the clauses, so a false one constrains nothing).
inline void literal_constraints(const AtomTable& t, Lit l, std::vector<LinConstraint>& out) {
  const auto& in = t.info(lit_var(l));
  if (in.kind != VarKind::Theory) return;
  const Relation& r = in.rel;
  bool neg = lit_neg(l);
  switch (r.op) {
    case RelOp::Le:
      if (!neg) {
        out.push_back(LinConstraint::le(r.lhs, r.rhs));
      } else {
        out.push_back(LinConstraint::lt(-r.lhs, -r.rhs));
      }
      break;
    case RelOp::Lt:
      if (!neg) {
        out.push_back(LinConstraint::lt(r.lhs, r.rhs));
      } else {
        out.push_back(LinConstraint::le(-r.lhs, -r.rhs));
      }
      break;
    case RelOp::Eq:
      if (!neg) {
        out.push_back(LinConstraint::le(r.lhs, r.rhs));
        out.push_back(LinConstraint::le(-r.lhs, -r.rhs));
      }
      break;
    default: throw LogicError("unexpected stored relation");
  }
}

class Solver {
 public:
  Solver(std::shared_ptr<AtomTable> table, int nparts) : table_(std::move(table)) {
    proof_.num_partitions = nparts;
    proof_.partition_clauses.resize(static_cast<std::size_t>(nparts));
  }

  void add_hypothesis(const Clause& c, int part) {
    proof_.partition_clauses[static_cast<std::size_t>(part)].push_back(c);
    for (Lit l : c) {
      auto v = static_cast<std::size_t>(lit_var(l));
      if (proof_.var_partitions.size() <= v) proof_.var_partitions.resize(v + 1);
      auto& ps = proof_.var_partitions[v];
      if (ps.empty() || ps.back() != part) {
        if (!std::binary_search(ps.begin(), ps.end(), part)) {
          ps.insert(std::upper_bound(ps.begin(), ps.end(), part), part);
        }
      }
    }
    ProofVertex v;
    v.clause = c;
    v.origin = Origin::Hypothesis;
    v.partition = part;
    pending_.push_back(new_vertex(std::move(v)));
  }

  RefuteResult solve() {
    const std::size_t n = table_->size();
    proof_.var_partitions.resize(n);
    value_.assign(n, 0);
    level_.assign(n, 0);
    reason_.assign(n, kNoVertex);
    trail_pos_.assign(n, 0);
    watches_.assign(2 * n, {});
    seen_.assign(n, 0);

    for (VertexId id : pending_) {
      if (!attach(id)) {
        if (conflict_ != kNoVertex) return finish_unsat(derive_empty(conflict_));
      }
    }
    pending_.clear();

    while (true) {
      VertexId confl = propagate();
      if (confl != kNoVertex) {
        if (decision_level() == 0) return finish_unsat(derive_empty(confl));
        learn_from(confl);
        continue;
      }
      BoolVar next = pick_branch();
      if (next >= 0) {
        new_level();
        assign(mk_lit(next, true), kNoVertex);
        continue;
      }
      // Total assignment: consult the theory.
      std::vector<LinConstraint> cs;
      std::vector<Lit> from;
      for (Lit l : trail_) {
        std::size_t before = cs.size();
        literal_constraints(*table_, l, cs);
        for (std::size_t i = before; i < cs.size(); ++i) from.push_back(l);
      }
      LraResult r = check_conjunction(cs);
      if (auto* f = std::get_if<Feasible>(&r)) {
        Model m = f->model;
        for (std::size_t v = 0; v < n; ++v) {
          const auto& in = table_->info(static_cast<BoolVar>(v));
          if (in.kind == VarKind::Prop) m.props[in.prop] = value_[v] > 0;
        }
        return SatResult{std::move(m)};
      }
      const auto& cert = std::get<Infeasible>(r).cert;
      auto lem = std::make_shared<TheoryLemma>();
      Clause clause;
      for (const auto& [i, mult] : cert.multipliers) {
        lem->cert.multipliers[lem->constraints.size()] = mult;
        lem->constraints.push_back(cs[i]);
        lem->constraint_lit.push_back(from[i]);
        clause.push_back(lit_not(from[i]));
      }
      normalize_clause(clause);
      ProofVertex v;
      v.clause = clause;
      v.origin = Origin::Lemma;
      v.lemma = std::move(lem);
      VertexId id = new_vertex(std::move(v));
      ++lemmas_;
      handle_falsified(id);
      if (throw_unsat_) return finish_unsat(finish_);
    }
  }

 private:
  int decision_level() const { return static_cast<int>(level_start_.size()); }
  void new_level() { level_start_.push_back(trail_.size()); }

  VertexId new_vertex(ProofVertex v) {
    proof_.vertices.push_back(std::move(v));
    return static_cast<VertexId>(proof_.vertices.size() - 1);
  }
  const Clause& clause_of(VertexId id) const { return proof_.vertices[id].clause; }

  // +1 true, -1 false, 0 unassigned
  int lit_value(Lit l) const {
    int v = value_[static_cast<std::size_t>(lit_var(l))];
    return lit_neg(l) ? -v : v;
  }

  void assign(Lit l, VertexId reason) {
    auto v = static_cast<std::size_t>(lit_var(l));
    value_[v] = lit_neg(l) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_pos_[v] = trail_.size();
    trail_.push_back(l);
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    std::size_t start = level_start_[static_cast<std::size_t>(lvl)];
    for (std::size_t i = start; i < trail_.size(); ++i) {
      auto v = static_cast<std::size_t>(lit_var(trail_[i]));
      value_[v] = 0;
      reason_[v] = kNoVertex;
    }
    trail_.resize(start);
    level_start_.resize(static_cast<std::size_t>(lvl));
    qhead_ = std::min(qhead_, trail_.size());
    next_branch_ = 0;
  }

  // Registers a clause at level 0. Returns false on an immediate conflict.
  bool attach(VertexId id) {
    const Clause& c = clause_of(id);
    if (c.empty()) {
      conflict_ = id;
      return false;
    }
    if (c.size() == 1) {
      int val = lit_value(c[0]);
      if (val < 0) {
        conflict_ = id;
        return false;
      }
      if (val == 0) assign(c[0], id);
      units_.push_back(id);
      return true;
    }
    watch_clause(id, 0, 1);
    return true;
  }

  void watch_clause(VertexId id, std::size_t a, std::size_t b) {
    auto& c = proof_.vertices[id].clause;
    watch_order_[id] = {c[a], c[b]};
    watches_[static_cast<std::size_t>(c[a])].push_back(id);
    watches_[static_cast<std::size_t>(c[b])].push_back(id);
  }

  VertexId propagate() {
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];
      Lit falsified = lit_not(p);
      auto& ws = watches_[static_cast<std::size_t>(falsified)];
      std::size_t i = 0, j = 0;
      VertexId confl = kNoVertex;
      while (i < ws.size()) {
        VertexId id = ws[i++];
        auto& w = watch_order_[id];
        if (w.first == falsified) std::swap(w.first, w.second);
        // w.second is the falsified watch
        if (lit_value(w.first) > 0) {
          ws[j++] = id;
          continue;
        }
        const Clause& c = clause_of(id);
        bool moved = false;
        for (Lit l : c) {
          if (l == w.first || l == w.second) continue;
          if (lit_value(l) >= 0) {
            w.second = l;
            watches_[static_cast<std::size_t>(l)].push_back(id);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = id;
        if (lit_value(w.first) < 0) {
          confl = id;
          while (i < ws.size()) ws[j++] = ws[i++];
          break;
        }
        assign(w.first, id);
      }
      ws.resize(j);
      if (confl != kNoVertex) return confl;
    }
    return kNoVertex;
  }

  BoolVar pick_branch() {
    const auto n = static_cast<BoolVar>(value_.size());
    while (next_branch_ < n && value_[static_cast<std::size_t>(next_branch_)] != 0) ++next_branch_;
    for (BoolVar v = next_branch_; v < n; ++v) {
      if (value_[static_cast<std::size_t>(v)] == 0) return v;
    }
    return -1;
  }

  VertexId resolve_on(VertexId a, VertexId b, BoolVar pivot) {
    const Clause& ca = clause_of(a);
    bool a_pos = clause_has(ca, mk_lit(pivot));
    VertexId pos = a_pos ? a : b;
    VertexId neg = a_pos ? b : a;
    ProofVertex v;
    v.clause = resolvent(clause_of(pos), clause_of(neg), pivot);
    v.origin = Origin::Derived;
    v.pivot = pivot;
    v.ante_pos = pos;
    v.ante_neg = neg;
    return new_vertex(std::move(v));
  }

  // Resolves away every literal of `confl` using level-0 reasons.
  VertexId derive_empty(VertexId confl) {
    VertexId cur = confl;
    while (!clause_of(cur).empty()) {
      const Clause& c = clause_of(cur);
      Lit best = c[0];
      for (Lit l : c) {
        if (trail_pos_[static_cast<std::size_t>(lit_var(l))] > trail_pos_[static_cast<std::size_t>(lit_var(best))]) {
          best = l;
        }
      }
      BoolVar v = lit_var(best);
      VertexId r = reason_[static_cast<std::size_t>(v)];
      if (r == kNoVertex) throw LogicError("level-0 literal without reason");
      cur = resolve_on(cur, r, v);
    }
    return cur;
  }

  // First-UIP analysis; every resolution step becomes a proof vertex.
  void learn_from(VertexId confl) {
    const int lvl = decision_level();
    VertexId cur = confl;
    while (true) {
      const Clause& c = clause_of(cur);
      int at_level = 0;
      for (Lit l : c) {
        if (level_[static_cast<std::size_t>(lit_var(l))] == lvl) ++at_level;
      }
      if (at_level <= 1) break;
      Lit latest = -1;
      for (Lit l : c) {
        auto v = static_cast<std::size_t>(lit_var(l));
        if (level_[v] != lvl) continue;
        if (latest < 0 || trail_pos_[v] > trail_pos_[static_cast<std::size_t>(lit_var(latest))]) latest = l;
      }
      BoolVar v = lit_var(latest);
      VertexId r = reason_[static_cast<std::size_t>(v)];
      if (r == kNoVertex) throw LogicError("decision literal in conflict analysis");
      cur = resolve_on(cur, r, v);
    }
    assert_learned(cur);
  }

  // `id` is false under the current assignment.
  void handle_falsified(VertexId id) {
    const Clause& c = clause_of(id);
    if (c.empty()) {
      finish_ = id;
      throw_unsat_ = true;
      return;
    }
    int maxl = 0;
    for (Lit l : c) maxl = std::max(maxl, level_[static_cast<std::size_t>(lit_var(l))]);
    if (maxl == 0) {
      finish_ = derive_empty(id);
      throw_unsat_ = true;
      return;
    }
    backtrack(maxl);
    learn_from(id);
  }

  // Backjumps so that the learned clause becomes unit and asserts it.
  void assert_learned(VertexId id) {
    const Clause& c = clause_of(id);
    const int lvl = decision_level();
    Lit uip = -1;
    int second = 0;
    std::size_t second_idx = 0, uip_idx = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      int l = level_[static_cast<std::size_t>(lit_var(c[i]))];
      if (l == lvl) {
        uip = c[i];
        uip_idx = i;
      } else if (l >= second) {
        second = l;
        second_idx = i;
      }
    }
    backtrack(second);
    if (c.size() == 1) {
      units_.push_back(id);
    } else {
      watch_clause(id, uip_idx, second_idx);
    }
    assign(uip, id);
  }

  UnsatResult finish_unsat(VertexId leaf) {
    proof_.leaf = leaf;
    proof_.table = table_;
    compact(proof_);
    return UnsatResult{std::move(proof_)};
  }

  std::shared_ptr<AtomTable> table_;
  Refutation proof_;
  std::vector<VertexId> pending_;
  std::vector<int> value_;
  std::vector<int> level_;
  std::vector<VertexId> reason_;
  std::vector<std::size_t> trail_pos_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> level_start_;
  std::vector<std::vector<VertexId>> watches_;
  std::unordered_map<VertexId, std::pair<Lit, Lit>> watch_order_;
  std::vector<VertexId> units_;
  std::vector<std::uint8_t> seen_;
  std::size_t qhead_ = 0;
  BoolVar next_branch_ = 0;
  VertexId conflict_ = kNoVertex;
  VertexId finish_ = kNoVertex;
  bool throw_unsat_ = false;
  std::size_t lemmas_ = 0;
};

}  // namespace detail

/// Decides satisfiability of the conjunction of `parts`. Unsat results
/// carry a resolution refutation whose hypotheses are tagged with the index
/// of the part they came from.
inline RefuteResult refute(const std::vector<Formula>& parts) {
  ++refute_call_counter();
  auto table = std::make_shared<AtomTable>();
  std::vector<CnfResult> cnfs;
  cnfs.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) cnfs.push_back(to_cnf(parts[i], *table, static_cast<int>(i)));
  detail::Solver s(table, static_cast<int>(parts.size()));
  for (std::size_t i = 0; i < cnfs.size(); ++i) {
    for (const auto& c : cnfs[i].clauses) s.add_hypothesis(c, static_cast<int>(i));
  }
  return s.solve();
}

inline bool is_unsat(const std::vector<Formula>& parts) { return std::holds_alternative<UnsatResult>(refute(parts)); }
inline bool is_sat(const Formula& f) { return !is_unsat({f}); }
inline bool is_valid(const Formula& f) { return is_unsat({mk_not(f)}); }
inline bool implies(const Formula& a, const Formula& b) { return is_unsat({a, mk_not(b)}); }

/// Interpolant for the split (a_side, rest) computed over one proof.
inline Formula interpolant(const Refutation& p, const std::vector<bool>& a_side) {
  if (static_cast<int>(a_side.size()) != p.num_partitions) throw InvalidProof("side mask size mismatch");
  auto local = [&](BoolVar v) {
    const auto& ps = p.var_partitions.at(static_cast<std::size_t>(v));
    for (int q : ps) {
      if (!a_side[static_cast<std::size_t>(q)]) return false;
    }
    return true;
  };
  std::vector<Formula> itp(p.vertices.size());
  for (VertexId id : leaf_cone(p)) {
    const auto& v = p.at(id);
    switch (v.origin) {
      case Origin::Hypothesis: {
        if (!a_side[static_cast<std::size_t>(v.partition)]) {
          itp[id] = mk_true();
          break;
        }
        std::vector<Formula> glob;
        for (Lit l : v.clause) {
          if (!local(lit_var(l))) glob.push_back(p.table->lit_formula(l));
        }
        itp[id] = mk_or(glob);
        break;
      }
      case Origin::Lemma: {
        const auto& lem = *v.lemma;
        itp[id] = farkas_interpolant(lem.constraints, lem.cert,
                                     [&](std::size_t i) { return local(lit_var(lem.constraint_lit[i])); });
        break;
      }
      case Origin::Derived: {
        const Formula& a = itp[v.ante_pos];
        const Formula& b = itp[v.ante_neg];
        itp[id] = local(v.pivot) ? mk_or(a, b) : mk_and(a, b);
        break;
      }
    }
  }
  return itp[p.leaf];
}

inline Formula interpolant(const Refutation& p, const std::set<int>& a_side) {
  std::vector<bool> mask(static_cast<std::size_t>(p.num_partitions), false);
  for (int i : a_side) {
    if (i < 0 || i >= p.num_partitions) throw InvalidProof("partition index out of range");
    mask[static_cast<std::size_t>(i)] = true;
  }
  return interpolant(p, mask);
}

inline std::vector<Formula> symmetric_interpolant(const Refutation& p) {
  std::vector<Formula> parts;
  for (int i = 0; i < p.num_partitions; ++i) parts.push_back(interpolant(p, std::set<int>{i}));
  return parts;
}

inline bool vocabulary_within(const Formula& f, const std::set<Var>& allowed) {
  for (const auto& v : symbols(f)) {
    if (!allowed.contains(v)) return false;
  }
  return true;
}

inline bool check_interpolant(const Formula& a, const Formula& b, const Formula& itp) {
  std::set<Var> sa = symbols(a), sb = symbols(b), common;
  for (const auto& v : sa) {
    if (sb.contains(v)) common.insert(v);
  }
  if (!vocabulary_within(itp, common)) return false;
  return is_unsat({a, mk_not(itp)}) && is_unsat({itp, b});
}

}  // namespace itpa
