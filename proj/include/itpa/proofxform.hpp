#pragma once

// Rewrites a refutation so that resolutions on local pivots sit above
// resolutions on global ones wherever that costs no shared structure.

#include "itpa/prover.hpp"

#include <map>
#include <vector>

namespace itpa {

struct PivotClass {
  std::vector<bool> local;  // indexed by BoolVar

  bool is_local(BoolVar v) const {
    return v >= 0 && static_cast<std::size_t>(v) < local.size() && local[static_cast<std::size_t>(v)];
  }

  /// Local means: occurs in no partition outside `a_side`.
  static PivotClass for_split(const Refutation& p, const std::vector<bool>& a_side) {
    PivotClass pc;
    pc.local.assign(p.var_partitions.size(), false);
    for (std::size_t v = 0; v < p.var_partitions.size(); ++v) {
      const auto& ps = p.var_partitions[v];
      bool loc = !ps.empty();
      for (int q : ps) loc = loc && a_side[static_cast<std::size_t>(q)];
      pc.local[v] = loc;
    }
    return pc;
  }

  /// Local means: occurs in exactly one partition.
  static PivotClass partition_local(const Refutation& p) {
    PivotClass pc;
    pc.local.assign(p.var_partitions.size(), false);
    for (std::size_t v = 0; v < p.var_partitions.size(); ++v) pc.local[v] = p.var_partitions[v].size() == 1;
    return pc;
  }
};

struct TransformStats {
  std::size_t exchanges = 0;
  std::size_t blocked = 0;  // exchanges skipped because the other antecedent mentions the upper pivot
  std::size_t created = 0;
};

inline bool is_passable(const ProofVertex& v) { return v.origin == Origin::Derived && v.alive && v.successors == 1; }

namespace detail {

class Transformer {
 public:
  Transformer(Refutation& p, const PivotClass& pc) : p_(p), pc_(pc) {}

  VertexId resolve(BoolVar q, VertexId v1, VertexId v2) {
    if (!clause_has(p_.at(v1).clause, mk_lit(q))) return v1;
    if (!clause_has(p_.at(v2).clause, mk_lit(q, true))) return v2;
    ProofVertex r;
    r.clause = resolvent(p_.at(v1).clause, p_.at(v2).clause, q);
    r.origin = Origin::Derived;
    r.pivot = q;
    r.ante_pos = v1;
    r.ante_neg = v2;
    p_.vertices.push_back(std::move(r));
    auto id = static_cast<VertexId>(p_.vertices.size() - 1);
    p_.at(v1).successors++;
    p_.at(v2).successors++;
    stats_.created++;
    raise(id);
    return id;
  }

  void raise(VertexId v) {
    BoolVar q = p_.at(v).pivot;
    VertexId pos = p_.at(v).ante_pos;
    VertexId neg = p_.at(v).ante_neg;
    if (is_passable(p_.at(pos))) {
      if (exchange(v, true)) return;
    }
    if (is_passable(p_.at(neg))) exchange(v, false);
    (void)q;
  }

  void transform() {
    const auto n = static_cast<VertexId>(p_.vertices.size());
    for (VertexId id = 0; id < n; ++id) {
      const auto& v = p_.at(id);
      if (v.origin != Origin::Derived || !v.alive) continue;
      if (pc_.is_local(v.pivot)) raise(id);
    }
  }

  const TransformStats& stats() const { return stats_; }

 private:
  // Swaps v (pivot q) with its passable parent v' (pivot p).
  bool exchange(VertexId v, bool via_pos) {
    BoolVar q = p_.at(v).pivot;
    VertexId vp = via_pos ? p_.at(v).ante_pos : p_.at(v).ante_neg;
    VertexId d = via_pos ? p_.at(v).ante_neg : p_.at(v).ante_pos;
    BoolVar pv = p_.at(vp).pivot;
    const Clause& dc = p_.at(d).clause;
    if (clause_has(dc, mk_lit(pv)) || clause_has(dc, mk_lit(pv, true))) {
      stats_.blocked++;
      return false;
    }
    VertexId a = p_.at(vp).ante_pos;
    VertexId b = p_.at(vp).ante_neg;
    stats_.exchanges++;
    p_.at(vp).alive = false;
    p_.at(vp).successors = 0;

    p_.at(a).successors--;
    VertexId x = via_pos ? resolve(q, a, d) : resolve(q, d, a);
    p_.at(x).successors++;
    p_.at(b).successors--;
    VertexId y = via_pos ? resolve(q, b, d) : resolve(q, d, b);
    p_.at(y).successors++;

    ProofVertex& V = p_.at(v);
    V.ante_pos = x;
    V.ante_neg = y;
    V.pivot = pv;
    p_.at(d).successors--;
    release(d);
    release(a);
    release(b);
    return true;
  }

  void release(VertexId id) {
    ProofVertex& v = p_.at(id);
    if (v.successors != 0 || v.origin != Origin::Derived || !v.alive) return;
    v.alive = false;
    VertexId a = v.ante_pos, b = v.ante_neg;
    p_.at(a).successors--;
    p_.at(b).successors--;
    release(a);
    release(b);
  }

  Refutation& p_;
  const PivotClass& pc_;
  TransformStats stats_;
};

}  // namespace detail

inline VertexId resolve(Refutation& p, const PivotClass& pc, BoolVar q, VertexId v1, VertexId v2) {
  detail::Transformer t(p, pc);
  return t.resolve(q, v1, v2);
}

inline void raise(Refutation& p, const PivotClass& pc, VertexId v) {
  detail::Transformer t(p, pc);
  t.raise(v);
}

/// Raises every resolution whose pivot is local, visiting the original
/// derived vertices antecedents first. The result is compacted.
inline Refutation transform_proof(Refutation p, const PivotClass& pc, TransformStats* stats = nullptr) {
  if (!validate(p)) throw InvalidProof(validate_reason(p));
  detail::Transformer t(p, pc);
  t.transform();
  if (stats) *stats = t.stats();
  compact(p);
  return p;
}

/// Number of derived vertices resolving on each variable.
inline std::map<BoolVar, std::size_t> pivot_counts(const Refutation& p) {
  std::map<BoolVar, std::size_t> out;
  for (VertexId id : leaf_cone(p)) {
    const auto& v = p.at(id);
    if (v.origin == Origin::Derived) out[v.pivot]++;
  }
  return out;
}

/// Number of vertex clauses mentioning each variable.
inline std::map<BoolVar, std::size_t> occurrence_counts(const Refutation& p) {
  std::map<BoolVar, std::size_t> out;
  for (VertexId id : leaf_cone(p)) {
    for (Lit l : p.at(id).clause) out[lit_var(l)]++;
  }
  return out;
}

}  // namespace itpa
