#pragma once

// Conjunctions of linear constraints over the rationals, decided by
// Fourier-Motzkin elimination that carries the combination of input rows
// along with every derived row.

#include "itpa/logic.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <variant>
#include <vector>

namespace itpa {

/// Σ coeffs·vars ≤ bound (or < bound when strict).
struct LinConstraint {
  std::map<Var, Rational> coeffs;
  Rational bound = 0;
  bool strict = false;

  LinConstraint() = default;
  LinConstraint(std::map<Var, Rational> c, Rational b, bool s) : coeffs(std::move(c)), bound(std::move(b)), strict(s) {
    std::erase_if(coeffs, [](const auto& kv) { return kv.second == 0; });
  }
  static LinConstraint le(const LinTerm& t, const Rational& b) { return {t.coeffs(), b - t.constant_part(), false}; }
  static LinConstraint lt(const LinTerm& t, const Rational& b) { return {t.coeffs(), b - t.constant_part(), true}; }

  bool holds(const Model& m) const {
    Rational s = 0;
    for (const auto& [v, c] : coeffs) s += c * m.value(v);
    return strict ? s < bound : s <= bound;
  }

  std::string str() const {
    LinTerm t;
    for (const auto& [v, c] : coeffs) t.add(v, c);
    return t.str() + (strict ? " < " : " <= ") + bound.get_str();
  }
};

struct FarkasCertificate {
  std::map<std::size_t, Rational> multipliers;
};

struct Feasible {
  Model model;
};

struct Infeasible {
  FarkasCertificate cert;
};

using LraResult = std::variant<Feasible, Infeasible>;

class InvalidCertificate : public LogicError {
 public:
  using LogicError::LogicError;
};

/// Exact check that the certificate sums `cs` to a contradictory bound.
inline bool certificate_valid(const std::vector<LinConstraint>& cs, const FarkasCertificate& cert) {
  std::map<Var, Rational> sum;
  Rational bound = 0;
  bool strict = false;
  bool any = false;
  for (const auto& [i, m] : cert.multipliers) {
    if (i >= cs.size() || m < 0) return false;
    if (m == 0) continue;
    any = true;
    for (const auto& [v, c] : cs[i].coeffs) sum[v] += m * c;
    bound += m * cs[i].bound;
    strict = strict || cs[i].strict;
  }
  if (!any) return false;
  for (const auto& [v, c] : sum) {
    if (c != 0) return false;
  }
  return bound < 0 || (strict && bound == 0);
}

namespace detail {

struct FmRow {
  std::map<Var, Rational> coeffs;
  Rational bound;
  bool strict = false;
  std::map<std::size_t, Rational> combo;

  bool contradictory() const { return coeffs.empty() && (bound < 0 || (strict && bound == 0)); }
};

inline FmRow combine(const FmRow& a, const Rational& ma, const FmRow& b, const Rational& mb) {
  FmRow r;
  r.coeffs = a.coeffs;
  for (auto& [v, c] : r.coeffs) c *= ma;
  for (const auto& [v, c] : b.coeffs) {
    Rational add = mb * c;
    auto [it, fresh] = r.coeffs.try_emplace(v, add);
    if (!fresh) it->second += add;
  }
  std::erase_if(r.coeffs, [](const auto& kv) { return kv.second == 0; });
  r.bound = ma * a.bound + mb * b.bound;
  r.strict = (ma != 0 && a.strict) || (mb != 0 && b.strict);
  r.combo = a.combo;
  for (auto& [i, m] : r.combo) m *= ma;
  for (const auto& [i, m] : b.combo) {
    Rational add = mb * m;
    auto [it, fresh] = r.combo.try_emplace(i, add);
    if (!fresh) it->second += add;
  }
  std::erase_if(r.combo, [](const auto& kv) { return kv.second == 0; });
  return r;
}

// One elimination step, kept for back-substitution.
struct Elim {
  Var var;
  std::vector<FmRow> rows;  // every row that mentioned var at this stage
  std::optional<std::size_t> eq_row;  // row used as an equality, if any
};

inline Rational pick_value(const std::optional<Rational>& lo, bool lo_strict, const std::optional<Rational>& hi,
                           bool hi_strict) {
  auto ok = [&](const Rational& x) {
    if (lo && (lo_strict ? x <= *lo : x < *lo)) return false;
    if (hi && (hi_strict ? x >= *hi : x > *hi)) return false;
    return true;
  };
  if (ok(Rational(0))) return 0;
  if (lo) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), lo->get_num_mpz_t(), lo->get_den_mpz_t());
    Rational c(f);
    if (!ok(c)) c += 1;
    if (ok(c)) return c;
  }
  if (hi) {
    mpz_class f;
    mpz_cdiv_q(f.get_mpz_t(), hi->get_num_mpz_t(), hi->get_den_mpz_t());
    Rational c(f);
    if (!ok(c)) c -= 1;
    if (ok(c)) return c;
  }
  if (lo && hi) {
    Rational mid = (*lo + *hi) / 2;
    return mid;
  }
  return 0;
}

}  // namespace detail

/// Decides Σ-conjunction feasibility. Feasible carries a satisfying
/// assignment (integral where the bounds allow); Infeasible carries
/// nonnegative multipliers indexed into `cs`.
inline LraResult check_conjunction(const std::vector<LinConstraint>& cs) {
  using detail::FmRow;
  std::vector<FmRow> rows;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    FmRow r{cs[i].coeffs, cs[i].bound, cs[i].strict, {{i, Rational(1)}}};
    if (r.contradictory()) return Infeasible{{r.combo}};
    rows.push_back(std::move(r));
  }

  // Keeps only the tightest row per coefficient vector; drops trivial rows.
  auto tidy = [](std::vector<FmRow>& rs) -> std::optional<FarkasCertificate> {
    std::map<std::map<Var, Rational>, std::size_t> best;
    std::vector<FmRow> out;
    for (auto& r : rs) {
      if (r.coeffs.empty()) {
        if (r.contradictory()) return FarkasCertificate{r.combo};
        continue;
      }
      auto it = best.find(r.coeffs);
      if (it == best.end()) {
        best.emplace(r.coeffs, out.size());
        out.push_back(std::move(r));
        continue;
      }
      FmRow& o = out[it->second];
      if (r.bound < o.bound || (r.bound == o.bound && r.strict && !o.strict)) o = std::move(r);
    }
    rs = std::move(out);
    return std::nullopt;
  };

  if (auto c = tidy(rows)) return Infeasible{*c};

  std::vector<detail::Elim> elims;
  while (!rows.empty()) {
    std::set<Var> vars;
    for (const auto& r : rows) {
      for (const auto& [v, c] : r.coeffs) vars.insert(v);
    }
    if (vars.empty()) break;

    // Equality pairs: rows r and s with s.coeffs = -r.coeffs and
    // s.bound = -r.bound, both non-strict.
    std::optional<std::pair<std::size_t, std::size_t>> eq;
    std::optional<Var> eq_var;
    {
      std::map<std::map<Var, Rational>, std::size_t> index;
      for (std::size_t i = 0; i < rows.size(); ++i) index.emplace(rows[i].coeffs, i);
      for (std::size_t i = 0; i < rows.size() && !eq; ++i) {
        if (rows[i].strict) continue;
        std::map<Var, Rational> neg = rows[i].coeffs;
        for (auto& [v, c] : neg) c = -c;
        auto it = index.find(neg);
        if (it == index.end()) continue;
        const FmRow& s = rows[it->second];
        if (s.strict || s.bound != -rows[i].bound) continue;
        eq = std::make_pair(i, it->second);
        eq_var = rows[i].coeffs.begin()->first;
      }
    }

    Var x;
    detail::Elim el;
    std::vector<FmRow> keep, derived;
    if (eq) {
      x = *eq_var;
      const FmRow e1 = rows[eq->first];
      const FmRow e2 = rows[eq->second];
      Rational b = e1.coeffs.at(x);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == eq->first || i == eq->second) continue;
        auto it = rows[i].coeffs.find(x);
        if (it == rows[i].coeffs.end()) {
          keep.push_back(std::move(rows[i]));
          continue;
        }
        // Cancel x with whichever half of the equality has the right sign.
        Rational k = it->second / b;
        if (k > 0) {
          derived.push_back(detail::combine(rows[i], Rational(1), e2, k));
        } else {
          derived.push_back(detail::combine(rows[i], Rational(1), e1, -k));
        }
      }
      el = detail::Elim{x, {e1}, std::size_t{0}};
    } else {
      std::size_t best_cost = 0;
      bool have = false;
      for (const auto& v : vars) {
        std::size_t pos = 0, neg = 0;
        for (const auto& r : rows) {
          auto it = r.coeffs.find(v);
          if (it == r.coeffs.end()) continue;
          (it->second > 0 ? pos : neg)++;
        }
        std::size_t cost = pos * neg;
        if (!have || cost < best_cost) {
          x = v;
          best_cost = cost;
          have = true;
        }
      }
      el = detail::Elim{x, {}, std::nullopt};
      std::vector<FmRow> pos, neg;
      for (auto& r : rows) {
        auto it = r.coeffs.find(x);
        if (it == r.coeffs.end()) {
          keep.push_back(std::move(r));
        } else {
          (it->second > 0 ? pos : neg).push_back(r);
          el.rows.push_back(std::move(r));
        }
      }
      for (const auto& p : pos) {
        for (const auto& n : neg) {
          Rational a = p.coeffs.at(x);
          Rational b = -n.coeffs.at(x);
          FmRow r = detail::combine(p, 1 / a, n, 1 / b);
          if (r.contradictory()) return Infeasible{{r.combo}};
          derived.push_back(std::move(r));
        }
      }
    }
    for (auto& d : derived) {
      if (d.contradictory()) return Infeasible{{d.combo}};
      keep.push_back(std::move(d));
    }
    rows = std::move(keep);
    if (auto c = tidy(rows)) return Infeasible{*c};
    elims.push_back(std::move(el));
  }

  // Back-substitution in reverse elimination order.
  Model m;
  auto rest_value = [&](const detail::FmRow& r, const Var& x) {
    Rational s = 0;
    for (const auto& [v, c] : r.coeffs) {
      if (v == x) continue;
      s += c * m.value(v);
    }
    return s;
  };
  for (auto it = elims.rbegin(); it != elims.rend(); ++it) {
    const Var& x = it->var;
    if (it->eq_row) {
      const auto& r = it->rows[*it->eq_row];
      m.values[x] = (r.bound - rest_value(r, x)) / r.coeffs.at(x);
      continue;
    }
    std::optional<Rational> lo, hi;
    bool lo_s = false, hi_s = false;
    for (const auto& r : it->rows) {
      Rational a = r.coeffs.at(x);
      Rational lim = (r.bound - rest_value(r, x)) / a;
      if (a > 0) {
        if (!hi || lim < *hi || (lim == *hi && r.strict)) {
          hi_s = (hi && lim == *hi) ? (hi_s || r.strict) : r.strict;
          hi = lim;
        }
      } else {
        if (!lo || lim > *lo || (lim == *lo && r.strict)) {
          lo_s = (lo && lim == *lo) ? (lo_s || r.strict) : r.strict;
          lo = lim;
        }
      }
    }
    m.values[x] = detail::pick_value(lo, lo_s, hi, hi_s);
  }
  std::erase_if(m.values, [](const auto& kv) { return kv.second == 0; });
  return Feasible{std::move(m)};
}

/// Σ over A-side constraints of multiplier·constraint, as a normalized atom
/// (True/False when no variable survives).
inline Formula farkas_interpolant(const std::vector<LinConstraint>& cs, const FarkasCertificate& cert,
                                  const std::function<bool(std::size_t)>& in_A) {
  if (!certificate_valid(cs, cert)) throw InvalidCertificate("certificate does not refute the constraints");
  LinTerm sum;
  Rational bound = 0;
  bool strict = false;
  for (const auto& [i, m] : cert.multipliers) {
    if (m == 0 || !in_A(i)) continue;
    for (const auto& [v, c] : cs[i].coeffs) sum.add(v, m * c);
    bound += m * cs[i].bound;
    strict = strict || cs[i].strict;
  }
  return mk_rel(sum, strict ? RelOp::Lt : RelOp::Le, LinTerm(bound));
}

}  // namespace itpa
