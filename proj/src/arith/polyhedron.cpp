#include "spacer/arith/polyhedron.hpp"

#include <algorithm>
#include <map>

#include "spacer/arith/simplex.hpp"

namespace spacer::arith {

using ir::Formula;
using ir::LinAtom;
using ir::LinTerm;
using ir::Rel;
using ir::VarRef;

Formula atom_formula(const LinAtom& a) { return Formula::atom(a); }

Formula Polyhedron::to_formula() const {
  if (empty) return Formula::bottom();
  std::vector<Formula> fs;
  fs.reserve(atoms.size());
  for (const auto& a : atoms) fs.push_back(Formula::atom(a));
  return Formula::land(std::move(fs));
}

std::vector<VarRef> Polyhedron::vars() const {
  std::vector<VarRef> out;
  for (const auto& a : atoms)
    for (const auto& [v, c] : a.term.coeffs()) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Formula Cube::to_formula() const {
  std::vector<Formula> fs{poly.to_formula()};
  for (const auto& [v, b] : bools) fs.push_back(b ? Formula::boolvar(v) : Formula::lnot(Formula::boolvar(v)));
  return Formula::land(std::move(fs));
}

std::optional<bool> Cube::bool_value(VarRef v) const {
  auto it = std::lower_bound(bools.begin(), bools.end(), v, [](const auto& e, VarRef x) { return e.first < x; });
  if (it != bools.end() && it->first == v) return it->second;
  return std::nullopt;
}

bool Cube::add_bool(VarRef v, bool phase) {
  auto it = std::lower_bound(bools.begin(), bools.end(), v, [](const auto& e, VarRef x) { return e.first < x; });
  if (it != bools.end() && it->first == v) return it->second == phase;
  bools.emplace(it, v, phase);
  return true;
}

std::vector<LinAtom> negate(const LinAtom& a) {
  LinTerm t = -a.term;
  switch (a.rel) {
    case Rel::Le: return {*ir::normalize(t, Rel::Lt)};
    case Rel::Lt: return {*ir::normalize(t, Rel::Le)};
    case Rel::Eq: return {*ir::normalize(a.term, Rel::Lt), *ir::normalize(t, Rel::Lt)};
  }
  return {};
}

// ---------------------------------------------------------------- simplify

namespace {

using Key = std::vector<std::pair<VarRef, Rat>>;

struct Interval {
  std::optional<std::pair<Rat, bool>> lo, hi;  // (value, strict)
  size_t order;
};

}  // namespace

Polyhedron simplify(const Polyhedron& p) {
  if (p.empty) return p;
  std::map<Key, Interval> box;
  std::vector<const Key*> order;
  for (const auto& raw : p.atoms) {
    if (raw.term.is_constant()) {
      if (!ir::holds(raw.term.constant(), raw.rel)) return Polyhedron::bottom();
      continue;
    }
    auto a = ir::normalize(raw.term, raw.rel);
    Key key = a->term.coeffs();
    int s = 1;
    if (key.front().second < 0) {
      s = -1;
      for (auto& e : key) e.second = -e.second;
    }
    auto [it, inserted] = box.try_emplace(std::move(key), Interval{{}, {}, box.size()});
    if (inserted) order.push_back(&it->first);
    Interval& iv = it->second;
    const Rat& c = a->term.constant();
    bool strict = a->rel == Rel::Lt;
    auto tighten_hi = [&](Rat v, bool st) {
      if (!iv.hi || v < iv.hi->first || (v == iv.hi->first && st)) iv.hi = {v, st};
    };
    auto tighten_lo = [&](Rat v, bool st) {
      if (!iv.lo || v > iv.lo->first || (v == iv.lo->first && st)) iv.lo = {v, st};
    };
    if (a->rel == Rel::Eq) {
      tighten_hi(-c, false);
      tighten_lo(-c, false);
    } else if (s > 0) {
      tighten_hi(-c, strict);
    } else {
      tighten_lo(c, strict);
    }
  }
  Polyhedron out;
  for (const Key* k : order) {
    const Interval& iv = box.at(*k);
    LinTerm w;
    for (const auto& [v, c] : *k) w.add(v, c);
    if (iv.lo && iv.hi) {
      const auto& [l, ls] = *iv.lo;
      const auto& [u, us] = *iv.hi;
      if (l > u || (l == u && (ls || us))) return Polyhedron::bottom();
      if (l == u) {
        out.atoms.push_back(*ir::normalize(w - LinTerm(l), Rel::Eq));
        continue;
      }
    }
    if (iv.lo) out.atoms.push_back(*ir::normalize(LinTerm(iv.lo->first) - w, iv.lo->second ? Rel::Lt : Rel::Le));
    if (iv.hi) out.atoms.push_back(*ir::normalize(w - LinTerm(iv.hi->first), iv.hi->second ? Rel::Lt : Rel::Le));
  }
  return out;
}

// ---------------------------------------------------------------- FM

Polyhedron fm_eliminate(const std::vector<VarRef>& vars, const Polyhedron& p) {
  Polyhedron cur = simplify(p);
  std::vector<VarRef> remaining = vars;
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());
  while (!remaining.empty() && !cur.empty) {
    // equality substitution
    bool substituted = false;
    for (size_t i = 0; i < cur.atoms.size() && !substituted; ++i) {
      if (cur.atoms[i].rel != Rel::Eq) continue;
      for (const auto& [v, a] : cur.atoms[i].term.coeffs()) {
        if (!std::binary_search(remaining.begin(), remaining.end(), v)) continue;
        LinTerm rest = cur.atoms[i].term;
        rest.add(v, -a);
        LinTerm def = rest * (Rat(-1) / a);
        VarRef x = v;
        Polyhedron next;
        for (size_t j = 0; j < cur.atoms.size(); ++j) {
          if (j == i) continue;
          next.atoms.push_back({cur.atoms[j].term.substitute(x, def), cur.atoms[j].rel});
        }
        cur = simplify(next);
        remaining.erase(std::find(remaining.begin(), remaining.end(), x));
        substituted = true;
        break;
      }
    }
    if (substituted) continue;

    // pick the variable with the fewest generated pairs
    size_t best = 0;
    long best_cost = -1;
    for (size_t k = 0; k < remaining.size(); ++k) {
      long pos = 0, negc = 0;
      for (const auto& a : cur.atoms) {
        Rat c = a.term.coeff(remaining[k]);
        if (c > 0) ++pos;
        if (c < 0) ++negc;
      }
      long cost = pos * negc - pos - negc;
      if (best_cost == -1 || cost < best_cost) {
        best_cost = cost;
        best = k;
      }
    }
    VarRef v = remaining[best];
    remaining.erase(remaining.begin() + static_cast<long>(best));
    std::vector<const LinAtom*> ups, lows;
    Polyhedron next;
    for (const auto& a : cur.atoms) {
      Rat c = a.term.coeff(v);
      if (c > 0)
        ups.push_back(&a);
      else if (c < 0)
        lows.push_back(&a);
      else
        next.atoms.push_back(a);
    }
    for (const LinAtom* u : ups) {
      Rat au = u->term.coeff(v);
      for (const LinAtom* l : lows) {
        Rat al = l->term.coeff(v);
        LinTerm t = u->term * Rat(-al) + l->term * au;
        Rel r = (u->rel == Rel::Lt || l->rel == Rel::Lt) ? Rel::Lt : Rel::Le;
        next.atoms.push_back({std::move(t), r});
      }
    }
    cur = simplify(next);
  }
  return cur;
}

// ---------------------------------------------------------------- LP

namespace {

class Lp {
 public:
  explicit Lp(const Polyhedron& p, size_t skip = static_cast<size_t>(-1)) {
    for (size_t i = 0; i < p.atoms.size(); ++i)
      if (i != skip) add(p.atoms[i], static_cast<int>(i));
  }

  bool add(const LinAtom& a, int reason) {
    const auto& cs = a.term.coeffs();
    int col;
    Rat scale = 1;
    if (cs.size() == 1) {
      col = var_col(cs[0].first);
      scale = cs[0].second;
    } else {
      Simplex::Row row;
      for (const auto& [v, c] : cs) row.emplace_back(var_col(v), c);
      std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      col = sx_.add_row(row);
    }
    // scale*col + k REL 0
    Rat bound = -a.term.constant() / scale;
    bool up = scale > 0;
    bool ok = true;
    switch (a.rel) {
      case Rel::Le:
        ok = up ? sx_.assert_upper(col, {bound, 0}, reason) : sx_.assert_lower(col, {bound, 0}, reason);
        break;
      case Rel::Lt:
        ok = up ? sx_.assert_upper(col, {bound, -1}, reason) : sx_.assert_lower(col, {bound, 1}, reason);
        break;
      case Rel::Eq:
        ok = sx_.assert_upper(col, {bound, 0}, reason) && sx_.assert_lower(col, {bound, 0}, reason);
        break;
    }
    if (!ok) infeasible_ = true;
    return ok;
  }

  bool check() { return !infeasible_ && (infeasible_ = !sx_.check(), !infeasible_); }

  std::map<VarRef, Rat> model() const {
    std::map<VarRef, Rat> m;
    Rat d = sx_.concrete_delta();
    for (const auto& [v, c] : cols_) m[v] = sx_.concrete_value(c, d);
    return m;
  }

 private:
  int var_col(VarRef v) {
    auto it = cols_.find(v);
    if (it != cols_.end()) return it->second;
    int c = sx_.add_var();
    cols_.emplace(v, c);
    return c;
  }

  Simplex sx_;
  std::map<VarRef, int> cols_;
  bool infeasible_ = false;
};

}  // namespace

bool feasible(const Polyhedron& p) {
  if (p.empty) return false;
  Lp lp(p);
  return lp.check();
}

std::optional<std::map<VarRef, Rat>> poly_model(const Polyhedron& p) {
  if (p.empty) return std::nullopt;
  Lp lp(p);
  if (!lp.check()) return std::nullopt;
  return lp.model();
}

bool entails(const Polyhedron& p, const LinAtom& a) {
  if (p.empty) return true;
  for (const auto& n : negate(a)) {
    Lp lp(p);
    lp.add(n, -1);
    if (lp.check()) return false;
  }
  return true;
}

bool subsumed(const Polyhedron& p, const Polyhedron& q) {
  if (p.empty) return true;
  if (q.empty) return false;
  for (const auto& a : q.atoms) {
    if (std::find(p.atoms.begin(), p.atoms.end(), a) != p.atoms.end()) continue;
    if (!entails(p, a)) return false;
  }
  return true;
}

Polyhedron remove_redundant(const Polyhedron& p) {
  if (p.empty) return p;
  Polyhedron cur = p;
  for (size_t i = cur.atoms.size(); i-- > 0;) {
    Polyhedron rest = cur;
    rest.atoms.erase(rest.atoms.begin() + static_cast<long>(i));
    if (entails(rest, cur.atoms[i])) cur = std::move(rest);
  }
  return cur;
}

std::optional<std::pair<Rat, bool>> maximize(const Polyhedron& p, const LinTerm& term) {
  if (p.empty) return std::nullopt;
  VarRef s{ir::Symbol::intern("__objective"), false};
  Polyhedron q = p;
  q.atoms.push_back(*ir::normalize(LinTerm::var(s) - term, Rel::Eq));
  std::vector<VarRef> others = p.vars();
  Polyhedron r = fm_eliminate(others, q);
  if (r.empty) return std::nullopt;
  std::optional<std::pair<Rat, bool>> best;
  for (const auto& a : r.atoms) {
    Rat c = a.term.coeff(s);
    if (c > 0 || a.rel == Rel::Eq) {
      Rat v = -a.term.constant() / c;
      bool attained = a.rel != Rel::Lt;
      if (!best || v < best->first || (v == best->first && !attained)) best = {v, attained};
    }
  }
  return best;
}

}  // namespace spacer::arith
