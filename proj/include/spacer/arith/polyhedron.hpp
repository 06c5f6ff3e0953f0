#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "spacer/ir/formula.hpp"

namespace spacer::arith {

// Conjunction of linear atoms. `empty` marks a syntactically detected contradiction.
struct Polyhedron {
  std::vector<ir::LinAtom> atoms;
  bool empty = false;

  static Polyhedron bottom() { return Polyhedron{{}, true}; }
  void add(const ir::LinAtom& a) { atoms.push_back(a); }
  ir::Formula to_formula() const;
  std::vector<ir::VarRef> vars() const;
  bool operator==(const Polyhedron&) const = default;
};

// A DNF disjunct: polyhedron plus Boolean literals (var, phase), sorted by var.
struct Cube {
  Polyhedron poly;
  std::vector<std::pair<ir::VarRef, bool>> bools;

  ir::Formula to_formula() const;
  std::optional<bool> bool_value(ir::VarRef v) const;
  // False if the literal contradicts an existing one.
  bool add_bool(ir::VarRef v, bool phase);
};

// Exact existential projection. Equalities are used for substitution first.
Polyhedron fm_eliminate(const std::vector<ir::VarRef>& vars, const Polyhedron& p);

// Drops tautologies, keeps the tightest of parallel bounds, detects trivial contradictions.
Polyhedron simplify(const Polyhedron& p);

// Simplex-based decision and model for a single polyhedron.
bool feasible(const Polyhedron& p);
std::optional<std::map<ir::VarRef, Rat>> poly_model(const Polyhedron& p);
bool entails(const Polyhedron& p, const ir::LinAtom& a);
// p ⊆ q
bool subsumed(const Polyhedron& p, const Polyhedron& q);
// Removes atoms implied by the remaining ones.
Polyhedron remove_redundant(const Polyhedron& p);
// Supremum of `term` over p: nullopt when unbounded, (value, attained).
std::optional<std::pair<Rat, bool>> maximize(const Polyhedron& p, const ir::LinTerm& term);

// Negation of an atom as a disjunction of atoms (Eq yields two).
std::vector<ir::LinAtom> negate(const ir::LinAtom& a);
ir::Formula atom_formula(const ir::LinAtom& a);

}  // namespace spacer::arith
