#include <algorithm>

#include "spacer/instrument/instrument.hpp"

namespace spacer::instrument {

using ir::LinTerm;
using ir::VarRef;

Formula universal_closure(const Formula& f, const std::vector<ir::Symbol>& vars) {
  const auto fv = ir::vars_of(f);
  std::vector<ir::Symbol> used;
  for (const auto& v : fv)
    if (std::find(vars.begin(), vars.end(), v.sym) != vars.end() &&
        std::find(used.begin(), used.end(), v.sym) == used.end())
      used.push_back(v.sym);
  if (used.empty()) return f;

  // ∀X≥0·f  ≡  ¬∃X·(X≥0 ∧ ¬f)
  std::vector<Formula> body{Formula::lnot(f)};
  std::vector<VarRef> elim;
  for (auto s : used) {
    for (bool primed : {false, true}) {
      VarRef v{s, primed};
      if (std::find(fv.begin(), fv.end(), v) == fv.end()) continue;
      body.push_back(Formula::le(LinTerm(0), LinTerm::var(v)));
      elim.push_back(v);
    }
  }
  auto cubes = arith::to_dnf(Formula::land(std::move(body)), 4096);
  if (!cubes) throw arith::ResourceLimit("universal closure: DNF overflow");
  std::vector<Formula> witnesses;
  for (const auto& c : *cubes) {
    arith::Cube p = c;
    p.poly = arith::fm_eliminate(elim, c.poly);
    if (p.poly.empty || !arith::feasible(p.poly)) continue;
    p.poly = arith::remove_redundant(arith::simplify(p.poly));
    witnesses.push_back(p.to_formula());
  }
  return arith::nnf(Formula::lnot(Formula::lor(std::move(witnesses))));
}

ir::Proof generalize_proof(const BoundedProgram& bp, const ir::Proof& pf, const arith::Config& cfg) {
  std::vector<ir::Symbol> cb = bp.counters;
  cb.insert(cb.end(), bp.bounds.begin(), bp.bounds.end());
  ir::Proof out(bp.origin.num_locations());
  for (uint32_t l = 0; l < pf.lemmas.size() && l < out.lemmas.size(); ++l) {
    for (const auto& phi : pf.lemmas[l]) {
      Formula g;
      try {
        g = universal_closure(phi, cb);
      } catch (const arith::ResourceLimit&) {
        continue;
      }
      if (g == phi) {
        out.add(Location{l}, g);
        continue;
      }
      if (g.is_true()) continue;
      if (g.is_false() || arith::is_unsat_result(arith::is_sat({g}, {}, cfg))) continue;
      out.add(Location{l}, g);
    }
  }
  return out;
}

}  // namespace spacer::instrument
