#include <algorithm>

#include "spacer/instrument/instrument.hpp"

namespace spacer::instrument {

using ir::VarRef;

namespace {

bool defines_next_state(const Formula& f) { return ir::has_primed(f); }

std::vector<Formula> cube_literals(const arith::Cube& c) {
  std::vector<Formula> out;
  for (const auto& a : c.poly.atoms) {
    Formula f = Formula::atom(a);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  for (const auto& [v, ph] : c.bools) {
    Formula f = Formula::boolvar(v);
    out.push_back(ph ? f : Formula::lnot(f));
  }
  return out;
}

}  // namespace

FactoredTau factor_assumptions(const BoundedProgram& bp, Granularity g) {
  FactoredTau ft;
  ft.granularity = g;
  for (const auto& [e, f] : bp.origin.edges) {
    auto cubes = arith::to_dnf(f);
    if (!cubes) throw arith::ResourceLimit("transition relation too large for DNF");
    auto& ds = ft.edges[e];
    for (size_t d = 0; d < cubes->size(); ++d) {
      FactoredTau::Disjunct dj;
      for (auto& lit : cube_literals((*cubes)[d])) {
        if (g == Granularity::StateVar && !defines_next_state(lit)) {
          dj.plain.push_back(lit);
          continue;
        }
        dj.guarded.push_back(ft.guards.size());
        ft.guards.push_back(Guard{ir::Symbol::fresh("sigma_"), e, d, lit});
      }
      ds.push_back(std::move(dj));
    }
  }
  return ft;
}

Formula FactoredTau::tau_sigma(Edge e) const {
  auto it = edges.find(e);
  if (it == edges.end()) return Formula::bottom();
  std::vector<Formula> ds;
  for (const auto& dj : it->second) {
    std::vector<Formula> cs = dj.plain;
    for (size_t i : dj.guarded) cs.push_back(Formula::lor(Formula::lnot(sigma_literal(i)), guards[i].conjunct));
    ds.push_back(Formula::land(std::move(cs)));
  }
  return Formula::lor(std::move(ds));
}

Formula FactoredTau::tau_hat(Edge e, const std::vector<bool>& selected) const {
  auto it = edges.find(e);
  if (it == edges.end()) return Formula::bottom();
  std::vector<Formula> ds;
  for (const auto& dj : it->second) {
    std::vector<Formula> cs = dj.plain;
    for (size_t i : dj.guarded)
      if (selected.at(i)) cs.push_back(guards[i].conjunct);
    ds.push_back(Formula::land(std::move(cs)));
  }
  return Formula::lor(std::move(ds));
}

std::optional<size_t> FactoredTau::index_of(ir::Symbol sigma) const {
  for (size_t i = 0; i < guards.size(); ++i)
    if (guards[i].sigma == sigma) return i;
  return std::nullopt;
}

}  // namespace spacer::instrument
