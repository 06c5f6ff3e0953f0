#include "spacer/check/check.hpp"

#include <sstream>

namespace spacer::check {

using ir::Formula;
using ir::Location;

namespace {

std::string edge_name(const ir::Program& p, ir::Edge e) { return p.name(e.first) + "->" + p.name(e.second); }

const std::vector<Formula>& lemmas_at(const std::vector<std::vector<Formula>>& m, Location l) {
  static const std::vector<Formula> none;
  return l.index < m.size() ? m[l.index] : none;
}

// Adds a violation unless `query` is unsatisfiable.
void expect_unsat(Report& r, const std::vector<Formula>& query, const std::string& cond, const std::string& where,
                  const arith::Config& cfg) {
  arith::SatResult res;
  try {
    res = arith::is_sat(query, {}, cfg);
  } catch (const arith::ResourceLimit&) {
    res = arith::Unknown{"resource limit"};
  }
  if (auto* s = std::get_if<arith::Sat>(&res)) {
    r.add({cond, where, s->model});
  } else if (std::holds_alternative<arith::Unknown>(res)) {
    r.add({"unknown", cond + " at " + where, std::nullopt});
  }
}

void check_lemma_shape(Report& r, const ir::Program& p, const std::vector<std::vector<Formula>>& m) {
  for (uint32_t i = 0; i < m.size(); ++i) {
    if (i >= p.num_locations()) {
      r.add({"shape", "location #" + std::to_string(i), std::nullopt});
      continue;
    }
    for (const auto& f : m[i])
      if (ir::has_primed(f)) r.add({"shape", p.name(Location{i}), std::nullopt});
  }
}

void check_inductive(Report& r, const ir::Program& p, const std::vector<std::vector<Formula>>& m,
                     const arith::Config& cfg) {
  expect_unsat(r, {Formula::lnot(Formula::land(lemmas_at(m, p.init)))}, "initiated", p.name(p.init), cfg);
  for (const auto& [e, tau] : p.edges) {
    if (tau.is_false()) continue;
    Formula post = Formula::land(lemmas_at(m, e.second));
    if (post.is_true()) continue;
    expect_unsat(r, {Formula::land(lemmas_at(m, e.first)), tau, Formula::lnot(ir::prime(post))}, "inductive",
                 edge_name(p, e), cfg);
  }
}

}  // namespace

std::string Report::describe(const ir::Program& p) const {
  std::ostringstream os;
  if (ok) return "ok\n";
  for (const auto& v : violations) {
    os << "violation: " << v.condition << " at " << v.where << "\n";
    if (!v.witness) continue;
    os << "  countermodel:";
    for (const auto& d : p.vars) {
      ir::VarRef c{d.sym, false}, n{d.sym, true};
      if (v.witness->values.count(c)) os << " " << d.sym.name() << "=" << spacer::to_string(v.witness->value(c));
      if (v.witness->values.count(n)) os << " " << d.sym.name() << "'=" << spacer::to_string(v.witness->value(n));
    }
    os << "\n";
  }
  return os.str();
}

Report check_proof(const ir::Program& p, const ir::Proof& pf, const arith::Config& cfg) {
  Report r;
  check_lemma_shape(r, p, pf.lemmas);
  if (!r.ok) return r;
  expect_unsat(r, {Formula::land(lemmas_at(pf.lemmas, p.error))}, "safe", p.name(p.error), cfg);
  check_inductive(r, p, pf.lemmas, cfg);
  return r;
}

Report check_mis(const ir::Program& p, const std::vector<std::vector<Formula>>& inv, const arith::Config& cfg) {
  Report r;
  check_lemma_shape(r, p, inv);
  if (!r.ok) return r;
  check_inductive(r, p, inv, cfg);
  return r;
}

Report check_cex(const ir::Program& p, const ir::Counterexample& cex) {
  Report r;
  if (cex.path.empty() || cex.path.front() != p.init || cex.path.back() != p.error) {
    r.add({"path", "endpoints", std::nullopt});
    return r;
  }
  for (Location l : cex.path)
    if (l.index >= p.num_locations()) {
      r.add({"path", "location #" + std::to_string(l.index), std::nullopt});
      return r;
    }
  if (cex.states.size() != cex.path.size()) {
    r.add({"state", "length " + std::to_string(cex.states.size()) + " for path of " + std::to_string(cex.path.size()),
           std::nullopt});
    return r;
  }
  for (size_t i = 0; i < cex.states.size(); ++i)
    for (const auto& d : p.vars)
      if (!cex.states[i].count(d.sym)) {
        r.add({"state", "step " + std::to_string(i) + " misses " + d.sym.name(), std::nullopt});
        return r;
      }
  for (size_t i = 0; i + 1 < cex.path.size(); ++i) {
    ir::Edge e{cex.path[i], cex.path[i + 1]};
    if (!ir::eval(p.tau(e.first, e.second), cex.states[i], &cex.states[i + 1])) {
      arith::Model m;
      for (const auto& [s, v] : cex.states[i]) m.values[{s, false}] = v;
      for (const auto& [s, v] : cex.states[i + 1]) m.values[{s, true}] = v;
      r.add({"step", std::to_string(i) + " " + edge_name(p, e), m});
    }
  }
  return r;
}

Report check_abstraction(const ir::Program& p1, const ir::Program& p2, const arith::Config& cfg) {
  Report r;
  if (p1.locations != p2.locations) {
    r.add({"shape", "location sets differ", std::nullopt});
    return r;
  }
  for (const auto& [e, tau] : p1.edges) {
    if (tau.is_false()) continue;
    expect_unsat(r, {tau, Formula::lnot(p2.tau(e.first, e.second))}, "entailment", edge_name(p1, e), cfg);
  }
  return r;
}

}  // namespace spacer::check
