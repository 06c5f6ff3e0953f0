#include "spacer/instrument/instrument.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace spacer::instrument {

using ir::LinTerm;
using ir::Symbol;
using ir::VarRef;

namespace {

LinTerm cur(Symbol s) { return LinTerm::var(VarRef{s, false}); }
LinTerm nxt(Symbol s) { return LinTerm::var(VarRef{s, true}); }

Symbol unique_name(const std::string& base, std::set<std::string>& taken) {
  std::string name = base;
  for (int i = 1; taken.count(name); ++i) name = base + "_" + std::to_string(i);
  taken.insert(name);
  return Symbol::intern(name);
}

}  // namespace

Formula BoundedProgram::tau_b_at(Location a, Location b) const {
  auto it = tau_b.find({a, b});
  return it == tau_b.end() ? Formula::top() : it->second;
}

BoundedProgram instrument(const Program& p) { return instrument(p, compute_wto(p)); }

BoundedProgram instrument(const Program& p, const Wto& w) {
  BoundedProgram bp;
  bp.origin = p;
  bp.base = p;
  bp.wto = w;

  std::set<std::string> taken(p.locations.begin(), p.locations.end());
  for (const auto& v : p.vars) taken.insert(v.sym.name());
  for (Location h : w.heads) {
    Symbol c = unique_name("c_" + p.name(h), taken);
    Symbol b = unique_name("b_" + p.name(h), taken);
    bp.counters.push_back(c);
    bp.bounds.push_back(b);
    bp.ctr[h] = c;
    bp.bd[c] = b;
    bp.base.vars.push_back({c, ir::Sort::Rat, ir::VarKind::Counter});
    bp.base.vars.push_back({b, ir::Sort::Rat, ir::VarKind::Bound});
  }

  for (const auto& [e, f] : p.edges) {
    if (f.is_false()) continue;
    auto [li, lj] = e;
    std::vector<Formula> x;
    const auto& hi = w.hds[li.index];
    const auto& hj = w.hds[lj.index];
    if (!w.before(li, lj)) {
      if (!bp.ctr.count(lj)) throw std::logic_error("back-edge does not target a component head");
      Symbol c = bp.ctr.at(lj), b = bp.bd.at(c);
      x.push_back(Formula::le(LinTerm(0), nxt(c)));
      x.push_back(Formula::eq(nxt(c), cur(c) - LinTerm(1)));
      x.push_back(Formula::le(cur(c), cur(b)));
    }
    for (Location h : hi)
      if (std::find(hj.begin(), hj.end(), h) == hj.end()) x.push_back(Formula::eq(cur(bp.ctr.at(h)), LinTerm(0)));
    for (Location h : hj)
      if (h != lj) x.push_back(Formula::eq(nxt(bp.ctr.at(h)), cur(bp.ctr.at(h))));
    if (x.empty()) continue;
    Formula tb = Formula::land(std::move(x));
    bp.tau_b[e] = tb;
    bp.base.set_tau(li, lj, Formula::land(f, tb));
  }
  return bp;
}

UnderApprox UnderApprox::uniform(const BoundedProgram& bp, size_t num_sigma, bool all_selected, uint32_t k) {
  UnderApprox u;
  u.sigma_hat.assign(num_sigma, all_selected);
  for (Symbol b : bp.bounds) u.bvals[b] = k;
  return u;
}

Formula UnderApprox::bound_formula() const {
  std::vector<Formula> out;
  for (const auto& [b, k] : bvals) out.push_back(Formula::le(cur(b), LinTerm(Rat(k))));
  return Formula::land(std::move(out));
}

size_t UnderApprox::selected() const { return static_cast<size_t>(std::count(sigma_hat.begin(), sigma_hat.end(), true)); }

Program adapt(const Program& u, const std::map<Edge, Formula>& tau_new) {
  Program out = u;
  for (const auto& [e, f] : u.edges) {
    auto it = tau_new.find(e);
    if (it != tau_new.end()) out.set_tau(e.first, e.second, Formula::land(f, it->second));
  }
  return out;
}

ir::Counterexample project_cex(const BoundedProgram& bp, const ir::Counterexample& cex) {
  ir::Counterexample out;
  out.path = cex.path;
  for (const auto& s : cex.states) out.states.push_back(ir::restrict_state(s, bp.origin.vars));
  const Program& p = bp.origin;
  bool ok = !out.path.empty() && out.path.front() == p.init && out.path.back() == p.error &&
            out.states.size() == out.path.size();
  for (size_t i = 0; ok && i + 1 < out.path.size(); ++i)
    ok = ir::eval(p.tau(out.path[i], out.path[i + 1]), out.states[i], &out.states[i + 1]);
  if (!ok) throw std::logic_error("projected counterexample does not replay on the original program");
  return out;
}

}  // namespace spacer::instrument
