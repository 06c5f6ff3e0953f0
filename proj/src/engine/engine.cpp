#include "spacer/engine/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>


namespace spacer::engine {

using instrument::UnderApprox;
using ir::Location;
using ir::Symbol;
using ir::VarRef;

namespace {

Formula boolean(Symbol s) { return Formula::boolvar(VarRef{s, false}); }

const std::vector<Formula>& at(const InvariantMap& m, Location l) {
  static const std::vector<Formula> none;
  return l.index < m.size() ? m[l.index] : none;
}

arith::SatResult check_or_throw(arith::Session& s, const std::vector<Formula>& assumptions) {
  auto r = s.check(assumptions);
  if (auto* u = std::get_if<arith::Unknown>(&r)) throw arith::ResourceLimit(u->reason);
  return r;
}

std::vector<Formula> sigma_literals(const instrument::FactoredTau& ft, const std::vector<bool>& sel, bool selected) {
  std::vector<Formula> out;
  for (size_t i = 0; i < ft.size(); ++i)
    if (sel[i] == selected) out.push_back(ft.sigma_literal(i));
  return out;
}

size_t count_lemmas(const InvariantMap& m) {
  size_t n = 0;
  for (const auto& v : m) n += v.size();
  return n;
}

}  // namespace

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Safe: return "SAFE";
    case Outcome::Unsafe: return "UNSAFE";
    case Outcome::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string trace_header() { return "iteration\tresult\tsigma_hat\tsigma_all\tbound\tproof_lemmas\tinvariants\tpolyhedra"; }

std::string trace_line(const IterationRecord& r) {
  std::ostringstream os;
  os << r.iteration << '\t' << r.result << '\t' << r.sigma_hat << '\t' << r.sigma_all << '\t' << r.bound << '\t'
     << r.proof_lemmas << '\t' << r.invariants << '\t' << r.polyhedra;
  return os.str();
}

std::string fingerprint(const ir::Counterexample& cex) {
  std::ostringstream os;
  for (size_t i = 0; i < cex.path.size(); ++i) {
    os << cex.path[i].index << ':';
    if (i < cex.states.size())
      for (const auto& [s, v] : cex.states[i]) os << s.name() << '=' << spacer::to_string(v) << ',';
    os << ';';
  }
  return os.str();
}

Context prepare(const ir::Program& p, instrument::Granularity g, const arith::Config& cfg) {
  Context cx;
  cx.bp = instrument::instrument(p);
  cx.ft = instrument::factor_assumptions(cx.bp, g);
  cx.arith = cfg;
  return cx;
}

UnderApprox init_u(const Context& cx) { return UnderApprox::uniform(cx.bp, cx.ft.size(), true, 0); }

UnderApprox next_u(const UnderApprox& u, std::vector<bool> sigma_hat) {
  UnderApprox n = u;
  n.sigma_hat = std::move(sigma_hat);
  for (auto& [b, k] : n.bvals) ++k;
  return n;
}

// ---------------------------------------------------------------- ExtractInvs

InvariantMap extract_invs(const ir::Program& p, const InvariantMap& inv, const InvariantMap& candidates,
                          const arith::Config& cfg) {
  struct Lemma {
    Location loc;
    Formula f;
    Formula a, b;
  };
  std::vector<Lemma> lemmas;
  std::vector<std::vector<size_t>> by_loc(p.num_locations());
  for (uint32_t l = 0; l < p.num_locations(); ++l)
    for (const auto& f : at(candidates, Location{l})) {
      by_loc[l].push_back(lemmas.size());
      lemmas.push_back({Location{l}, f, boolean(Symbol::fresh("inv_a")), boolean(Symbol::fresh("inv_b"))});
    }
  InvariantMap out(p.num_locations());
  if (lemmas.empty()) return out;

  // One disjunct per edge: some lemma at the target fails after a step from states satisfying
  // 𝒥 and the enabled lemmas at the source. Initiation is an extra disjunct at the initial location.
  std::vector<Formula> cases;
  for (const auto& [e, tau] : p.edges) {
    if (tau.is_false() || by_loc[e.second.index].empty()) continue;
    std::vector<Formula> conj{Formula::land(at(inv, e.first)), tau};
    for (size_t k : by_loc[e.first.index]) conj.push_back(Formula::implies(lemmas[k].a, lemmas[k].f));
    std::vector<Formula> fail;
    for (size_t k : by_loc[e.second.index])
      fail.push_back(Formula::land(lemmas[k].b, Formula::lnot(ir::prime(lemmas[k].f))));
    conj.push_back(Formula::lor(std::move(fail)));
    cases.push_back(Formula::land(std::move(conj)));
  }
  {
    std::vector<Formula> fail;
    for (size_t k : by_loc[p.init.index]) fail.push_back(Formula::land(lemmas[k].b, Formula::lnot(lemmas[k].f)));
    if (!fail.empty()) cases.push_back(Formula::lor(std::move(fail)));
  }
  Formula background = Formula::lor(std::move(cases));

  auto session = cfg.open();
  session->add(background);
  std::vector<bool> removed(lemmas.size(), false);
  std::vector<Formula> m;  // ¬B of removed lemmas
  for (;;) {
    std::vector<Formula> t = m, y;
    for (size_t k = 0; k < lemmas.size(); ++k)
      if (!removed[k]) {
        t.push_back(lemmas[k].a);
        y.push_back(Formula::lnot(lemmas[k].b));
      }
    auto s = arith::mus(*session, {background}, t, y);
    if (s.empty()) break;
    for (const auto& lit : s)
      for (size_t k = 0; k < lemmas.size(); ++k)
        if (!removed[k] && Formula::lnot(lemmas[k].b) == lit) {
          removed[k] = true;
          m.push_back(lit);
        }
  }
  for (size_t k = 0; k < lemmas.size(); ++k)
    if (!removed[k]) out[lemmas[k].loc.index].push_back(lemmas[k].f);
  return out;
}

// ---------------------------------------------------------------- Abstract

std::vector<bool> abstract_op(const Context& cx, const UnderApprox& u, const InvariantMap& inv, const ir::Proof& pf) {
  const auto& p = cx.bp.base;
  const auto& ft = cx.ft;
  Formula bound = u.bound_formula();

  std::vector<std::vector<Formula>> markers(p.num_locations());
  std::map<Formula, std::pair<Location, size_t>> marker_of;
  for (uint32_t l = 0; l < p.num_locations(); ++l)
    for (size_t k = 0; k < pf.at(Location{l}).size(); ++k) {
      Formula mk = boolean(Symbol::fresh("lemma_m"));
      markers[l].push_back(mk);
      marker_of.emplace(mk, std::make_pair(Location{l}, k));
    }

  struct Query {
    Location from;
    std::unique_ptr<arith::Session> session;
  };
  std::vector<Query> queries;
  std::set<std::pair<uint32_t, size_t>> goals;
  std::vector<std::pair<Location, size_t>> pending;
  for (size_t k = 0; k < pf.at(p.error).size(); ++k) pending.push_back({p.error, k});
  std::vector<bool> chosen(ft.size(), false);
  auto selected = sigma_literals(ft, u.sigma_hat, true);

  while (!pending.empty()) {
    auto [j, k] = pending.back();
    pending.pop_back();
    if (!goals.insert({j.index, k}).second) continue;
    Formula goal = pf.at(j)[k];
    if (j == p.init) return u.sigma_hat;
    for (Location i : p.predecessors(j)) {
      ir::Edge e{i, j};
      std::vector<Formula> q{Formula::land(at(inv, i)), ft.tau_sigma(e), cx.bp.tau_b_at(i, j), bound,
                             ir::prime(Formula::land(at(inv, j))), Formula::lnot(ir::prime(goal))};
      for (size_t h = 0; h < pf.at(i).size(); ++h) q.push_back(Formula::implies(markers[i.index][h], pf.at(i)[h]));
      auto s = cx.arith.open();
      for (auto& f : q) s->add(f);
      std::vector<Formula> assumed = selected;
      assumed.insert(assumed.end(), markers[i.index].begin(), markers[i.index].end());
      auto r = check_or_throw(*s, assumed);
      auto* un = std::get_if<arith::Unsat>(&r);
      if (!un) return u.sigma_hat;
      for (const auto& c : un->core) {
        if (auto it = marker_of.find(c); it != marker_of.end()) {
          pending.push_back(it->second);
        } else if (c.kind() == Formula::Kind::Bool) {
          if (auto idx = ft.index_of(c.boolvar_ref().sym)) chosen[*idx] = true;
        }
      }
      queries.push_back({i, std::move(s)});
    }
  }

  // Deletion pass: drop assumptions one at a time while every goal query stays unsat.
  auto needed_markers = [&](Location i) {
    std::vector<Formula> out;
    for (size_t h = 0; h < markers[i.index].size(); ++h)
      if (goals.count({i.index, h})) out.push_back(markers[i.index][h]);
    return out;
  };
  for (size_t idx = 0; idx < ft.size(); ++idx) {
    if (!chosen[idx]) continue;
    chosen[idx] = false;
    auto trial = sigma_literals(ft, chosen, true);
    bool ok = true;
    for (auto& q : queries) {
      auto assumed = trial;
      auto nm = needed_markers(q.from);
      assumed.insert(assumed.end(), nm.begin(), nm.end());
      if (!arith::is_unsat_result(check_or_throw(*q.session, assumed))) {
        ok = false;
        break;
      }
    }
    if (!ok) chosen[idx] = true;
  }
  return chosen;
}

// ---------------------------------------------------------------- Refine

std::variant<Feasible, Refined> refine(const Context& cx, const UnderApprox& u, const ir::Counterexample& cex,
                                       Strategy strategy) {
  const auto& p = cx.bp.base;
  const auto& ft = cx.ft;
  std::set<Symbol> state_vars;
  for (const auto& d : p.vars) state_vars.insert(d.sym);
  auto copy = [](Symbol s, size_t i) { return Symbol::intern(s.name() + "@" + std::to_string(i)); };

  auto session = cx.arith.open();
  for (size_t i = 0; i + 1 < cex.path.size(); ++i) {
    ir::Edge e{cex.path[i], cex.path[i + 1]};
    Formula step = Formula::land(ft.tau_sigma(e), cx.bp.tau_b_at(e.first, e.second));
    session->add(ir::rename(step, [&](VarRef v) {
      if (!state_vars.count(v.sym)) return v;
      return VarRef{copy(v.sym, v.primed ? i + 1 : i), false};
    }));
  }
  auto fixed = sigma_literals(ft, u.sigma_hat, true);
  auto open = sigma_literals(ft, u.sigma_hat, false);
  auto assumed = fixed;
  assumed.insert(assumed.end(), open.begin(), open.end());
  auto r = check_or_throw(*session, assumed);
  if (auto* s = std::get_if<arith::Sat>(&r)) {
    ir::Counterexample full{cex.path, {}};
    for (size_t i = 0; i < cex.path.size(); ++i) {
      ir::State st;
      for (const auto& d : p.vars) st[d.sym] = s->model.value(VarRef{copy(d.sym, i), false});
      full.states.push_back(std::move(st));
    }
    return Feasible{instrument::project_cex(cx.bp, full)};
  }
  if (strategy == Strategy::Pba) return Refined{std::vector<bool>(ft.size(), true)};
  std::vector<Formula> core;
  for (const auto& c : std::get<arith::Unsat>(r).core)
    if (std::find(open.begin(), open.end(), c) != open.end()) core.push_back(c);
  core = arith::shrink_core(*session, fixed, core);
  Refined out{u.sigma_hat};
  for (const auto& c : core)
    if (auto idx = ft.index_of(c.boolvar_ref().sym)) out.sigma_hat[*idx] = true;
  if (core.empty()) std::fill(out.sigma_hat.begin(), out.sigma_hat.end(), true);
  return out;
}

// ---------------------------------------------------------------- main loop

Verdict run(const ir::Program& p, const EngineConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  Verdict v;
  arith::Config acfg = cfg.arith;
  solve::Options sopt;
  sopt.max_polyhedra = cfg.limit_polyhedra;
  sopt.templates = cfg.templates;
  if (cfg.limit_seconds) {
    auto dl = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(*cfg.limit_seconds));
    acfg.limits.deadline = dl;
    sopt.deadline = dl;
  }
  if (cfg.trace) *cfg.trace << trace_header() << '\n';

  auto finish = [&](Verdict& out) -> Verdict& {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  Context cx;
  try {
    cx = prepare(p, cfg.granularity, acfg);
  } catch (const arith::ResourceLimit& e) {
    v.reason = e.what();
    return finish(v);
  }
  const auto& base = cx.bp.base;
  v.sigma_all = cx.ft.size();
  InvariantMap inv(base.num_locations());
  UnderApprox u = init_u(cx);

  for (size_t iter = 1;; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.sigma_all = cx.ft.size();
    rec.sigma_hat = u.selected();
    rec.sigma_set = u.sigma_hat;
    rec.bound = u.bvals.empty() ? 0 : u.bvals.begin()->second;
    v.bound = rec.bound;
    v.sigma_hat = rec.sigma_hat;
    auto emit = [&](const std::string& result) {
      rec.result = result;
      rec.invariants = count_lemmas(inv);
      v.history.push_back(rec);
      if (cfg.trace) *cfg.trace << trace_line(rec) << '\n' << std::flush;
    };
    try {
      auto res = solve::solve(solve::make_problem(cx.ft, cx.bp, u, inv), sopt);
      if (auto* un = std::get_if<solve::Unknown>(&res)) {
        emit("unknown");
        v.reason = un->reason;
        v.invariants = inv;
        return finish(v);
      }
      if (auto* safe = std::get_if<solve::Safe>(&res)) {
        rec.polyhedra = safe->polyhedra;
        rec.proof_lemmas = safe->proof.size();
        v.peak_polyhedra = std::max(v.peak_polyhedra, safe->polyhedra);
        auto found = extract_invs(base, inv, safe->proof.lemmas, acfg);
        for (uint32_t l = 0; l < base.num_locations(); ++l)
          for (const auto& f : found[l])
            if (std::find(inv[l].begin(), inv[l].end(), f) == inv[l].end()) inv[l].push_back(f);
        bool closed = arith::is_unsat_result(arith::is_sat({Formula::land(inv[base.error.index])}, {}, acfg));
        if (closed) {
          emit("safe");
          v.invariants = inv;
          ir::Proof ip;
          ip.lemmas = inv;
          ir::Proof proof = instrument::generalize_proof(cx.bp, ip, acfg);
          auto rep = check::check_proof(p, proof, acfg);
          if (!rep.ok) {
            v.reason = "generalized proof failed validation";
            return finish(v);
          }
          v.outcome = Outcome::Safe;
          v.proof = std::move(proof);
          return finish(v);
        }
        std::vector<bool> next = u.sigma_hat;
        if (cfg.strategy != Strategy::Concrete) next = abstract_op(cx, u, inv, safe->proof);
        emit("safe");
        if (rec.bound + 1 > cfg.max_bound) {
          v.reason = "bound limit reached";
          v.invariants = inv;
          return finish(v);
        }
        u = next_u(u, std::move(next));
        continue;
      }
      auto& unsafe = std::get<solve::Unsafe>(res);
      rec.polyhedra = unsafe.polyhedra;
      v.peak_polyhedra = std::max(v.peak_polyhedra, unsafe.polyhedra);
      auto ref = refine(cx, u, unsafe.cex, cfg.strategy);
      if (auto* f = std::get_if<Feasible>(&ref)) {
        emit("unsafe");
        auto rep = check::check_cex(p, f->cex);
        if (!rep.ok) {
          v.reason = "counterexample failed validation";
          return finish(v);
        }
        v.outcome = Outcome::Unsafe;
        v.cex = std::move(f->cex);
        return finish(v);
      }
      rec.fingerprint = fingerprint(unsafe.cex);
      emit("spurious");
      u.sigma_hat = std::get<Refined>(ref).sigma_hat;
    } catch (const arith::ResourceLimit& e) {
      emit("unknown");
      v.reason = e.what();
      v.invariants = inv;
      return finish(v);
    }
  }
}

}  // namespace spacer::engine
