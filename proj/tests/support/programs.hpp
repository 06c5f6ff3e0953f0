#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spacer/instrument/instrument.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"

namespace testsupport {

using spacer::ir::Location;
using spacer::ir::Program;

inline LinTerm cur(const std::string& n) { return LinTerm::var(VarRef{Symbol::intern(n), false}); }
inline LinTerm nxt(const std::string& n) { return LinTerm::var(VarRef{Symbol::intern(n), true}); }
inline LinTerm num(long c) { return LinTerm(Rat(c)); }

inline Program make_program(const std::vector<std::string>& locs, const std::vector<std::string>& vars) {
  Program p;
  p.locations = locs;
  p.init = Location{0};
  p.error = Location{static_cast<uint32_t>(locs.size() - 1)};
  for (const auto& v : vars) p.vars.push_back({Symbol::intern(v), spacer::ir::Sort::Rat, spacer::ir::VarKind::Program});
  return p;
}

inline std::vector<VarRef> vars_of_program(const Program& p) {
  std::vector<VarRef> out;
  for (const auto& d : p.vars) out.push_back(VarRef{d.sym, false});
  return out;
}

// Arbitrary transition formula over vars and their primed copies.
inline Formula random_tau(Gen& g, const std::vector<std::string>& names, int atoms) {
  auto cv = vars_named(names), nv = vars_named(names, true);
  std::vector<VarRef> all = cv;
  all.insert(all.end(), nv.begin(), nv.end());
  return g.formula(all, atoms);
}

// ≤4 locations, ≤3 variables, arbitrary edges respecting the init/error side conditions.
inline Program random_small_program(Gen& g) {
  int nl = g.range(2, 4), nv = g.range(1, 3);
  std::vector<std::string> locs, names;
  for (int i = 0; i < nl; ++i) locs.push_back("q" + std::to_string(i));
  for (int i = 0; i < nv; ++i) names.push_back(std::string(1, static_cast<char>('x' + i)));
  Program p = make_program(locs, names);
  for (int i = 0; i < nl; ++i)
    for (int j = 0; j < nl; ++j) {
      if (j == 0 || i == nl - 1 || !g.coin(0.6)) continue;
      p.set_tau(Location{static_cast<uint32_t>(i)}, Location{static_cast<uint32_t>(j)}, random_tau(g, names, g.range(1, 3)));
    }
  return p;
}

// Deterministic-ish update of one variable: v' = a*v + c, v' = other, or havoc.
inline Formula random_update(Gen& g, const std::string& v, const std::vector<std::string>& names) {
  int r = g.range(0, 5);
  if (r <= 2) return Formula::eq(nxt(v), cur(v) + num(g.range(-2, 3)));
  if (r == 3) return Formula::eq(nxt(v), cur(g.pick(names)) * Rat(g.range(-1, 2)) + num(g.range(-1, 1)));
  if (r == 4) return Formula::le(cur(v), nxt(v));
  return Formula::eq(nxt(v), cur(v));
}

inline Formula random_guard(Gen& g, const std::vector<std::string>& names) {
  return g.formula(vars_named(names), 1);
}

inline Formula random_body(Gen& g, const std::vector<std::string>& names) {
  std::vector<Formula> ds;
  int n = g.range(1, 2);
  for (int d = 0; d < n; ++d) {
    std::vector<Formula> cs;
    if (g.coin(0.6)) cs.push_back(random_guard(g, names));
    for (const auto& v : names) cs.push_back(random_update(g, v, names));
    ds.push_back(Formula::land(std::move(cs)));
  }
  return Formula::lor(std::move(ds));
}

inline Formula random_init(Gen& g, const std::vector<std::string>& names) {
  std::vector<Formula> cs;
  for (const auto& v : names) {
    int r = g.range(0, 3);
    if (r <= 1) cs.push_back(Formula::eq(nxt(v), num(g.range(-2, 2))));
    else if (r == 2) cs.push_back(Formula::le(num(g.range(-2, 1)), nxt(v)));
  }
  return Formula::land(std::move(cs));
}

inline Formula random_error(Gen& g, const std::vector<std::string>& names) {
  auto vs = vars_named(names);
  Formula f = g.atom(vs);
  if (g.coin(0.5)) f = Formula::land(f, g.atom(vs));
  return f;
}

// Programs with one loop, two sequential loops, or two nested loops.
inline Program random_loop_program(Gen& g, int loops = -1) {
  if (loops < 0) loops = g.range(0, 2);
  std::vector<std::string> names = {"x", "y"};
  if (g.coin(0.3)) names.push_back("z");
  if (loops == 0) {
    Program p = make_program({"en", "a", "er"}, names);
    p.set_tau(Location{0}, Location{1}, random_init(g, names));
    p.set_tau(Location{1}, Location{2}, Formula::land(random_body(g, names), random_error(g, names)));
    return p;
  }
  if (loops == 1) {
    Program p = make_program({"en", "lp", "er"}, names);
    p.set_tau(Location{0}, Location{1}, random_init(g, names));
    p.set_tau(Location{1}, Location{1}, random_body(g, names));
    p.set_tau(Location{1}, Location{2}, random_error(g, names));
    return p;
  }
  if (g.coin()) {
    Program p = make_program({"en", "l1", "l2", "er"}, names);
    p.set_tau(Location{0}, Location{1}, random_init(g, names));
    p.set_tau(Location{1}, Location{1}, random_body(g, names));
    p.set_tau(Location{1}, Location{2}, random_body(g, names));
    p.set_tau(Location{2}, Location{2}, random_body(g, names));
    p.set_tau(Location{2}, Location{3}, random_error(g, names));
    if (g.coin(0.3)) p.set_tau(Location{1}, Location{3}, random_error(g, names));
    return p;
  }
  Program p = make_program({"en", "l1", "l2", "er"}, names);
  p.set_tau(Location{0}, Location{1}, random_init(g, names));
  p.set_tau(Location{1}, Location{2}, random_body(g, names));
  p.set_tau(Location{2}, Location{2}, random_body(g, names));
  p.set_tau(Location{2}, Location{1}, random_body(g, names));
  p.set_tau(Location{1}, Location{3}, random_error(g, names));
  return p;
}

// Path formula over step-indexed copies.
inline Formula unroll(const Program& p, const std::vector<Location>& path) {
  std::vector<Formula> steps;
  for (size_t i = 0; i + 1 < path.size(); ++i)
    steps.push_back(spacer::ir::rename(p.tau(path[i], path[i + 1]), [i](VarRef v) {
      return VarRef{Symbol::intern(v.sym.name() + "#" + std::to_string(v.primed ? i + 1 : i)), false};
    }));
  return Formula::land(std::move(steps));
}

inline bool path_feasible_oracle(const Program& p, const std::vector<Location>& path) {
  return dnf_sat(unroll(p, path));
}

// Enumerates control paths from init; each component visit takes at most k back-edges to its head.
// Calls `visit` on every feasible prefix ending at the error location; stops when it returns true.
inline bool bounded_paths(const Program& p, const spacer::instrument::Wto& w, uint32_t k,
                          const std::function<bool(const std::vector<Location>&)>& visit) {
  std::vector<Location> path{p.init};
  std::vector<uint32_t> count(p.num_locations(), 0);
  std::function<bool()> dfs = [&]() -> bool {
    Location l = path.back();
    if (l == p.error) return visit(path);
    for (Location m : p.successors(l)) {
      auto saved = count;
      const auto& hi = w.hds[l.index];
      const auto& hj = w.hds[m.index];
      bool back = !w.before(l, m);
      if (back) {
        if (count[m.index] >= k) continue;
        ++count[m.index];
      } else if (w.is_head(m)) {
        count[m.index] = 0;
      }
      for (Location h : hi)
        if (std::find(hj.begin(), hj.end(), h) == hj.end()) count[h.index] = 0;
      path.push_back(m);
      bool stop = spacer::ir::check_path_feasible(p, path).has_value() && dfs();
      path.pop_back();
      count = saved;
      if (stop) return true;
    }
    return false;
  };
  return dfs();
}

// True when some path within the bound reaches the error location.
inline bool bounded_unsafe(const Program& p, uint32_t k) {
  auto w = spacer::instrument::compute_wto(p);
  return bounded_paths(p, w, k, [](const std::vector<Location>&) { return true; });
}

}  // namespace testsupport
