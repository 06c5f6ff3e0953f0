#include "spacer/solve/solve.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "spacer/arith/arith.hpp"

namespace spacer::solve {

using arith::Cube;
using arith::Polyhedron;
using ir::LinAtom;
using ir::LinTerm;
using ir::Rel;
using ir::VarRef;

namespace {

VarRef unprimed(VarRef v) { return VarRef{v.sym, false}; }

LinAtom unprime_atom(const LinAtom& a) {
  auto t = a.term.rename(unprimed);
  return *ir::normalize(t, a.rel);
}

bool cube_subsumed(const Cube& a, const Cube& b) {
  for (const auto& [v, ph] : b.bools)
    if (a.bool_value(v) != std::optional<bool>(ph)) return false;
  return arith::subsumed(a.poly, b.poly);
}

// Conjunction of two cubes; nullopt when contradictory.
std::optional<Cube> meet(const Cube& a, const Cube& b) {
  Cube c = a;
  for (const auto& [v, ph] : b.bools)
    if (!c.add_bool(v, ph)) return std::nullopt;
  for (const auto& at : b.poly.atoms) c.poly.add(at);
  c.poly = arith::simplify(c.poly);
  if (c.poly.empty || !arith::feasible(c.poly)) return std::nullopt;
  return c;
}

std::optional<Cube> post(const Cube& pre, const Cube& edge) {
  Cube next;
  Polyhedron poly = pre.poly;
  for (const auto& [v, ph] : edge.bools) {
    if (v.primed) {
      next.add_bool(unprimed(v), ph);
    } else if (auto have = pre.bool_value(v); have && *have != ph) {
      return std::nullopt;
    }
  }
  for (const auto& a : edge.poly.atoms) poly.add(a);
  std::vector<VarRef> elim;
  for (const auto& v : poly.vars())
    if (!v.primed) elim.push_back(v);
  Polyhedron r = arith::fm_eliminate(elim, poly);
  if (r.empty || !arith::feasible(r)) return std::nullopt;
  r = arith::remove_redundant(arith::simplify(r));
  for (const auto& a : r.atoms) next.poly.add(unprime_atom(a));
  return next;
}

std::vector<LinAtom> split_eq(const LinAtom& a) {
  if (a.rel != Rel::Eq) return {a};
  return {*ir::normalize(a.term, Rel::Le), *ir::normalize(-a.term, Rel::Le)};
}

class Entailment {
 public:
  // Every model of c satisfies f.
  bool holds(const Cube& c, const Formula& f) {
    auto it = neg_.find(f);
    if (it == neg_.end()) {
      auto d = arith::to_dnf(Formula::lnot(f), 256);
      it = neg_.emplace(f, d ? *d : std::vector<Cube>{}).first;
      if (!d) overflow_.insert(f);
    }
    if (overflow_.count(f)) {
      return arith::is_unsat_result(arith::is_sat({c.to_formula(), Formula::lnot(f)}));
    }
    for (const auto& n : it->second)
      if (meet(c, n)) return false;
    return true;
  }

 private:
  std::map<Formula, std::vector<Cube>> neg_;
  std::set<Formula> overflow_;
};

struct Node {
  Location loc;
  Cube cube;
  int parent;
  size_t depth;
  bool alive;
};

class Engine {
 public:
  Engine(const Problem& pb, const Options& opt) : pb_(pb), opt_(opt), reach_(pb.program.num_locations()) {}

  Result run() {
    try {
      return search();
    } catch (const arith::ResourceLimit& e) {
      return Unknown{e.what()};
    }
  }

 private:
  const Problem& pb_;
  const Options& opt_;
  std::vector<Node> nodes_;
  std::vector<std::vector<size_t>> reach_;
  Entailment ent_;
  std::map<Formula, std::vector<Cube>> inv_dnf_;

  const std::vector<Formula>& inv(Location l) const {
    static const std::vector<Formula> none;
    return pb_.inv.empty() ? none : pb_.inv.at(l.index);
  }

  const std::vector<Cube>& dnf(const Formula& f) {
    auto it = inv_dnf_.find(f);
    if (it != inv_dnf_.end()) return it->second;
    auto d = arith::to_dnf(f, 4096);
    if (!d) throw arith::ResourceLimit("invariant too large for DNF");
    return inv_dnf_.emplace(f, std::move(*d)).first->second;
  }

  std::vector<Cube> strengthen(Cube c, Location l) {
    std::vector<Cube> work{std::move(c)};
    for (const auto& phi : inv(l)) {
      std::vector<Cube> next;
      for (auto& w : work) {
        if (ent_.holds(w, phi)) {
          next.push_back(std::move(w));
          continue;
        }
        for (const auto& d : dnf(phi))
          if (auto m = meet(w, d)) next.push_back(std::move(*m));
      }
      work = std::move(next);
      if (work.empty()) break;
    }
    return work;
  }

  bool insert(Location l, Cube c, int parent, size_t depth) {
    for (size_t id : reach_[l.index])
      if (cube_subsumed(c, nodes_[id].cube)) return false;
    auto& ids = reach_[l.index];
    for (size_t id : ids)
      if (cube_subsumed(nodes_[id].cube, c)) nodes_[id].alive = false;
    ids.erase(std::remove_if(ids.begin(), ids.end(), [&](size_t id) { return !nodes_[id].alive; }), ids.end());
    ids.push_back(nodes_.size());
    nodes_.push_back(Node{l, std::move(c), parent, depth, true});
    if (nodes_.size() > opt_.max_polyhedra) throw arith::ResourceLimit("polyhedra limit exceeded");
    return true;
  }

  void check_time() const {
    if (opt_.deadline && std::chrono::steady_clock::now() > *opt_.deadline) throw arith::ResourceLimit("time limit exceeded");
  }

  Result search() {
    const auto& p = pb_.program;
    using Key = std::tuple<size_t, uint32_t, size_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> queue;
    insert(p.init, Cube{}, -1, 0);
    queue.push({0, p.init.index, 0});
    while (!queue.empty()) {
      check_time();
      auto [depth, li, id] = queue.top();
      queue.pop();
      if (!nodes_[id].alive) continue;
      Location l{li};
      for (Location m : p.successors(l)) {
        auto ec = pb_.cubes.find({l, m});
        if (ec == pb_.cubes.end()) continue;
        for (const auto& edge : ec->second) {
          auto next = post(nodes_[id].cube, edge);
          if (!next) continue;
          for (auto& c : strengthen(std::move(*next), m)) {
            if (m == p.error) return counterexample(static_cast<int>(id), m);
            size_t before = nodes_.size();
            if (insert(m, std::move(c), static_cast<int>(id), depth + 1)) queue.push({depth + 1, m.index, before});
          }
          if (!nodes_[id].alive) break;
        }
      }
    }
    return Safe{proof(), nodes_.size()};
  }

  Result counterexample(int last, Location err) {
    std::vector<Location> path{err};
    for (int n = last; n >= 0; n = nodes_[n].parent) path.push_back(nodes_[n].loc);
    std::reverse(path.begin(), path.end());
    ir::Program eff = pb_.program;
    for (auto& [e, f] : eff.edges) f = pb_.effective(e);
    auto st = ir::check_path_feasible(eff, path);
    if (!st) return Unknown{"internal: reconstructed path is infeasible"};
    return Unsafe{ir::Counterexample{path, *st}, nodes_.size()};
  }

  // ------------------------------------------------------------ proofs

  std::vector<const Cube*> cubes_at(Location l) const {
    std::vector<const Cube*> out;
    for (size_t id : reach_[l.index]) out.push_back(&nodes_[id].cube);
    return out;
  }

  static Formula split_formula(const Cube& c) {
    std::vector<Formula> fs;
    for (const auto& a : c.poly.atoms)
      for (const auto& s : split_eq(a)) fs.push_back(Formula::atom(s));
    for (const auto& [v, b] : c.bools) fs.push_back(b ? Formula::boolvar(v) : Formula::lnot(Formula::boolvar(v)));
    return Formula::land(std::move(fs));
  }

  ir::Proof proof() {
    const auto& p = pb_.program;
    ir::Proof pf(p.num_locations());
    pf.add(p.error, Formula::bottom());
    for (uint32_t i = 0; i < p.num_locations(); ++i) {
      Location l{i};
      if (l == p.init || l == p.error) continue;
      auto cs = cubes_at(l);
      if (cs.empty()) {
        pf.add(l, Formula::bottom());
        continue;
      }
      std::vector<Formula> ds;
      for (auto* c : cs) ds.push_back(split_formula(*c));
      Formula disj = Formula::lor(ds);
      if (auto cnf = arith::to_cnf(disj, opt_.clause_cap)) {
        for (auto& cl : *cnf) pf.add(l, cl);
      } else {
        pf.add(l, disj);
      }
      if (!opt_.enrich) continue;
      for (const auto& cand : candidates(l, cs)) {
        bool ok = true;
        for (auto* c : cs)
          if (!(ok = ent_.holds(*c, cand))) break;
        if (ok) pf.add(l, cand);
      }
    }
    return pf;
  }

  std::vector<Formula> candidates(Location l, const std::vector<const Cube*>& cs) {
    std::vector<Formula> out;
    std::set<Formula> seen;
    auto emit = [&](const Formula& f) {
      if (f.is_true() || f.is_false()) return;
      if (seen.insert(f).second) out.push_back(f);
    };
    for (auto* c : cs)
      for (const auto& a : c->poly.atoms)
        for (const auto& s : split_eq(a)) emit(Formula::atom(s));
    error_candidates(l, emit);
    hull_candidates(cs, emit);
    bound_candidates(cs, emit);
    return out;
  }

  template <typename Emit>
  void error_candidates(Location l, Emit& emit) {
    auto it = pb_.cubes.find({l, pb_.program.error});
    if (it == pb_.cubes.end()) return;
    for (const auto& e : it->second) {
      std::vector<VarRef> primed, vars;
      for (const auto& v : e.poly.vars()) (v.primed ? primed : vars).push_back(v);
      Polyhedron g = arith::fm_eliminate(primed, e.poly);
      if (g.empty || vars.size() > 6) continue;
      for (unsigned mask = 1; mask < (1u << vars.size()); ++mask) {
        std::vector<VarRef> drop;
        for (size_t k = 0; k < vars.size(); ++k)
          if (!(mask & (1u << k))) drop.push_back(vars[k]);
        Polyhedron proj = arith::simplify(arith::fm_eliminate(drop, g));
        if (proj.empty || proj.atoms.empty()) continue;
        std::vector<Formula> neg;
        for (const auto& a : proj.atoms)
          for (const auto& n : arith::negate(a)) neg.push_back(Formula::atom(n));
        emit(Formula::lor(std::move(neg)));
      }
    }
  }

  using Point = std::pair<Rat, Rat>;

  static Rat cross(const Point& o, const Point& a, const Point& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  }

  static std::vector<Point> hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
      h[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
      h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    return h;
  }

  template <typename Emit>
  void hull_candidates(const std::vector<const Cube*>& cs, Emit& emit) {
    const auto& tv = pb_.text_vars;
    for (size_t i = 0; i < tv.size(); ++i)
      for (size_t j = i + 1; j < tv.size(); ++j) {
        VarRef u{tv[i], false}, v{tv[j], false};
        std::vector<Point> pts;
        bool bounded = true;
        for (auto* c : cs) {
          std::vector<VarRef> drop;
          for (const auto& w : c->poly.vars())
            if (w != u && w != v) drop.push_back(w);
          Polyhedron q = arith::simplify(arith::fm_eliminate(drop, c->poly));
          if (q.empty) continue;
          for (const auto& t : {LinTerm::var(u), LinTerm::var(v), -LinTerm::var(u), -LinTerm::var(v)})
            if (!arith::maximize(q, t)) bounded = false;
          if (!bounded) break;
          vertices(q, u, v, pts);
        }
        if (!bounded) continue;
        auto h = hull(pts);
        if (h.size() == 1) {
          emit(Formula::atom(LinTerm::var(u) - LinTerm(h[0].first), Rel::Eq));
          emit(Formula::atom(LinTerm::var(v) - LinTerm(h[0].second), Rel::Eq));
        }
        if (h.size() < 2) continue;
        for (size_t k = 0; k < h.size(); ++k) {
          const Point& a = h[k];
          const Point& b = h[(k + 1) % h.size()];
          if (h.size() == 2 && k == 1) break;
          Rat cu = b.second - a.second, cv = a.first - b.first;
          LinTerm t = LinTerm::var(u, cu) + LinTerm::var(v, cv);
          t.add_constant(-(cu * a.first + cv * a.second));
          if (t.is_constant()) continue;
          emit(Formula::atom(t, Rel::Le));
          emit(Formula::atom(-t, Rel::Le));
        }
      }
  }

  static void vertices(const Polyhedron& q, VarRef u, VarRef v, std::vector<Point>& out) {
    struct Line {
      Rat a, b, c;
    };
    std::vector<Line> lines;
    for (const auto& at : q.atoms) lines.push_back({at.term.coeff(u), at.term.coeff(v), -at.term.constant()});
    auto inside = [&](const Point& p) {
      for (const auto& at : q.atoms) {
        Rat val = at.term.coeff(u) * p.first + at.term.coeff(v) * p.second + at.term.constant();
        if (at.rel == Rel::Eq ? val != 0 : val > 0) return false;
      }
      return true;
    };
    for (size_t i = 0; i < lines.size(); ++i)
      for (size_t j = i + 1; j < lines.size(); ++j) {
        const auto &l1 = lines[i], &l2 = lines[j];
        Rat det = l1.a * l2.b - l2.a * l1.b;
        if (det == 0) continue;
        Point p{(l1.c * l2.b - l2.c * l1.b) / det, (l1.a * l2.c - l2.a * l1.c) / det};
        if (inside(p)) out.push_back(p);
      }
  }

  template <typename Emit>
  void bound_candidates(const std::vector<const Cube*>& cs, Emit& emit) {
    auto terms = pb_.text_terms;
    if (opt_.templates)
      for (const auto& o : pb_.template_terms)
        if (std::find(terms.begin(), terms.end(), o) == terms.end()) terms.push_back(o);
    for (const auto& term : terms)
      for (const LinTerm& t : {term, -term}) {
        std::optional<Rat> best;
        bool attained = false, bounded = true;
        for (auto* c : cs) {
          auto m = arith::maximize(c->poly, t);
          if (!m) {
            bounded = !arith::feasible(c->poly);
            if (!bounded) break;
            continue;
          }
          if (!best || m->first > *best) {
            best = m->first;
            attained = m->second;
          } else if (m->first == *best) {
            attained = attained || m->second;
          }
        }
        if (!bounded || !best) continue;
        emit(Formula::atom(t - LinTerm(*best), attained ? Rel::Le : Rel::Lt));
      }
  }
};

void collect_terms(const Formula& f, std::vector<LinTerm>& out) {
  using K = Formula::Kind;
  if (f.kind() == K::Atom) {
    const auto& t = f.lin().term;
    bool any_primed = false, any_cur = false;
    for (const auto& [v, c] : t.coeffs()) (v.primed ? any_primed : any_cur) = true;
    if (any_primed && any_cur) return;
    LinTerm u;
    for (const auto& [v, c] : t.coeffs()) u.add(unprimed(v), c);
    auto n = ir::normalize(u, Rel::Eq);
    if (!n) return;
    if (std::find(out.begin(), out.end(), n->term) == out.end()) out.push_back(n->term);
    return;
  }
  if (f.kind() == K::Not || f.kind() == K::And || f.kind() == K::Or)
    for (const auto& g : f.children()) collect_terms(g, out);
}

// a*u + b*v for every pair whose per-step changes satisfy a*du + b*dv = 0 on some step cube
void collect_delta_terms(const ir::Program& p, std::vector<LinTerm>& out) {
  std::vector<ir::Symbol> vs;
  for (const auto& d : p.vars)
    if (d.sort == ir::Sort::Rat) vs.push_back(d.sym);
  ir::Symbol du = ir::Symbol::fresh("du_"), dv = ir::Symbol::fresh("dv_");
  VarRef rdu{du, false}, rdv{dv, false};
  for (const auto& [e, f] : p.edges) {
    if (e.first == p.init || e.second == p.error) continue;
    auto cubes = arith::to_dnf(f, 64);
    if (!cubes) continue;
    for (const auto& c : *cubes)
      for (size_t i = 0; i < vs.size(); ++i)
        for (size_t j = i + 1; j < vs.size(); ++j) {
          VarRef u{vs[i], false}, v{vs[j], false};
          Polyhedron q = c.poly;
          q.atoms.push_back({LinTerm::var(rdu) - LinTerm::var(VarRef{vs[i], true}) + LinTerm::var(u), Rel::Eq});
          q.atoms.push_back({LinTerm::var(rdv) - LinTerm::var(VarRef{vs[j], true}) + LinTerm::var(v), Rel::Eq});
          std::vector<VarRef> drop;
          for (const auto& w : q.vars())
            if (w != rdu && w != rdv) drop.push_back(w);
          Polyhedron r = arith::simplify(arith::fm_eliminate(drop, q));
          if (r.empty) continue;
          std::vector<std::pair<Rat, Rat>> dirs;
          std::vector<const ir::LinAtom*> eqs;
          for (const auto& a : r.atoms)
            if (a.rel == Rel::Eq) eqs.push_back(&a);
          for (auto* a : eqs)
            if (a->term.constant() == 0) dirs.push_back({a->term.coeff(rdu), a->term.coeff(rdv)});
          for (size_t k = 0; k < eqs.size(); ++k)
            for (size_t l = k + 1; l < eqs.size(); ++l) {
              const auto &a = eqs[k]->term, &b = eqs[l]->term;
              Rat det = a.coeff(rdu) * b.coeff(rdv) - b.coeff(rdu) * a.coeff(rdv);
              if (det == 0) continue;
              Rat pu = (a.coeff(rdv) * b.constant() - b.coeff(rdv) * a.constant()) / det;
              Rat pv = (b.coeff(rdu) * a.constant() - a.coeff(rdu) * b.constant()) / det;
              dirs.push_back({pv, -pu});
            }
          for (const auto& [cu, cv] : dirs) {
            if (cu == 0 || cv == 0) continue;
            auto n = ir::normalize(LinTerm::var(u, cu) + LinTerm::var(v, cv), Rel::Eq);
            if (n && std::find(out.begin(), out.end(), n->term) == out.end()) out.push_back(n->term);
          }
        }
  }
}

}  // namespace

std::vector<LinTerm> program_terms(const ir::Program& p) {
  std::vector<LinTerm> out;
  for (const auto& [e, f] : p.edges) collect_terms(f, out);
  return out;
}

std::vector<LinTerm> template_terms(const ir::Program& p) {
  std::vector<LinTerm> out;
  std::vector<LinTerm> vs;
  for (const auto& d : p.vars)
    if (d.sort == ir::Sort::Rat) vs.push_back(LinTerm::var(VarRef{d.sym, false}));
  for (size_t i = 0; i < vs.size(); ++i) {
    out.push_back(vs[i]);
    for (size_t j = i + 1; j < vs.size(); ++j) {
      out.push_back(vs[i] + vs[j]);
      out.push_back(vs[i] - vs[j]);
    }
  }
  collect_delta_terms(p, out);
  return out;
}

Formula Problem::effective(ir::Edge e) const {
  std::vector<Formula> fs;
  if (!inv.empty()) fs.push_back(Formula::land(inv.at(e.first.index)));
  fs.push_back(program.tau(e.first, e.second));
  if (!inv.empty()) fs.push_back(ir::prime(Formula::land(inv.at(e.second.index))));
  return Formula::land(std::move(fs));
}

Problem make_problem(const ir::Program& p, InvariantMap inv) {
  Problem pb;
  pb.program = p;
  pb.inv = std::move(inv);
  for (const auto& [e, f] : p.edges) {
    auto d = arith::to_dnf(f);
    if (!d) throw arith::ResourceLimit("edge formula too large for DNF");
    pb.cubes[e] = std::move(*d);
  }
  for (const auto& v : p.vars)
    if (v.sort == ir::Sort::Rat && v.kind == ir::VarKind::Program) pb.text_vars.push_back(v.sym);
  pb.text_terms = program_terms(p);
  pb.template_terms = template_terms(p);
  return pb;
}

Problem make_problem(const instrument::FactoredTau& ft, const instrument::BoundedProgram& bp,
                     const instrument::UnderApprox& u, InvariantMap inv) {
  Problem pb;
  pb.program = bp.base;
  pb.inv = std::move(inv);
  Formula bound = u.bound_formula();
  for (const auto& [e, ds] : ft.edges) {
    Formula extra = Formula::land(bp.tau_b_at(e.first, e.second), bound);
    pb.program.set_tau(e.first, e.second, Formula::land(ft.tau_hat(e, u.sigma_hat), extra));
    auto& out = pb.cubes[e];
    for (const auto& dj : ds) {
      std::vector<Formula> cs = dj.plain;
      for (size_t i : dj.guarded)
        if (u.sigma_hat.at(i)) cs.push_back(ft.guards[i].conjunct);
      cs.push_back(extra);
      auto d = arith::to_dnf(Formula::land(std::move(cs)));
      for (auto& c : *d) out.push_back(std::move(c));
    }
  }
  for (const auto& v : bp.origin.vars)
    if (v.sort == ir::Sort::Rat) pb.text_vars.push_back(v.sym);
  pb.text_terms = program_terms(bp.origin);
  pb.template_terms = template_terms(bp.origin);
  return pb;
}

Result solve(const Problem& pb, const Options& opt) { return Engine(pb, opt).run(); }

std::vector<Polyhedron> post_image(const Polyhedron& poly, const Formula& edge_formula) {
  std::vector<Polyhedron> out;
  auto d = arith::to_dnf(edge_formula);
  if (!d) throw arith::ResourceLimit("edge formula too large for DNF");
  Cube pre{poly, {}};
  for (const auto& e : *d)
    if (auto c = post(pre, e)) out.push_back(std::move(c->poly));
  return out;
}

}  // namespace spacer::solve
