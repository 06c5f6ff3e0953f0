#include "spacer/arith/arith.hpp"

#include <algorithm>

namespace spacer::arith {

using ir::Formula;
using ir::VarRef;

// ---------------------------------------------------------------- Model

Rat Model::value(VarRef v) const {
  auto it = values.find(v);
  return it == values.end() ? Rat(0) : it->second;
}

ir::Valuation Model::current() const {
  ir::Valuation out;
  for (const auto& [v, x] : values)
    if (!v.primed) out[v.sym] = x;
  return out;
}

ir::Valuation Model::next() const {
  ir::Valuation out;
  for (const auto& [v, x] : values)
    if (v.primed) out[v.sym] = x;
  return out;
}

bool Model::satisfies(const Formula& f) const {
  ir::Valuation cur, nxt;
  for (const auto& v : ir::vars_of(f)) (v.primed ? nxt : cur)[v.sym] = value(v);
  return ir::eval(f, cur, &nxt);
}

// ---------------------------------------------------------------- internal backend

namespace {

class InternalSession final : public Session {
 public:
  explicit InternalSession(const Limits& l) : solver_(l) {}

  void add(const Formula& f) override { solver_.add(f); }

  SatResult check(const std::vector<Formula>& assumptions) override {
    switch (solver_.check(assumptions)) {
      case SmtSolver::Status::Sat: return Sat{Model{solver_.model()}};
      case SmtSolver::Status::Unsat: {
        Unsat u;
        for (size_t i : solver_.core()) u.core.push_back(assumptions[i]);
        return u;
      }
      case SmtSolver::Status::Unknown: break;
    }
    return Unknown{"internal solver resource limit"};
  }

  void prefer(const Formula& literal) override { solver_.prefer(literal); }

 private:
  SmtSolver solver_;
};

class InternalBackend final : public Backend {
 public:
  std::unique_ptr<Session> open(const Limits& limits) const override {
    return std::make_unique<InternalSession>(limits);
  }
  std::string name() const override { return "internal"; }
};

}  // namespace

const Backend& internal_backend() {
  static const InternalBackend b;
  return b;
}

// ---------------------------------------------------------------- queries

SatResult is_sat(const std::vector<Formula>& background, const std::vector<Formula>& assumptions, const Config& cfg) {
  auto s = cfg.open();
  for (const auto& f : background) s->add(f);
  return s->check(assumptions);
}

bool entails(const std::vector<Formula>& antecedent, const Formula& consequent, const Config& cfg) {
  if (consequent.is_true()) return true;
  std::vector<Formula> q = antecedent;
  q.push_back(Formula::lnot(consequent));
  SatResult r = is_sat(q, {}, cfg);
  if (auto* u = std::get_if<Unknown>(&r)) throw ResourceLimit(u->reason);
  return std::holds_alternative<Unsat>(r);
}

bool equivalent(const Formula& a, const Formula& b, const Config& cfg) {
  return entails({a}, b, cfg) && entails({b}, a, cfg);
}

namespace {

std::optional<std::pair<VarRef, bool>> as_literal(const Formula& f) {
  if (f.kind() == Formula::Kind::Bool) return std::make_pair(f.boolvar_ref(), true);
  if (f.kind() == Formula::Kind::Not && f.children()[0].kind() == Formula::Kind::Bool)
    return std::make_pair(f.children()[0].boolvar_ref(), false);
  return std::nullopt;
}

bool all_hold(const Model& m, const std::vector<Formula>& fs) {
  for (const auto& f : fs)
    if (!m.satisfies(f)) return false;
  return true;
}

}  // namespace

std::vector<Formula> mus(Session& session, const std::vector<Formula>& background, const std::vector<Formula>& fixed,
                         const std::vector<Formula>& candidates) {
  for (const auto& c : candidates) session.prefer(c);
  std::vector<Formula> r;
  for (;;) {
    std::vector<Formula> assumed = fixed;
    assumed.insert(assumed.end(), r.begin(), r.end());
    SatResult res = session.check(assumed);
    if (std::holds_alternative<Unsat>(res)) return r;
    if (auto* u = std::get_if<Unknown>(&res)) throw ResourceLimit(u->reason);
    Model m = std::get<Sat>(res).model;
    std::vector<Formula> hard = background;
    hard.insert(hard.end(), assumed.begin(), assumed.end());
    std::vector<Formula> grown;
    for (const auto& c : candidates) {
      if (std::find(r.begin(), r.end(), c) != r.end() || m.satisfies(c)) continue;
      // keep the candidate satisfied when the model allows it
      if (auto lit = as_literal(c)) {
        Model flipped = m;
        flipped.values[lit->first] = lit->second ? 1 : 0;
        if (all_hold(flipped, hard)) {
          m = std::move(flipped);
          continue;
        }
      }
      grown.push_back(c);
    }
    if (grown.empty()) return {};
    r.insert(r.end(), grown.begin(), grown.end());
  }
}

std::vector<Formula> mus(const std::vector<Formula>& background, const std::vector<Formula>& fixed,
                         const std::vector<Formula>& candidates, const Config& cfg) {
  auto s = cfg.open();
  for (const auto& f : background) s->add(f);
  return mus(*s, background, fixed, candidates);
}

std::vector<Formula> shrink_core(Session& session, const std::vector<Formula>& fixed, std::vector<Formula> core) {
  for (size_t i = 0; i < core.size();) {
    std::vector<Formula> trial = fixed;
    for (size_t j = 0; j < core.size(); ++j)
      if (j != i) trial.push_back(core[j]);
    SatResult r = session.check(trial);
    if (auto* u = std::get_if<Unknown>(&r)) throw ResourceLimit(u->reason);
    if (auto* un = std::get_if<Unsat>(&r)) {
      std::vector<Formula> kept;
      for (size_t j = 0; j < core.size(); ++j) {
        if (j == i) continue;
        if (j < i || std::find(un->core.begin(), un->core.end(), core[j]) != un->core.end()) kept.push_back(core[j]);
      }
      core = std::move(kept);
    } else {
      ++i;
    }
  }
  return core;
}

// ---------------------------------------------------------------- normal forms

namespace {

Formula nnf_rec(const Formula& f, bool negated) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return negated ? Formula::bottom() : Formula::top();
    case K::False: return negated ? Formula::top() : Formula::bottom();
    case K::Bool: return negated ? Formula::lnot(f) : f;
    case K::Atom: {
      if (!negated) return f;
      std::vector<Formula> alts;
      for (const auto& a : negate(f.lin())) alts.push_back(Formula::atom(a));
      return Formula::lor(std::move(alts));
    }
    case K::Not: return nnf_rec(f.children()[0], !negated);
    case K::And:
    case K::Or: {
      std::vector<Formula> kids;
      for (const auto& c : f.children()) kids.push_back(nnf_rec(c, negated));
      bool conj = (f.kind() == K::And) != negated;
      return conj ? Formula::land(std::move(kids)) : Formula::lor(std::move(kids));
    }
  }
  return f;
}

using Cubes = std::vector<Cube>;

bool dnf_rec(const Formula& f, size_t cap, Cubes& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: out = {Cube{}}; return true;
    case K::False: out.clear(); return true;
    case K::Atom: {
      Cube c;
      c.poly.add(f.lin());
      out = {std::move(c)};
      return true;
    }
    case K::Bool: {
      Cube c;
      c.add_bool(f.boolvar_ref(), true);
      out = {std::move(c)};
      return true;
    }
    case K::Not: {
      Cube c;
      c.add_bool(f.children()[0].boolvar_ref(), false);
      out = {std::move(c)};
      return true;
    }
    case K::Or: {
      out.clear();
      for (const auto& g : f.children()) {
        Cubes part;
        if (!dnf_rec(g, cap, part)) return false;
        if (out.size() + part.size() > cap) return false;
        for (auto& c : part) out.push_back(std::move(c));
      }
      return true;
    }
    case K::And: {
      out = {Cube{}};
      for (const auto& g : f.children()) {
        Cubes part;
        if (!dnf_rec(g, cap, part)) return false;
        Cubes next;
        for (const auto& a : out) {
          for (const auto& b : part) {
            Cube c = a;
            bool ok = true;
            for (const auto& [v, ph] : b.bools) ok = ok && c.add_bool(v, ph);
            if (!ok) continue;
            for (const auto& at : b.poly.atoms) c.poly.add(at);
            if (simplify(c.poly).empty) continue;
            if (next.size() >= cap) return false;
            next.push_back(std::move(c));
          }
        }
        out = std::move(next);
        if (out.empty()) return true;
      }
      return true;
    }
  }
  return true;
}

using Clause = std::vector<Formula>;

bool cnf_rec(const Formula& f, size_t cap, std::vector<Clause>& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: out.clear(); return true;
    case K::False: out = {Clause{}}; return true;
    case K::And: {
      out.clear();
      for (const auto& g : f.children()) {
        std::vector<Clause> part;
        if (!cnf_rec(g, cap, part)) return false;
        for (auto& c : part)
          if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
        if (out.size() > cap) return false;
      }
      return true;
    }
    case K::Or: {
      out = {Clause{}};
      for (const auto& g : f.children()) {
        std::vector<Clause> part;
        if (!cnf_rec(g, cap, part)) return false;
        std::vector<Clause> next;
        for (const auto& a : out) {
          for (const auto& b : part) {
            Clause c = a;
            for (const auto& l : b)
              if (std::find(c.begin(), c.end(), l) == c.end()) c.push_back(l);
            if (std::find(next.begin(), next.end(), c) != next.end()) continue;
            next.push_back(std::move(c));
            if (next.size() > cap) return false;
          }
        }
        out = std::move(next);
      }
      return true;
    }
    default: out = {Clause{f}}; return true;
  }
}

}  // namespace

Formula nnf(const Formula& f) { return nnf_rec(f, false); }

std::optional<std::vector<Cube>> to_dnf(const Formula& f, size_t cap) {
  Cubes out;
  if (!dnf_rec(nnf(f), cap, out)) return std::nullopt;
  return out;
}

std::optional<std::vector<Formula>> to_cnf(const Formula& f, size_t cap) {
  std::vector<Clause> cls;
  if (!cnf_rec(nnf(f), cap, cls)) return std::nullopt;
  std::vector<Formula> out;
  for (auto& c : cls) {
    Formula g = Formula::lor(std::move(c));
    if (g.is_true()) continue;
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
  }
  if (out.size() > cap) return std::nullopt;
  return out;
}

}  // namespace spacer::arith
