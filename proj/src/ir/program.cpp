#include "spacer/ir/program.hpp"

#include <algorithm>
#include <set>

namespace spacer::ir {

std::optional<Location> Program::find_location(const std::string& n) const {
  for (uint32_t i = 0; i < locations.size(); ++i)
    if (locations[i] == n) return Location{i};
  return std::nullopt;
}

const VarDecl* Program::find_var(Symbol s) const {
  for (const auto& v : vars)
    if (v.sym == s) return &v;
  return nullptr;
}

Formula Program::tau(Location from, Location to) const {
  auto it = edges.find({from, to});
  return it == edges.end() ? Formula::bottom() : it->second;
}

void Program::set_tau(Location from, Location to, Formula f) {
  if (f.is_false())
    edges.erase({from, to});
  else
    edges[{from, to}] = std::move(f);
}

std::vector<Location> Program::successors(Location l) const {
  std::vector<Location> out;
  for (const auto& [e, f] : edges)
    if (e.first == l && !f.is_false()) out.push_back(e.second);
  return out;
}

std::vector<Location> Program::predecessors(Location l) const {
  std::vector<Location> out;
  for (const auto& [e, f] : edges)
    if (e.second == l && !f.is_false()) out.push_back(e.first);
  return out;
}

namespace {

void check_sorts(const Program& p, const Formula& f, const std::string& where) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
      for (const auto& [v, c] : f.lin().term.coeffs()) {
        const VarDecl* d = p.find_var(v.sym);
        if (!d) throw ValidationError(where + ": unknown variable '" + v.sym.name() + "'");
        if (d->sort != Sort::Rat)
          throw ValidationError(where + ": Boolean variable '" + v.sym.name() + "' used in a linear term");
      }
      break;
    case K::Bool: {
      const VarDecl* d = p.find_var(f.boolvar_ref().sym);
      if (!d) throw ValidationError(where + ": unknown variable '" + f.boolvar_ref().sym.name() + "'");
      if (d->sort != Sort::Bool)
        throw ValidationError(where + ": rational variable '" + d->sym.name() + "' used as a formula");
      break;
    }
    case K::Not:
    case K::And:
    case K::Or:
      for (const auto& g : f.children()) check_sorts(p, g, where);
      break;
    default: break;
  }
}

}  // namespace

void Program::validate() const {
  if (locations.empty()) throw ValidationError("program has no locations");
  std::set<std::string> seen;
  for (const auto& l : locations)
    if (!seen.insert(l).second) throw ValidationError("duplicate location '" + l + "'");
  if (init.index >= locations.size() || error.index >= locations.size())
    throw ValidationError("init or error location out of range");
  if (init == error) throw ValidationError("init and error location coincide");
  std::set<Symbol> vs;
  for (const auto& v : vars)
    if (!vs.insert(v.sym).second) throw ValidationError("duplicate variable '" + v.sym.name() + "'");
  for (const auto& [e, f] : edges) {
    if (e.first.index >= locations.size() || e.second.index >= locations.size())
      throw ValidationError("edge endpoint out of range");
    if (f.is_false()) continue;
    std::string where = "edge " + name(e.first) + " -> " + name(e.second);
    if (e.second == init) throw ValidationError(where + ": edges into the initial location must be false");
    if (e.first == error) throw ValidationError(where + ": edges out of the error location must be false");
    check_sorts(*this, f, where);
  }
}

bool Proof::add(Location l, const Formula& f) {
  auto& v = at(l);
  if (std::find(v.begin(), v.end(), f) != v.end()) return false;
  v.push_back(f);
  return true;
}

size_t Proof::size() const {
  size_t n = 0;
  for (const auto& v : lemmas) n += v.size();
  return n;
}

State restrict_state(const Valuation& v, const std::vector<VarDecl>& vars) {
  State s;
  for (const auto& d : vars) {
    auto it = v.find(d.sym);
    s[d.sym] = it == v.end() ? Rat(0) : it->second;
  }
  return s;
}

}  // namespace spacer::ir
