#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spacer/ir/formula.hpp"

namespace spacer::ir {

enum class Sort : uint8_t { Rat, Bool };
enum class VarKind : uint8_t { Program, Counter, Bound };

struct Location {
  uint32_t index = 0;
  auto operator<=>(const Location&) const = default;
};

struct VarDecl {
  Symbol sym;
  Sort sort = Sort::Rat;
  VarKind kind = VarKind::Program;
};

using Edge = std::pair<Location, Location>;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Control-flow program (L, init, error, V, tau). Absent edges are false.
struct Program {
  std::vector<std::string> locations;
  Location init;
  Location error;
  std::vector<VarDecl> vars;
  std::map<Edge, Formula> edges;

  size_t num_locations() const { return locations.size(); }
  const std::string& name(Location l) const { return locations.at(l.index); }
  std::optional<Location> find_location(const std::string& name) const;
  const VarDecl* find_var(Symbol s) const;
  Formula tau(Location from, Location to) const;
  void set_tau(Location from, Location to, Formula f);
  std::vector<Location> successors(Location l) const;
  std::vector<Location> predecessors(Location l) const;

  // Throws ValidationError on a structural or sort violation.
  void validate() const;
};

using State = Valuation;

// Lemma sets per location; a location's meaning is the conjunction of its lemmas.
struct Proof {
  std::vector<std::vector<Formula>> lemmas;

  Proof() = default;
  explicit Proof(size_t num_locations) : lemmas(num_locations) {}
  std::vector<Formula>& at(Location l) { return lemmas.at(l.index); }
  const std::vector<Formula>& at(Location l) const { return lemmas.at(l.index); }
  // Adds f unless an equal lemma is present; true if added.
  bool add(Location l, const Formula& f);
  size_t size() const;
  Formula conjunction(Location l) const { return Formula::land(at(l)); }
};

struct Counterexample {
  std::vector<Location> path;
  std::vector<State> states;
};

// States aligned with `path` satisfying tau at every step, or nullopt when infeasible.
std::optional<std::vector<State>> check_path_feasible(const Program& p, const std::vector<Location>& path);

// Valuation restricted to the given variables; Booleans default to 0 and rationals to 0 when missing.
State restrict_state(const Valuation& v, const std::vector<VarDecl>& vars);

}  // namespace spacer::ir
