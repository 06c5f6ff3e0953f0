#pragma once

#include <map>
#include <optional>
#include <vector>

#include "spacer/arith/arith.hpp"
#include "spacer/ir/program.hpp"

namespace spacer::instrument {

using ir::Formula;
using ir::Location;
using ir::Program;
using ir::Edge;

// Weak topological order. `order` lists locations; `open`/`close` count brackets before/after each position.
struct Wto {
  std::vector<Location> order;
  std::vector<int> open, close;
  std::vector<Location> heads;
  std::vector<std::vector<Location>> hds;  // indexed by location, outside-in
  std::vector<size_t> position;            // indexed by location

  bool is_head(Location l) const;
  bool before(Location a, Location b) const { return position[a.index] < position[b.index]; }
  std::string render(const Program& p) const;
};

Wto compute_wto(const Program& p);

struct BoundedProgram {
  Program base;    // over V ∪ C ∪ B with tau = origin tau ∧ tau_B
  Program origin;  // pre-instrumentation
  std::map<Edge, Formula> tau_b;  // absent = true
  std::vector<ir::Symbol> counters, bounds;
  std::map<Location, ir::Symbol> ctr;  // head -> counter
  std::map<ir::Symbol, ir::Symbol> bd;  // counter -> bound
  Wto wto;

  Formula tau_b_at(Location a, Location b) const;
};

BoundedProgram instrument(const Program& p, const Wto& w);
BoundedProgram instrument(const Program& p);

// Σ̂ as a membership vector over FactoredTau::guards, plus a bound per bound variable.
struct UnderApprox {
  std::vector<bool> sigma_hat;
  std::map<ir::Symbol, uint32_t> bvals;

  static UnderApprox uniform(const BoundedProgram& bp, size_t num_sigma, bool all_selected, uint32_t k);
  // ⋀ b ≤ bvals(b) over current-state bound variables.
  Formula bound_formula() const;
  size_t selected() const;
};

enum class Granularity { Conjunct, StateVar };

// One guarded conjunct: (¬sigma ∨ conjunct) inside disjunct `disjunct` of edge `edge`.
struct Guard {
  ir::Symbol sigma;
  ir::Edge edge;
  size_t disjunct;
  Formula conjunct;
};

struct FactoredTau {
  struct Disjunct {
    std::vector<size_t> guarded;  // indices into guards
    std::vector<Formula> plain;   // conjuncts never guarded
  };
  std::map<ir::Edge, std::vector<Disjunct>> edges;  // origin tau in DNF
  std::vector<Guard> guards;                        // Σ, in creation order
  Granularity granularity = Granularity::Conjunct;

  size_t size() const { return guards.size(); }
  // tau_Σ: assumption variables occur only negatively.
  Formula tau_sigma(ir::Edge e) const;
  // τ̂(Σ̂): guards in `selected` kept, others dropped.
  Formula tau_hat(ir::Edge e, const std::vector<bool>& selected) const;
  Formula sigma_literal(size_t i) const { return Formula::boolvar(ir::VarRef{guards[i].sigma, false}); }
  std::optional<size_t> index_of(ir::Symbol sigma) const;
};

FactoredTau factor_assumptions(const BoundedProgram& bp, Granularity g);

// Restricts states to the origin variables; throws std::logic_error if the result fails to replay.
ir::Counterexample project_cex(const BoundedProgram& bp, const ir::Counterexample& cex);

// Universal closure over C ∪ B ≥ 0 of each lemma; lemmas whose closure is false are dropped.
ir::Proof generalize_proof(const BoundedProgram& bp, const ir::Proof& pf, const arith::Config& cfg = {});
Formula universal_closure(const Formula& f, const std::vector<ir::Symbol>& vars);

// Edgewise conjunction τ_U ∧ τ_new (embedding is the identity).
Program adapt(const Program& u, const std::map<ir::Edge, Formula>& tau_new);

}  // namespace spacer::instrument
