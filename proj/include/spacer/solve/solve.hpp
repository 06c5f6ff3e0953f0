#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spacer/arith/polyhedron.hpp"
#include "spacer/instrument/instrument.hpp"

namespace spacer::solve {

using ir::Formula;
using ir::Location;

// 𝒥: lemma sets per location.
using InvariantMap = std::vector<std::vector<Formula>>;

struct Options {
  size_t max_polyhedra = 50000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  size_t clause_cap = 64;
  bool enrich = true;     // add implied candidate lemmas to proofs
  bool templates = true;  // also try octagon and step-invariant terms as bounds
};

struct Safe {
  ir::Proof proof;
  size_t polyhedra = 0;
};
struct Unsafe {
  ir::Counterexample cex;
  size_t polyhedra = 0;
};
struct Unknown {
  std::string reason;
};
using Result = std::variant<Safe, Unsafe, Unknown>;

// A decidable program given by per-edge DNF plus an invariant strengthening.
struct Problem {
  ir::Program program;  // tau = effective edge relation without the invariants
  std::map<ir::Edge, std::vector<arith::Cube>> cubes;
  InvariantMap inv;                   // empty or one entry per location
  std::vector<ir::Symbol> text_vars;  // variables used for hull and bound candidates
  std::vector<ir::LinTerm> text_terms;
  std::vector<ir::LinTerm> template_terms;

  // Edge formula including 𝒥(from) and 𝒥(to)'.
  Formula effective(ir::Edge e) const;
};

Problem make_problem(const ir::Program& p, InvariantMap inv = {});
// U_𝒥(Σ̂, bvals): τ̂(Σ̂) ∧ τ_B ∧ ⋀ b ≤ bvals(b), restricted by inv.
Problem make_problem(const instrument::FactoredTau& ft, const instrument::BoundedProgram& bp,
                     const instrument::UnderApprox& u, InvariantMap inv = {});

Result solve(const Problem& pb, const Options& opt = {});

// Successor polyhedra of `poly` (unprimed) under `edge_formula`, renamed to unprimed.
std::vector<arith::Polyhedron> post_image(const arith::Polyhedron& poly, const Formula& edge_formula);

// Linear terms occurring in purely current- or purely next-state atoms of p, unprimed, constants dropped.
std::vector<ir::LinTerm> program_terms(const ir::Program& p);

// ±u±v over rational vars plus a*u + b*v whenever some step cube fixes a*Δu + b*Δv = 0.
std::vector<ir::LinTerm> template_terms(const ir::Program& p);

}  // namespace spacer::solve
