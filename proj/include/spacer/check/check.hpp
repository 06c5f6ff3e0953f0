#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spacer/arith/arith.hpp"
#include "spacer/ir/program.hpp"

namespace spacer::check {

struct Violation {
  std::string condition;  // safe, initiated, inductive, path, state, step, shape, entailment, unknown
  std::string where;      // location or edge name
  std::optional<arith::Model> witness;
};

struct Report {
  bool ok = true;
  std::vector<Violation> violations;

  void add(Violation v) {
    ok = false;
    violations.push_back(std::move(v));
  }
  std::string describe(const ir::Program& p) const;
};

Report check_proof(const ir::Program& p, const ir::Proof& pf, const arith::Config& cfg = {});
Report check_cex(const ir::Program& p, const ir::Counterexample& cex);
// Initiation and inductiveness of inv (no safety requirement).
Report check_mis(const ir::Program& p, const std::vector<std::vector<ir::Formula>>& inv, const arith::Config& cfg = {});
// Edgewise τ1(e) ⇒ τ2(e) with the identity location map.
Report check_abstraction(const ir::Program& p1, const ir::Program& p2, const arith::Config& cfg = {});

}  // namespace spacer::check
