#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spacer/check/check.hpp"
#include "spacer/instrument/instrument.hpp"
#include "spacer/solve/solve.hpp"

namespace spacer::engine {

using ir::Formula;
using solve::InvariantMap;

enum class Strategy { Spacer, Pba, Concrete };

struct EngineConfig {
  Strategy strategy = Strategy::Spacer;
  instrument::Granularity granularity = instrument::Granularity::Conjunct;
  uint32_t max_bound = 64;
  arith::Config arith;
  std::optional<double> limit_seconds;
  size_t limit_polyhedra = 50000;
  bool templates = true;  // see solve::Options::templates
  std::ostream* trace = nullptr;  // tab-separated, one line per iteration
};

struct IterationRecord {
  size_t iteration = 0;
  std::string result;  // safe, unsafe-spurious, unsafe-real, unknown
  size_t sigma_hat = 0, sigma_all = 0;
  uint32_t bound = 0;
  size_t proof_lemmas = 0, invariants = 0, polyhedra = 0;
  std::string fingerprint;  // refuted counterexamples only
  std::vector<bool> sigma_set;
};

enum class Outcome { Safe, Unsafe, Unknown };

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  ir::Proof proof;               // over the original program
  ir::Counterexample cex;        // over the original program
  std::string reason;            // Unknown only
  InvariantMap invariants;       // 𝒥 over the instrumented program
  uint32_t bound = 0;
  size_t sigma_hat = 0, sigma_all = 0;
  size_t peak_polyhedra = 0;
  double seconds = 0;
  std::vector<IterationRecord> history;
};

std::string to_string(Outcome o);
std::string trace_header();
std::string trace_line(const IterationRecord& r);

Verdict run(const ir::Program& p, const EngineConfig& cfg = {});

// Building blocks, exposed for testing.
struct Context {
  instrument::BoundedProgram bp;
  instrument::FactoredTau ft;
  arith::Config arith;
};

Context prepare(const ir::Program& p, instrument::Granularity g, const arith::Config& cfg = {});
instrument::UnderApprox init_u(const Context& cx);
instrument::UnderApprox next_u(const instrument::UnderApprox& u, std::vector<bool> sigma_hat);

// Maximal subset of `candidates` inductive relative to `inv` w.r.t. `p` (initiation at p.init included).
InvariantMap extract_invs(const ir::Program& p, const InvariantMap& inv, const InvariantMap& candidates,
                          const arith::Config& cfg = {});

// Σ̂₁ ⊆ Σ̂ under which the lemmas of pf needed for safety stay a proof of U_𝒥(Σ̂₁, bvals).
std::vector<bool> abstract_op(const Context& cx, const instrument::UnderApprox& u, const InvariantMap& inv,
                              const ir::Proof& pf);

struct Refined {
  std::vector<bool> sigma_hat;
};
struct Feasible {
  ir::Counterexample cex;  // over the original program
};
std::variant<Feasible, Refined> refine(const Context& cx, const instrument::UnderApprox& u, const ir::Counterexample& cex,
                                       Strategy strategy);

std::string fingerprint(const ir::Counterexample& cex);

}  // namespace spacer::engine
