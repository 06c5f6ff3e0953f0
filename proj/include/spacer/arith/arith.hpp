#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "spacer/arith/polyhedron.hpp"
#include "spacer/arith/smt.hpp"
#include "spacer/ir/formula.hpp"

namespace spacer::arith {

// A query could not be decided within its resource limits.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Model {
  std::map<ir::VarRef, Rat> values;

  Rat value(ir::VarRef v) const;
  bool truth(ir::VarRef v) const { return value(v) != 0; }
  ir::Valuation current() const;
  ir::Valuation next() const;
  // Validates f under this model (current and next state).
  bool satisfies(const ir::Formula& f) const;
};

struct Sat {
  Model model;
};
struct Unsat {
  std::vector<ir::Formula> core;  // subset of the supplied assumptions
};
struct Unknown {
  std::string reason;
};
using SatResult = std::variant<Sat, Unsat, Unknown>;

inline bool is_sat_result(const SatResult& r) { return std::holds_alternative<Sat>(r); }
inline bool is_unsat_result(const SatResult& r) { return std::holds_alternative<Unsat>(r); }

// An incremental solving context.
class Session {
 public:
  virtual ~Session() = default;
  virtual void add(const ir::Formula& f) = 0;
  virtual SatResult check(const std::vector<ir::Formula>& assumptions) = 0;
  // Polarity hint for a Boolean literal; backends may ignore it.
  virtual void prefer(const ir::Formula& literal) { (void)literal; }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::unique_ptr<Session> open(const Limits& limits) const = 0;
  virtual std::string name() const = 0;
};

const Backend& internal_backend();
// Runs `command` (through /bin/sh) speaking SMT-LIB2 on stdin/stdout, e.g. "z3 -in".
std::unique_ptr<Backend> smtlib_backend(std::string command);

struct Config {
  const Backend* backend = nullptr;  // internal when null
  Limits limits;

  const Backend& get() const { return backend ? *backend : internal_backend(); }
  std::unique_ptr<Session> open() const { return get().open(limits); }
};

SatResult is_sat(const std::vector<ir::Formula>& background, const std::vector<ir::Formula>& assumptions = {},
                 const Config& cfg = {});

// Throws ResourceLimit on Unknown.
bool entails(const std::vector<ir::Formula>& antecedent, const ir::Formula& consequent, const Config& cfg = {});
bool equivalent(const ir::Formula& a, const ir::Formula& b, const Config& cfg = {});

// Model-growing loop: while Sat(background, fixed ∪ R), add every candidate the model falsifies.
// Returns ∅ when the loop stalls with a satisfiable query.
std::vector<ir::Formula> mus(const std::vector<ir::Formula>& background, const std::vector<ir::Formula>& fixed,
                             const std::vector<ir::Formula>& candidates, const Config& cfg = {});
std::vector<ir::Formula> mus(Session& session, const std::vector<ir::Formula>& background,
                             const std::vector<ir::Formula>& fixed, const std::vector<ir::Formula>& candidates);

// Deletion-based shrinking: a minimal subset of `core` keeping background ∪ fixed ∪ core unsat.
std::vector<ir::Formula> shrink_core(Session& session, const std::vector<ir::Formula>& fixed,
                                     std::vector<ir::Formula> core);

// ---------------------------------------------------------------- normal forms

// Negation pushed to atoms; ¬(t=0) becomes t<0 ∨ -t<0.
ir::Formula nnf(const ir::Formula& f);

// Disjuncts with contradictory Boolean literals or trivially empty polyhedra are dropped.
// nullopt if more than `cap` disjuncts would be produced.
std::optional<std::vector<Cube>> to_dnf(const ir::Formula& f, size_t cap = 1u << 20);

// Clauses whose conjunction is equivalent to f; nullopt (overflow) above `cap` clauses.
std::optional<std::vector<ir::Formula>> to_cnf(const ir::Formula& f, size_t cap);

}  // namespace spacer::arith
