#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spacer/ir/rational.hpp"
#include "spacer/ir/symbol.hpp"

namespace spacer::ir {

// Booleans are stored as 0/1.
using Valuation = std::map<Symbol, Rat>;

// sum(coeff * var) + constant, coefficients sorted by VarRef and nonzero.
class LinTerm {
 public:
  using Entry = std::pair<VarRef, Rat>;

  LinTerm() = default;
  explicit LinTerm(Rat constant) : constant_(std::move(constant)) {}
  static LinTerm var(VarRef v, Rat coeff = 1);

  const std::vector<Entry>& coeffs() const { return coeffs_; }
  const Rat& constant() const { return constant_; }
  bool is_constant() const { return coeffs_.empty(); }
  Rat coeff(VarRef v) const;
  bool mentions(VarRef v) const;

  LinTerm& operator+=(const LinTerm& o);
  LinTerm& operator-=(const LinTerm& o);
  LinTerm& operator*=(const Rat& k);
  void add(VarRef v, const Rat& c);
  void add_constant(const Rat& c) { constant_ += c; }

  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
  friend LinTerm operator*(LinTerm a, const Rat& k) { return a *= k; }
  LinTerm operator-() const { return *this * Rat(-1); }

  // Replace v by t.
  LinTerm substitute(VarRef v, const LinTerm& t) const;
  LinTerm rename(const std::function<VarRef(VarRef)>& f) const;
  Rat eval(const Valuation& cur, const Valuation* next) const;

  bool operator==(const LinTerm&) const = default;

 private:
  std::vector<Entry> coeffs_;
  Rat constant_{0};
};

enum class Rel : uint8_t { Le, Lt, Eq };

// term REL 0. Canonical: integer coprime coefficients; Eq has a positive leading coefficient.
struct LinAtom {
  LinTerm term;
  Rel rel = Rel::Le;

  bool operator==(const LinAtom&) const = default;
};

// Rescales to canonical form; nullopt when the atom has no variables (caller folds it).
std::optional<LinAtom> normalize(LinTerm term, Rel rel);
bool holds(const Rat& value, Rel rel);

class Formula {
 public:
  enum class Kind : uint8_t { True, False, Atom, Bool, Not, And, Or };

  Formula();  // true

  static Formula top();
  static Formula bottom();
  static Formula atom(LinTerm term, Rel rel);
  static Formula atom(const LinAtom& a);
  static Formula le(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Le); }
  static Formula lt(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Lt); }
  static Formula eq(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Eq); }
  static Formula ge(const LinTerm& a, const LinTerm& b) { return atom(b - a, Rel::Le); }
  static Formula gt(const LinTerm& a, const LinTerm& b) { return atom(b - a, Rel::Lt); }
  static Formula boolvar(VarRef v);
  static Formula lnot(const Formula& f);
  static Formula land(std::vector<Formula> fs);
  static Formula lor(std::vector<Formula> fs);
  static Formula land(const Formula& a, const Formula& b) { return land(std::vector<Formula>{a, b}); }
  static Formula lor(const Formula& a, const Formula& b) { return lor(std::vector<Formula>{a, b}); }
  static Formula implies(const Formula& a, const Formula& b) { return lor(lnot(a), b); }

  Kind kind() const;
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  const LinAtom& lin() const;
  VarRef boolvar_ref() const;
  const std::vector<Formula>& children() const;
  size_t hash() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
  // Arbitrary but deterministic total order within a process.
  friend bool operator<(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  static Formula junction(std::vector<Formula> fs, Kind self);
  std::shared_ptr<const Node> n_;
};

bool eval(const Formula& f, const Valuation& cur, const Valuation* next = nullptr);

void collect_vars(const Formula& f, std::vector<VarRef>& out);
std::vector<VarRef> vars_of(const Formula& f);  // sorted, unique
bool has_primed(const Formula& f);
bool has_unprimed(const Formula& f);

Formula rename(const Formula& f, const std::function<VarRef(VarRef)>& g);
// x -> x'; throws std::invalid_argument if f already mentions a primed variable.
Formula prime(const Formula& f);
// x' -> x; throws std::invalid_argument if f mentions an unprimed variable.
Formula unprime(const Formula& f);
// Replace Boolean variables by constants where `value` answers.
Formula substitute_bools(const Formula& f, const std::function<std::optional<bool>(VarRef)>& value);

std::string debug_string(const Formula& f);

}  // namespace spacer::ir

template <>
struct std::hash<spacer::ir::Formula> {
  size_t operator()(const spacer::ir::Formula& f) const noexcept { return f.hash(); }
};
