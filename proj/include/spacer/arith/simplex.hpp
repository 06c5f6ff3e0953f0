#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "spacer/ir/rational.hpp"

namespace spacer::arith {

// a + b*delta, delta a positive infinitesimal.
struct DeltaRat {
  Rat a{0};
  Rat b{0};

  friend bool operator<(const DeltaRat& x, const DeltaRat& y) { return x.a < y.a || (x.a == y.a && x.b < y.b); }
  friend bool operator<=(const DeltaRat& x, const DeltaRat& y) { return !(y < x); }
  friend bool operator>(const DeltaRat& x, const DeltaRat& y) { return y < x; }
  friend bool operator>=(const DeltaRat& x, const DeltaRat& y) { return !(x < y); }
  friend bool operator==(const DeltaRat& x, const DeltaRat& y) { return x.a == y.a && x.b == y.b; }
};

// General simplex over bounded variables with backtrackable bounds.
// Each bound carries a reason tag reported back in conflict explanations.
class Simplex {
 public:
  using Row = std::vector<std::pair<int, Rat>>;  // sorted by column

  int add_var();
  // New variable constrained to equal sum(coeff * var); returns its index.
  int add_row(const Row& definition);
  int num_vars() const { return static_cast<int>(value_.size()); }

  // Returns false and fills conflict() if the bound contradicts the opposite bound.
  bool assert_upper(int x, const DeltaRat& c, int reason);
  bool assert_lower(int x, const DeltaRat& c, int reason);

  // Restores feasibility of basic variables. False on conflict.
  bool check();
  const std::vector<int>& conflict() const { return conflict_; }

  void push();
  void pop(int levels = 1);
  int level() const { return static_cast<int>(marks_.size()); }

  const DeltaRat& value(int x) const { return value_[x]; }
  // Concrete delta keeping every asserted bound satisfied.
  Rat concrete_delta() const;
  Rat concrete_value(int x, const Rat& delta) const { return value_[x].a + value_[x].b * delta; }

  void set_pivot_limit(long n) { pivot_limit_ = n; }
  bool exhausted() const { return exhausted_; }

 private:
  struct Bound {
    DeltaRat v;
    int reason = -1;
  };
  struct TrailEntry {
    int var;
    bool upper;
    std::optional<Bound> old;
  };

  void update(int x, const DeltaRat& v);
  void pivot_and_update(int basic, int nonbasic, const DeltaRat& v);
  void pivot(int row, int nonbasic);
  const Rat* row_coeff(int row, int var) const;

  std::vector<DeltaRat> value_;
  std::vector<std::optional<Bound>> lower_, upper_;
  std::vector<int> row_of_;    // -1 when nonbasic
  std::vector<int> basic_of_;  // per row
  std::vector<Row> rows_;      // basic = sum over nonbasic
  std::vector<std::vector<int>> col_rows_;  // may contain stale rows
  std::vector<TrailEntry> trail_;
  std::vector<size_t> marks_;
  std::vector<int> conflict_;
  long pivot_limit_ = -1;
  long pivots_ = 0;
  bool exhausted_ = false;
};

}  // namespace spacer::arith
