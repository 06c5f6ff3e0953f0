#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "spacer/arith/simplex.hpp"
#include "spacer/ir/formula.hpp"

namespace spacer::arith {

struct Limits {
  long max_conflicts = -1;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

// Incremental CDCL(LRA) solver. Formulas are Tseitin-encoded; rational atoms are
// decided by a backtrackable simplex; assumptions are decided first, MiniSat style.
class SmtSolver {
 public:
  enum class Status { Sat, Unsat, Unknown };

  SmtSolver();
  explicit SmtSolver(Limits limits);

  void add(const ir::Formula& f);
  Status check(const std::vector<ir::Formula>& assumptions = {});

  // Valid after Sat. Variables never seen evaluate to 0 / false.
  Rat value(ir::VarRef v) const;
  bool truth(ir::VarRef v) const;
  std::map<ir::VarRef, Rat> model() const;
  // Valid after Unsat: indices into the last assumption vector.
  const std::vector<size_t>& core() const { return core_; }

  // Preferred first polarity when the solver decides on this literal's variable.
  void prefer(const ir::Formula& literal);

  long conflicts() const { return conflicts_; }

 private:
  using Lit = int;
  static Lit mk(int var, bool neg) { return 2 * var + (neg ? 1 : 0); }
  static int var_of(Lit l) { return l >> 1; }
  static bool sign(Lit l) { return l & 1; }
  static Lit neg(Lit l) { return l ^ 1; }

  enum : int8_t { kFalse = 0, kTrue = 1, kUndef = 2 };

  struct TheoryAtom {
    int col;
    bool strict;
    Rat k;  // col <= k (or < k)
  };

  int new_var();
  int8_t value_of(Lit l) const;
  Lit encode(const ir::Formula& f);
  int column(const std::vector<std::pair<ir::VarRef, Rat>>& form);
  Lit theory_lit(int col, bool strict, const Rat& k);
  void add_clause(std::vector<Lit> lits, bool learnt);
  void enqueue(Lit l, int reason);
  int propagate();
  int theory_check();
  void analyze(int confl, std::vector<Lit>& out, int& bt_level);
  void analyze_final(Lit p);
  void backtrack(int level);
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }
  void new_level();
  Lit pick_branch();
  void bump(int v);
  bool out_of_budget() const;
  void compute_model();

  // heap over variable activity
  void heap_insert(int v);
  int heap_pop();
  void heap_up(int i);
  void heap_down(int i);
  bool heap_less(int a, int b) const { return activity_[a] > activity_[b]; }

  Limits limits_;
  Simplex simplex_;

  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int8_t> assign_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<bool> phase_;
  std::vector<int8_t> fixed_phase_;
  std::vector<int> preferred_;
  std::vector<double> activity_;
  std::vector<int> heap_, heap_pos_;
  std::vector<char> seen_;
  std::vector<std::optional<TheoryAtom>> theory_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;
  size_t theory_head_ = 0;
  double var_inc_ = 1.0;
  bool unsat_ = false;
  long conflicts_ = 0;
  bool unknown_ = false;

  Lit true_lit_;
  std::unordered_map<ir::Formula, Lit> memo_;
  std::map<ir::VarRef, int> bool_vars_;
  std::map<ir::VarRef, int> rat_cols_;
  std::map<std::vector<std::pair<ir::VarRef, Rat>>, int> forms_;
  std::map<std::tuple<int, bool, Rat>, Lit> theory_lits_;

  std::vector<size_t> core_;
  std::vector<Lit> core_lits_;
  std::map<ir::VarRef, Rat> model_;
};

}  // namespace spacer::arith
