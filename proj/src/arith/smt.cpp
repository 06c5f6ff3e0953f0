#include "spacer/arith/smt.hpp"

#include <algorithm>
#include <cmath>

namespace spacer::arith {

using ir::Formula;
using ir::VarRef;

namespace {

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

SmtSolver::SmtSolver() : SmtSolver(Limits{}) {}

SmtSolver::SmtSolver(Limits limits) : limits_(limits) {
  int v = new_var();
  true_lit_ = mk(v, false);
  add_clause({true_lit_}, false);
}

int SmtSolver::new_var() {
  int v = static_cast<int>(assign_.size());
  assign_.push_back(kUndef);
  level_.push_back(-1);
  reason_.push_back(-1);
  phase_.push_back(false);
  fixed_phase_.push_back(kUndef);
  activity_.push_back(0.0);
  seen_.push_back(0);
  theory_.emplace_back();
  watches_.emplace_back();
  watches_.emplace_back();
  heap_pos_.push_back(-1);
  heap_insert(v);
  return v;
}

int8_t SmtSolver::value_of(Lit l) const {
  int8_t a = assign_[var_of(l)];
  if (a == kUndef) return kUndef;
  return sign(l) ? static_cast<int8_t>(1 - a) : a;
}

// ---------------------------------------------------------------- encoding

int SmtSolver::column(const std::vector<std::pair<VarRef, Rat>>& form) {
  auto col_of = [this](VarRef v) {
    auto it = rat_cols_.find(v);
    if (it != rat_cols_.end()) return it->second;
    int c = simplex_.add_var();
    rat_cols_.emplace(v, c);
    return c;
  };
  if (form.size() == 1 && form[0].second == 1) return col_of(form[0].first);
  auto it = forms_.find(form);
  if (it != forms_.end()) return it->second;
  Simplex::Row row;
  for (const auto& [v, c] : form) row.emplace_back(col_of(v), c);
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  int s = simplex_.add_row(row);
  forms_.emplace(form, s);
  return s;
}

SmtSolver::Lit SmtSolver::theory_lit(int col, bool strict, const Rat& k) {
  auto key = std::make_tuple(col, strict, k);
  auto it = theory_lits_.find(key);
  if (it != theory_lits_.end()) return it->second;
  int v = new_var();
  theory_[v] = TheoryAtom{col, strict, k};
  Lit l = mk(v, false);
  theory_lits_.emplace(key, l);
  return l;
}

SmtSolver::Lit SmtSolver::encode(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return true_lit_;
    case K::False: return neg(true_lit_);
    case K::Not: return neg(encode(f.children()[0]));
    default: break;
  }
  auto it = memo_.find(f);
  if (it != memo_.end()) return it->second;
  Lit out = true_lit_;
  switch (f.kind()) {
    case K::Bool: {
      auto b = bool_vars_.find(f.boolvar_ref());
      if (b == bool_vars_.end()) b = bool_vars_.emplace(f.boolvar_ref(), new_var()).first;
      out = mk(b->second, false);
      break;
    }
    case K::Atom: {
      const auto& coeffs = f.lin().term.coeffs();
      Rat a0 = coeffs.front().second;
      std::vector<std::pair<VarRef, Rat>> form;
      form.reserve(coeffs.size());
      for (const auto& [v, c] : coeffs) form.emplace_back(v, c / a0);
      Rat k = -f.lin().term.constant() / a0;
      int col = column(form);
      switch (f.lin().rel) {
        case ir::Rel::Le: out = a0 > 0 ? theory_lit(col, false, k) : neg(theory_lit(col, true, k)); break;
        case ir::Rel::Lt: out = a0 > 0 ? theory_lit(col, true, k) : neg(theory_lit(col, false, k)); break;
        case ir::Rel::Eq: {
          Lit le = theory_lit(col, false, k);
          Lit ge = neg(theory_lit(col, true, k));
          out = mk(new_var(), false);
          add_clause({neg(out), le}, false);
          add_clause({neg(out), ge}, false);
          add_clause({out, neg(le), neg(ge)}, false);
          break;
        }
      }
      break;
    }
    case K::And:
    case K::Or: {
      bool conj = f.kind() == K::And;
      std::vector<Lit> kids;
      for (const auto& c : f.children()) kids.push_back(encode(c));
      out = mk(new_var(), false);
      std::vector<Lit> big{conj ? out : neg(out)};
      for (Lit c : kids) {
        if (conj)
          add_clause({neg(out), c}, false);
        else
          add_clause({out, neg(c)}, false);
        big.push_back(conj ? neg(c) : c);
      }
      add_clause(std::move(big), false);
      break;
    }
    default: out = true_lit_;
  }
  memo_.emplace(f, out);
  return out;
}

void SmtSolver::add(const Formula& f) {
  backtrack(0);
  using K = Formula::Kind;
  if (f.kind() == K::And) {
    for (const auto& c : f.children()) add(c);
    return;
  }
  if (f.kind() == K::Or) {
    std::vector<Lit> lits;
    for (const auto& c : f.children()) lits.push_back(encode(c));
    add_clause(std::move(lits), false);
    return;
  }
  add_clause({encode(f)}, false);
}

void SmtSolver::prefer(const Formula& literal) {
  Lit l = encode(literal);
  if (fixed_phase_[var_of(l)] == kUndef) preferred_.push_back(var_of(l));
  fixed_phase_[var_of(l)] = sign(l) ? kFalse : kTrue;
}

void SmtSolver::add_clause(std::vector<Lit> lits, bool learnt) {
  if (!learnt) {
    // level-0 simplification
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<Lit> kept;
    for (size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == neg(lits[i])) return;
      int8_t v = value_of(lits[i]);
      if (v == kTrue && level_[var_of(lits[i])] == 0) return;
      if (v == kFalse && level_[var_of(lits[i])] == 0) continue;
      kept.push_back(lits[i]);
    }
    lits = std::move(kept);
    if (lits.empty()) {
      unsat_ = true;
      return;
    }
    if (lits.size() == 1) {
      if (value_of(lits[0]) == kUndef) enqueue(lits[0], -1);
      if (propagate() >= 0) unsat_ = true;
      return;
    }
  }
  int idx = static_cast<int>(clauses_.size());
  clauses_.push_back(std::move(lits));
  const auto& c = clauses_.back();
  watches_[neg(c[0])].push_back(idx);
  watches_[neg(c[1])].push_back(idx);
}

// ---------------------------------------------------------------- search

void SmtSolver::enqueue(Lit l, int reason) {
  int v = var_of(l);
  assign_[v] = sign(l) ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

int SmtSolver::propagate() {
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = neg(p);
    auto& ws = watches_[p];
    size_t i = 0, j = 0;
    int confl = -1;
    while (i < ws.size()) {
      int ci = ws[i++];
      auto& c = clauses_[ci];
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (value_of(c[0]) == kTrue) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.size(); ++k) {
        if (value_of(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[neg(c[1])].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (value_of(c[0]) == kFalse) {
        confl = ci;
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(c[0], ci);
      }
    }
    ws.resize(j);
    if (confl >= 0) {
      qhead_ = trail_.size();
      return confl;
    }
  }
  return -1;
}

int SmtSolver::theory_check() {
  std::vector<int> reasons;
  bool ok = true;
  while (theory_head_ < trail_.size()) {
    Lit l = trail_[theory_head_++];
    const auto& ta = theory_[var_of(l)];
    if (!ta) continue;
    if (!sign(l))
      ok = simplex_.assert_upper(ta->col, DeltaRat{ta->k, ta->strict ? Rat(-1) : Rat(0)}, l);
    else
      ok = simplex_.assert_lower(ta->col, DeltaRat{ta->k, ta->strict ? Rat(0) : Rat(1)}, l);
    if (!ok) break;
  }
  if (ok) ok = simplex_.check();
  if (ok) return -1;
  if (simplex_.exhausted()) {
    unknown_ = true;
    return -1;
  }
  std::vector<Lit> clause;
  for (int r : simplex_.conflict())
    if (level_[var_of(r)] > 0) clause.push_back(neg(r));
  if (clause.empty()) {
    unsat_ = true;
    return -2;
  }
  std::sort(clause.begin(), clause.end());
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  std::sort(clause.begin(), clause.end(), [this](Lit a, Lit b) { return level_[var_of(a)] > level_[var_of(b)]; });
  int top = level_[var_of(clause[0])];
  if (top < decision_level()) backtrack(top);
  if (clause.size() == 1) {
    // a single literal at `top`: learn the unit after going back to level 0
    backtrack(0);
    enqueue(clause[0], -1);
    return -1;
  }
  int idx = static_cast<int>(clauses_.size());
  clauses_.push_back(clause);
  watches_[neg(clause[0])].push_back(idx);
  watches_[neg(clause[1])].push_back(idx);
  return idx;
}

void SmtSolver::bump(int v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
}

void SmtSolver::analyze(int confl, std::vector<Lit>& out, int& bt_level) {
  int path = 0;
  Lit p = -1;
  out.assign(1, 0);
  int index = static_cast<int>(trail_.size()) - 1;
  do {
    const auto& c = clauses_[confl];
    for (size_t j = (p == -1 ? 0 : 1); j < c.size(); ++j) {
      Lit q = c[j];
      int v = var_of(q);
      if (!seen_[v] && level_[v] > 0) {
        bump(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path;
        else
          out.push_back(q);
      }
    }
    while (!seen_[var_of(trail_[index--])]) {
    }
    p = trail_[index + 1];
    confl = reason_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path;
  } while (path > 0);
  out[0] = neg(p);
  bt_level = 0;
  size_t max_i = 1;
  for (size_t i = 1; i < out.size(); ++i) {
    if (level_[var_of(out[i])] > bt_level) {
      bt_level = level_[var_of(out[i])];
      max_i = i;
    }
  }
  if (out.size() > 1) std::swap(out[1], out[max_i]);
  for (Lit l : out) seen_[var_of(l)] = 0;
  var_inc_ *= 1.05;
}

void SmtSolver::analyze_final(Lit p) {
  // p is a false assumption literal; collect the assumption decisions that implied its negation
  std::vector<Lit> involved{p};
  if (decision_level() > 0) {
    seen_[var_of(p)] = 1;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[0]; --i) {
      int x = var_of(trail_[i]);
      if (!seen_[x]) continue;
      if (reason_[x] == -1) {
        involved.push_back(trail_[i]);
      } else {
        const auto& c = clauses_[reason_[x]];
        for (size_t j = 1; j < c.size(); ++j)
          if (level_[var_of(c[j])] > 0) seen_[var_of(c[j])] = 1;
      }
      seen_[x] = 0;
    }
    seen_[var_of(p)] = 0;
  }
  std::sort(involved.begin(), involved.end());
  core_lits_ = std::move(involved);
}

void SmtSolver::backtrack(int level) {
  if (decision_level() <= level) return;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[level]; --i) {
    int v = var_of(trail_[i]);
    phase_[v] = assign_[v] == kTrue;
    assign_[v] = kUndef;
    reason_[v] = -1;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  simplex_.pop(decision_level() - level);
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
  theory_head_ = std::min(theory_head_, trail_.size());
}

void SmtSolver::new_level() {
  trail_lim_.push_back(static_cast<int>(trail_.size()));
  simplex_.push();
}

SmtSolver::Lit SmtSolver::pick_branch() {
  for (int v : preferred_)
    if (assign_[v] == kUndef) return mk(v, fixed_phase_[v] != kTrue);
  while (!heap_.empty()) {
    int v = heap_pop();
    if (assign_[v] != kUndef) continue;
    bool pos = fixed_phase_[v] != kUndef ? fixed_phase_[v] == kTrue : phase_[v];
    return mk(v, !pos);
  }
  return -1;
}

bool SmtSolver::out_of_budget() const {
  if (limits_.max_conflicts >= 0 && conflicts_ >= limits_.max_conflicts) return true;
  return std::chrono::steady_clock::now() > limits_.deadline;
}

SmtSolver::Status SmtSolver::check(const std::vector<Formula>& assumptions) {
  core_.clear();
  core_lits_.clear();
  unknown_ = false;
  backtrack(0);
  std::vector<Lit> alits;
  alits.reserve(assumptions.size());
  for (const auto& a : assumptions) alits.push_back(encode(a));
  if (!unsat_ && propagate() >= 0) unsat_ = true;
  if (unsat_) return Status::Unsat;

  int restarts = 0;
  long next_restart = conflicts_ + static_cast<long>(100 * luby(2, restarts));
  long steps = 0;
  for (;;) {
    int confl = propagate();
    if (confl < 0) {
      confl = theory_check();
      if (unknown_) {
        backtrack(0);
        return Status::Unknown;
      }
      if (confl == -2) return Status::Unsat;
      if (confl == -1 && qhead_ < trail_.size()) continue;  // unit learnt by the theory
    }
    if (confl >= 0) {
      ++conflicts_;
      if (decision_level() == 0) {
        unsat_ = true;
        return Status::Unsat;
      }
      std::vector<Lit> learnt;
      int bt;
      analyze(confl, learnt, bt);
      backtrack(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        int idx = static_cast<int>(clauses_.size());
        clauses_.push_back(learnt);
        watches_[neg(learnt[0])].push_back(idx);
        watches_[neg(learnt[1])].push_back(idx);
        enqueue(learnt[0], idx);
      }
      if (out_of_budget()) {
        backtrack(0);
        return Status::Unknown;
      }
      if (conflicts_ >= next_restart) {
        ++restarts;
        next_restart = conflicts_ + static_cast<long>(100 * luby(2, restarts));
        backtrack(0);
      }
      continue;
    }
    if ((++steps & 1023) == 0 && out_of_budget()) {
      backtrack(0);
      return Status::Unknown;
    }
    Lit next = -1;
    while (decision_level() < static_cast<int>(alits.size())) {
      Lit p = alits[decision_level()];
      int8_t v = value_of(p);
      if (v == kTrue) {
        new_level();
      } else if (v == kFalse) {
        analyze_final(p);
        for (size_t i = 0; i < alits.size(); ++i)
          if (std::binary_search(core_lits_.begin(), core_lits_.end(), alits[i])) core_.push_back(i);
        backtrack(0);
        return Status::Unsat;
      } else {
        next = p;
        break;
      }
    }
    if (next < 0) {
      next = pick_branch();
      if (next < 0) {
        compute_model();
        backtrack(0);
        return Status::Sat;
      }
    }
    new_level();
    enqueue(next, -1);
  }
}

void SmtSolver::compute_model() {
  model_.clear();
  Rat delta = simplex_.concrete_delta();
  for (const auto& [v, c] : rat_cols_) model_[v] = simplex_.concrete_value(c, delta);
  for (const auto& [v, b] : bool_vars_) model_[v] = assign_[b] == kTrue ? 1 : 0;
}

Rat SmtSolver::value(VarRef v) const {
  auto it = model_.find(v);
  return it == model_.end() ? Rat(0) : it->second;
}

bool SmtSolver::truth(VarRef v) const { return value(v) != 0; }

std::map<VarRef, Rat> SmtSolver::model() const { return model_; }

// ---------------------------------------------------------------- heap

void SmtSolver::heap_insert(int v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

int SmtSolver::heap_pop() {
  int top = heap_[0];
  heap_[0] = heap_.back();
  heap_pos_[heap_[0]] = 0;
  heap_.pop_back();
  heap_pos_[top] = -1;
  if (!heap_.empty()) heap_down(0);
  return top;
}

void SmtSolver::heap_up(int i) {
  int v = heap_[i];
  while (i > 0) {
    int parent = (i - 1) >> 1;
    if (!heap_less(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

void SmtSolver::heap_down(int i) {
  int v = heap_[i];
  int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
    if (!heap_less(heap_[child], v)) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = i;
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

}  // namespace spacer::arith
