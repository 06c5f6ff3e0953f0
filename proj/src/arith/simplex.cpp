#include "spacer/arith/simplex.hpp"

#include <algorithm>

namespace spacer::arith {

namespace {

DeltaRat operator+(const DeltaRat& x, const DeltaRat& y) { return {x.a + y.a, x.b + y.b}; }
DeltaRat operator-(const DeltaRat& x, const DeltaRat& y) { return {x.a - y.a, x.b - y.b}; }
DeltaRat operator*(const Rat& k, const DeltaRat& x) { return {k * x.a, k * x.b}; }

// out = x + k*y over sorted sparse rows; reports columns that appeared or vanished.
void axpy(Simplex::Row& x, const Rat& k, const Simplex::Row& y, int skip, std::vector<int>& added,
          std::vector<int>& removed) {
  Simplex::Row out;
  out.reserve(x.size() + y.size());
  size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j < y.size() && y[j].first == skip) {
      ++j;
      continue;
    }
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.push_back(std::move(x[i++]));
    } else if (i == x.size() || y[j].first < x[i].first) {
      out.emplace_back(y[j].first, k * y[j].second);
      added.push_back(y[j].first);
      ++j;
    } else {
      Rat c = x[i].second + k * y[j].second;
      if (c == 0)
        removed.push_back(x[i].first);
      else
        out.emplace_back(x[i].first, std::move(c));
      ++i, ++j;
    }
  }
  x = std::move(out);
}

}  // namespace

int Simplex::add_var() {
  value_.emplace_back();
  lower_.emplace_back();
  upper_.emplace_back();
  row_of_.push_back(-1);
  col_rows_.emplace_back();
  return num_vars() - 1;
}

const Rat* Simplex::row_coeff(int row, int var) const {
  const Row& r = rows_[row];
  auto it = std::lower_bound(r.begin(), r.end(), var, [](const auto& e, int v) { return e.first < v; });
  return it != r.end() && it->first == var ? &it->second : nullptr;
}

int Simplex::add_row(const Row& definition) {
  Row row;
  std::vector<int> added, removed;
  DeltaRat val;
  for (const auto& [x, a] : definition) {
    val = val + a * value_[x];
    if (row_of_[x] >= 0) {
      axpy(row, a, rows_[row_of_[x]], -1, added, removed);
    } else {
      Row single{{x, a}};
      axpy(row, Rat(1), single, -1, added, removed);
    }
  }
  int s = add_var();
  value_[s] = val;
  int r = static_cast<int>(rows_.size());
  rows_.push_back(std::move(row));
  basic_of_.push_back(s);
  row_of_[s] = r;
  for (const auto& [x, a] : rows_[r]) col_rows_[x].push_back(r);
  return s;
}

void Simplex::update(int x, const DeltaRat& v) {
  DeltaRat diff = v - value_[x];
  for (int r : col_rows_[x]) {
    const Rat* c = row_coeff(r, x);
    value_[basic_of_[r]] = value_[basic_of_[r]] + *c * diff;
  }
  value_[x] = v;
}

void Simplex::pivot_and_update(int basic, int nonbasic, const DeltaRat& v) {
  int r = row_of_[basic];
  Rat a = *row_coeff(r, nonbasic);
  DeltaRat theta = (Rat(1) / a) * (v - value_[basic]);
  value_[basic] = v;
  value_[nonbasic] = value_[nonbasic] + theta;
  for (int r2 : col_rows_[nonbasic]) {
    if (r2 == r) continue;
    value_[basic_of_[r2]] = value_[basic_of_[r2]] + *row_coeff(r2, nonbasic) * theta;
  }
  pivot(r, nonbasic);
}

void Simplex::pivot(int r, int xj) {
  int xi = basic_of_[r];
  Rat a = *row_coeff(r, xj);
  Rat inv = Rat(1) / a;
  // xj = inv*xi - sum_{k != j} (a_k / a) x_k
  Row nr;
  nr.reserve(rows_[r].size());
  bool placed = false;
  for (const auto& [x, c] : rows_[r]) {
    if (!placed && xi < x) {
      nr.emplace_back(xi, inv);
      placed = true;
    }
    if (x == xj) continue;
    nr.emplace_back(x, -c * inv);
  }
  if (!placed) nr.emplace_back(xi, inv);
  for (const auto& [x, c] : rows_[r]) {
    auto& cr = col_rows_[x];
    cr.erase(std::remove(cr.begin(), cr.end(), r), cr.end());
  }
  rows_[r] = std::move(nr);
  for (const auto& [x, c] : rows_[r]) col_rows_[x].push_back(r);
  basic_of_[r] = xj;
  row_of_[xj] = r;
  row_of_[xi] = -1;

  std::vector<int> users = col_rows_[xj];
  for (int r2 : users) {
    if (r2 == r) continue;
    Rat c = *row_coeff(r2, xj);
    std::vector<int> added, removed;
    axpy(rows_[r2], c, rows_[r], xj, added, removed);
    // drop xj itself
    auto& row2 = rows_[r2];
    row2.erase(std::remove_if(row2.begin(), row2.end(), [xj](const auto& e) { return e.first == xj; }), row2.end());
    removed.push_back(xj);
    for (int x : removed) {
      auto& cr = col_rows_[x];
      cr.erase(std::remove(cr.begin(), cr.end(), r2), cr.end());
    }
    for (int x : added) col_rows_[x].push_back(r2);
  }
}

bool Simplex::assert_upper(int x, const DeltaRat& c, int reason) {
  if (upper_[x] && upper_[x]->v <= c) return true;
  if (lower_[x] && c < lower_[x]->v) {
    conflict_ = {reason, lower_[x]->reason};
    return false;
  }
  trail_.push_back({x, true, upper_[x]});
  upper_[x] = Bound{c, reason};
  if (row_of_[x] < 0 && value_[x] > c) update(x, c);
  return true;
}

bool Simplex::assert_lower(int x, const DeltaRat& c, int reason) {
  if (lower_[x] && c <= lower_[x]->v) return true;
  if (upper_[x] && upper_[x]->v < c) {
    conflict_ = {reason, upper_[x]->reason};
    return false;
  }
  trail_.push_back({x, false, lower_[x]});
  lower_[x] = Bound{c, reason};
  if (row_of_[x] < 0 && value_[x] < c) update(x, c);
  return true;
}

bool Simplex::check() {
  for (;;) {
    int xi = -1;
    for (size_t r = 0; r < rows_.size(); ++r) {
      int b = basic_of_[r];
      if ((lower_[b] && value_[b] < lower_[b]->v) || (upper_[b] && value_[b] > upper_[b]->v))
        if (xi < 0 || b < xi) xi = b;
    }
    if (xi < 0) return true;
    if (pivot_limit_ >= 0 && pivots_ >= pivot_limit_) {
      exhausted_ = true;
      conflict_.clear();
      return false;
    }
    const Row& row = rows_[row_of_[xi]];
    bool raise = lower_[xi] && value_[xi] < lower_[xi]->v;
    int xj = -1;
    for (const auto& [x, a] : row) {
      bool up = raise == (a > 0);  // need x to move up
      bool room = up ? (!upper_[x] || value_[x] < upper_[x]->v) : (!lower_[x] || value_[x] > lower_[x]->v);
      if (room) {
        xj = x;
        break;
      }
    }
    if (xj < 0) {
      conflict_.clear();
      conflict_.push_back(raise ? lower_[xi]->reason : upper_[xi]->reason);
      for (const auto& [x, a] : row) {
        bool up = raise == (a > 0);
        conflict_.push_back(up ? upper_[x]->reason : lower_[x]->reason);
      }
      return false;
    }
    ++pivots_;
    pivot_and_update(xi, xj, raise ? lower_[xi]->v : upper_[xi]->v);
  }
}

void Simplex::push() { marks_.push_back(trail_.size()); }

void Simplex::pop(int levels) {
  if (levels <= 0) return;
  size_t target = marks_[marks_.size() - levels];
  marks_.resize(marks_.size() - levels);
  while (trail_.size() > target) {
    TrailEntry& t = trail_.back();
    (t.upper ? upper_ : lower_)[t.var] = std::move(t.old);
    trail_.pop_back();
  }
}

Rat Simplex::concrete_delta() const {
  Rat delta = 1;
  for (int x = 0; x < num_vars(); ++x) {
    const DeltaRat& v = value_[x];
    if (lower_[x]) {
      const DeltaRat& l = lower_[x]->v;
      if (l.a < v.a && l.b > v.b) delta = std::min(delta, Rat((v.a - l.a) / (l.b - v.b)));
    }
    if (upper_[x]) {
      const DeltaRat& u = upper_[x]->v;
      if (v.a < u.a && v.b > u.b) delta = std::min(delta, Rat((u.a - v.a) / (v.b - u.b)));
    }
  }
  return delta;
}

}  // namespace spacer::arith
