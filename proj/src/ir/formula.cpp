#include "spacer/ir/formula.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace spacer::ir {

// ---------------------------------------------------------------- LinTerm

LinTerm LinTerm::var(VarRef v, Rat coeff) {
  LinTerm t;
  if (coeff != 0) t.coeffs_.emplace_back(v, std::move(coeff));
  return t;
}

Rat LinTerm::coeff(VarRef v) const {
  auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), v,
                             [](const Entry& e, const VarRef& x) { return e.first < x; });
  if (it != coeffs_.end() && it->first == v) return it->second;
  return 0;
}

bool LinTerm::mentions(VarRef v) const { return coeff(v) != 0; }

void LinTerm::add(VarRef v, const Rat& c) {
  if (c == 0) return;
  auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), v,
                             [](const Entry& e, const VarRef& x) { return e.first < x; });
  if (it != coeffs_.end() && it->first == v) {
    it->second += c;
    if (it->second == 0) coeffs_.erase(it);
  } else {
    coeffs_.emplace(it, v, c);
  }
}

LinTerm& LinTerm::operator+=(const LinTerm& o) {
  std::vector<Entry> out;
  out.reserve(coeffs_.size() + o.coeffs_.size());
  size_t i = 0, j = 0;
  while (i < coeffs_.size() || j < o.coeffs_.size()) {
    if (j == o.coeffs_.size() || (i < coeffs_.size() && coeffs_[i].first < o.coeffs_[j].first)) {
      out.push_back(std::move(coeffs_[i++]));
    } else if (i == coeffs_.size() || o.coeffs_[j].first < coeffs_[i].first) {
      out.push_back(o.coeffs_[j++]);
    } else {
      Rat c = coeffs_[i].second + o.coeffs_[j].second;
      if (c != 0) out.emplace_back(coeffs_[i].first, std::move(c));
      ++i, ++j;
    }
  }
  coeffs_ = std::move(out);
  constant_ += o.constant_;
  return *this;
}

LinTerm& LinTerm::operator-=(const LinTerm& o) { return *this += -o; }

LinTerm& LinTerm::operator*=(const Rat& k) {
  if (k == 0) {
    coeffs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& e : coeffs_) e.second *= k;
  constant_ *= k;
  return *this;
}

LinTerm LinTerm::substitute(VarRef v, const LinTerm& t) const {
  Rat c = coeff(v);
  if (c == 0) return *this;
  LinTerm r = *this;
  r.add(v, -c);
  r += t * c;
  return r;
}

LinTerm LinTerm::rename(const std::function<VarRef(VarRef)>& f) const {
  LinTerm r(constant_);
  for (const auto& [v, c] : coeffs_) r.add(f(v), c);
  return r;
}

Rat LinTerm::eval(const Valuation& cur, const Valuation* next) const {
  Rat s = constant_;
  for (const auto& [v, c] : coeffs_) {
    const Valuation* val = v.primed ? next : &cur;
    if (!val) throw std::out_of_range("no next-state valuation for " + to_string(v));
    auto it = val->find(v.sym);
    if (it == val->end()) throw std::out_of_range("unassigned variable " + to_string(v));
    s += c * it->second;
  }
  return s;
}

// ---------------------------------------------------------------- atoms

std::optional<LinAtom> normalize(LinTerm term, Rel rel) {
  if (term.is_constant()) return std::nullopt;
  mpz_class l = 1;
  for (const auto& [v, c] : term.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  mpz_class g = 0;
  for (const auto& [v, c] : term.coeffs()) {
    mpz_class n = c.get_num() * (l / c.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  Rat k(l, g);
  k.canonicalize();
  if (rel == Rel::Eq && term.coeffs().front().second < 0) k = -k;
  if (k != 1) term *= k;
  return LinAtom{std::move(term), rel};
}

bool holds(const Rat& value, Rel rel) {
  switch (rel) {
    case Rel::Le: return value <= 0;
    case Rel::Lt: return value < 0;
    case Rel::Eq: return value == 0;
  }
  return false;
}

// ---------------------------------------------------------------- Formula

struct Formula::Node {
  Kind kind;
  LinAtom atom;
  VarRef var;
  std::vector<Formula> kids;
  size_t hash = 0;
};

namespace {

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

size_t hash_rat(const Rat& r) {
  size_t h = mpz_size(r.get_num_mpz_t()) ? mpz_getlimbn(r.get_num_mpz_t(), 0) : 0;
  h = mix(h, static_cast<size_t>(mpz_sgn(r.get_num_mpz_t()) + 1));
  return mix(h, mpz_getlimbn(r.get_den_mpz_t(), 0));
}

size_t hash_atom(const LinAtom& a) {
  size_t h = static_cast<size_t>(a.rel);
  for (const auto& [v, c] : a.term.coeffs()) h = mix(mix(h, std::hash<VarRef>{}(v)), hash_rat(c));
  return mix(h, hash_rat(a.term.constant()));
}

int cmp_rat(const Rat& a, const Rat& b) { return cmp(a, b) < 0 ? -1 : (cmp(a, b) > 0 ? 1 : 0); }

int cmp_atom(const LinAtom& a, const LinAtom& b) {
  if (a.rel != b.rel) return a.rel < b.rel ? -1 : 1;
  const auto& x = a.term.coeffs();
  const auto& y = b.term.coeffs();
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i].first != y[i].first) return x[i].first < y[i].first ? -1 : 1;
    if (int c = cmp_rat(x[i].second, y[i].second)) return c;
  }
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  return cmp_rat(a.term.constant(), b.term.constant());
}

}  // namespace

Formula::Formula() : Formula(top()) {}

Formula Formula::top() {
  static const Formula t(std::make_shared<const Node>(Node{Kind::True, {}, {}, {}, 1}));
  return t;
}

Formula Formula::bottom() {
  static const Formula f(std::make_shared<const Node>(Node{Kind::False, {}, {}, {}, 2}));
  return f;
}

Formula Formula::atom(LinTerm term, Rel rel) {
  if (term.is_constant()) return holds(term.constant(), rel) ? top() : bottom();
  auto a = normalize(std::move(term), rel);
  size_t h = mix(3, hash_atom(*a));
  return Formula(std::make_shared<const Node>(Node{Kind::Atom, std::move(*a), {}, {}, h}));
}

Formula Formula::atom(const LinAtom& a) { return atom(a.term, a.rel); }

Formula Formula::boolvar(VarRef v) {
  size_t h = mix(4, std::hash<VarRef>{}(v));
  return Formula(std::make_shared<const Node>(Node{Kind::Bool, {}, v, {}, h}));
}

Formula Formula::lnot(const Formula& f) {
  switch (f.kind()) {
    case Kind::True: return bottom();
    case Kind::False: return top();
    case Kind::Not: return f.children()[0];
    default: break;
  }
  size_t h = mix(5, f.hash());
  return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {}, {f}, h}));
}

Formula Formula::land(std::vector<Formula> fs) { return junction(std::move(fs), Kind::And); }
Formula Formula::lor(std::vector<Formula> fs) { return junction(std::move(fs), Kind::Or); }

Formula Formula::junction(std::vector<Formula> fs, Kind self) {
  const Kind absorbing = self == Kind::And ? Kind::False : Kind::True;
  const Kind neutral = self == Kind::And ? Kind::True : Kind::False;
  std::vector<Formula> flat;
  flat.reserve(fs.size());
  for (auto& f : fs) {
    if (f.kind() == absorbing) return f;
    if (f.kind() == neutral) continue;
    if (f.kind() == self)
      flat.insert(flat.end(), f.children().begin(), f.children().end());
    else
      flat.push_back(std::move(f));
  }
  std::vector<Formula> uniq;
  uniq.reserve(flat.size());
  for (auto& f : flat)
    if (std::find(uniq.begin(), uniq.end(), f) == uniq.end()) uniq.push_back(std::move(f));
  if (uniq.empty()) return self == Kind::And ? top() : bottom();
  if (uniq.size() == 1) return uniq.front();
  size_t h = self == Kind::And ? 6 : 7;
  for (const auto& f : uniq) h = mix(h, f.hash());
  return Formula(std::make_shared<const Node>(Node{self, {}, {}, std::move(uniq), h}));
}

Formula::Kind Formula::kind() const { return n_->kind; }
const LinAtom& Formula::lin() const { return n_->atom; }
VarRef Formula::boolvar_ref() const { return n_->var; }
const std::vector<Formula>& Formula::children() const { return n_->kids; }
size_t Formula::hash() const { return n_->hash; }

namespace {

int compare(const Formula& a, const Formula& b) {
  if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return 0;
    case Formula::Kind::Atom: return cmp_atom(a.lin(), b.lin());
    case Formula::Kind::Bool:
      if (a.boolvar_ref() == b.boolvar_ref()) return 0;
      return a.boolvar_ref() < b.boolvar_ref() ? -1 : 1;
    default: {
      const auto& x = a.children();
      const auto& y = b.children();
      if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
      for (size_t i = 0; i < x.size(); ++i)
        if (int c = compare(x[i], y[i])) return c;
      return 0;
    }
  }
}

}  // namespace

bool operator==(const Formula& a, const Formula& b) { return a.n_ == b.n_ || compare(a, b) == 0; }
bool operator<(const Formula& a, const Formula& b) { return a.n_ != b.n_ && compare(a, b) < 0; }

// ---------------------------------------------------------------- operations

bool eval(const Formula& f, const Valuation& cur, const Valuation* next) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::Atom: return holds(f.lin().term.eval(cur, next), f.lin().rel);
    case K::Bool: {
      VarRef v = f.boolvar_ref();
      const Valuation* val = v.primed ? next : &cur;
      if (!val) throw std::out_of_range("no next-state valuation for " + to_string(v));
      auto it = val->find(v.sym);
      if (it == val->end()) throw std::out_of_range("unassigned variable " + to_string(v));
      return it->second != 0;
    }
    case K::Not: return !eval(f.children()[0], cur, next);
    case K::And:
      for (const auto& g : f.children())
        if (!eval(g, cur, next)) return false;
      return true;
    case K::Or:
      for (const auto& g : f.children())
        if (eval(g, cur, next)) return true;
      return false;
  }
  return false;
}

void collect_vars(const Formula& f, std::vector<VarRef>& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
      for (const auto& [v, c] : f.lin().term.coeffs()) out.push_back(v);
      break;
    case K::Bool: out.push_back(f.boolvar_ref()); break;
    case K::Not:
    case K::And:
    case K::Or:
      for (const auto& g : f.children()) collect_vars(g, out);
      break;
    default: break;
  }
}

std::vector<VarRef> vars_of(const Formula& f) {
  std::vector<VarRef> out;
  collect_vars(f, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool has_primed(const Formula& f) {
  for (const auto& v : vars_of(f))
    if (v.primed) return true;
  return false;
}

bool has_unprimed(const Formula& f) {
  for (const auto& v : vars_of(f))
    if (!v.primed) return true;
  return false;
}

Formula rename(const Formula& f, const std::function<VarRef(VarRef)>& g) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True:
    case K::False: return f;
    case K::Atom: return Formula::atom(f.lin().term.rename(g), f.lin().rel);
    case K::Bool: return Formula::boolvar(g(f.boolvar_ref()));
    case K::Not: return Formula::lnot(rename(f.children()[0], g));
    case K::And:
    case K::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(rename(c, g));
      return f.kind() == K::And ? Formula::land(std::move(kids)) : Formula::lor(std::move(kids));
    }
  }
  return f;
}

Formula prime(const Formula& f) {
  if (has_primed(f)) throw std::invalid_argument("prime: formula already mentions a primed variable");
  return rename(f, [](VarRef v) { return VarRef{v.sym, true}; });
}

Formula unprime(const Formula& f) {
  if (has_unprimed(f)) throw std::invalid_argument("unprime: formula mentions an unprimed variable");
  return rename(f, [](VarRef v) { return VarRef{v.sym, false}; });
}

Formula substitute_bools(const Formula& f, const std::function<std::optional<bool>(VarRef)>& value) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Bool: {
      auto b = value(f.boolvar_ref());
      if (!b) return f;
      return *b ? Formula::top() : Formula::bottom();
    }
    case K::Not: return Formula::lnot(substitute_bools(f.children()[0], value));
    case K::And:
    case K::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(substitute_bools(c, value));
      return f.kind() == K::And ? Formula::land(std::move(kids)) : Formula::lor(std::move(kids));
    }
    default: return f;
  }
}

std::string debug_string(const Formula& f) {
  using K = Formula::Kind;
  std::ostringstream os;
  switch (f.kind()) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Bool: return to_string(f.boolvar_ref());
    case K::Atom: {
      bool first = true;
      for (const auto& [v, c] : f.lin().term.coeffs()) {
        if (!first) os << " + ";
        first = false;
        if (c != 1) os << spacer::to_string(c) << "*";
        os << to_string(v);
      }
      if (f.lin().term.constant() != 0) os << " + " << spacer::to_string(f.lin().term.constant());
      os << (f.lin().rel == Rel::Le ? " <= 0" : f.lin().rel == Rel::Lt ? " < 0" : " = 0");
      return os.str();
    }
    case K::Not: return "!(" + debug_string(f.children()[0]) + ")";
    case K::And:
    case K::Or: {
      os << "(";
      for (size_t i = 0; i < f.children().size(); ++i) {
        if (i) os << (f.kind() == K::And ? " & " : " | ");
        os << debug_string(f.children()[i]);
      }
      os << ")";
      return os.str();
    }
  }
  return "?";
}

}  // namespace spacer::ir
