#include "spacer/textfmt/textfmt.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace spacer::textfmt {

using ir::Formula;
using ir::LinTerm;
using ir::Location;
using ir::Program;
using ir::Rel;
using ir::Sort;
using ir::Symbol;
using ir::VarRef;

bool is_identifier(std::string_view s) {
  static const std::set<std::string_view> keywords{"true", "false", "not", "and", "or"};
  if (s.empty() || keywords.count(s)) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

namespace {

[[noreturn]] void fail(ErrorKind k, const SExpr& at, const std::string& msg) { throw ParseError(k, at.span, msg); }

const SExpr& expect_list(const SExpr& e, const std::string& what) {
  if (!e.is_list) fail(ErrorKind::Syntax, e, "expected " + what);
  return e;
}

std::string expect_ident(const SExpr& e, const std::string& what) {
  if (e.is_list || !is_identifier(e.atom)) fail(ErrorKind::Syntax, e, "expected " + what);
  return e.atom;
}

class FormulaReader {
 public:
  FormulaReader(const Program& p, bool allow_primed) : p_(p), allow_primed_(allow_primed) {}

  Formula formula(const SExpr& e) {
    if (!e.is_list) {
      if (e.atom == "true") return Formula::top();
      if (e.atom == "false") return Formula::bottom();
      auto [v, sort] = variable(e);
      if (sort != Sort::Bool) fail(ErrorKind::SortMismatch, e, "rational variable '" + e.atom + "' used as a formula");
      return Formula::boolvar(v);
    }
    if (e.items.empty() || e.items[0].is_list) fail(ErrorKind::Syntax, e, "expected a formula operator");
    const std::string& op = e.items[0].atom;
    size_t n = e.items.size() - 1;
    if (op == "not") {
      if (n != 1) fail(ErrorKind::Syntax, e, "'not' takes one argument");
      return Formula::lnot(formula(e.items[1]));
    }
    if (op == "and" || op == "or") {
      if (n < 1) fail(ErrorKind::Syntax, e, "'" + op + "' needs at least one argument");
      std::vector<Formula> kids;
      for (size_t i = 1; i <= n; ++i) kids.push_back(formula(e.items[i]));
      return op == "and" ? Formula::land(std::move(kids)) : Formula::lor(std::move(kids));
    }
    if (op == "<=" || op == "<" || op == "=") {
      if (n != 2) fail(ErrorKind::Syntax, e, "'" + op + "' takes two terms");
      LinTerm d = term(e.items[1]) - term(e.items[2]);
      return Formula::atom(std::move(d), op == "<=" ? Rel::Le : op == "<" ? Rel::Lt : Rel::Eq);
    }
    fail(ErrorKind::Syntax, e.items[0], "unknown formula operator '" + op + "'");
  }

  LinTerm term(const SExpr& e) {
    if (!e.is_list) {
      if (auto r = parse_rat(e.atom)) return LinTerm(*r);
      auto [v, sort] = variable(e);
      if (sort != Sort::Rat) fail(ErrorKind::SortMismatch, e, "Boolean variable '" + e.atom + "' used in a term");
      return LinTerm::var(v);
    }
    if (e.items.empty() || e.items[0].is_list) fail(ErrorKind::Syntax, e, "expected a term operator");
    const std::string& op = e.items[0].atom;
    size_t n = e.items.size() - 1;
    if (op == "+") {
      if (n < 2) fail(ErrorKind::Syntax, e, "'+' needs at least two terms");
      LinTerm t;
      for (size_t i = 1; i <= n; ++i) t += term(e.items[i]);
      return t;
    }
    if (op == "-") {
      if (n != 2) fail(ErrorKind::Syntax, e, "'-' takes two terms");
      return term(e.items[1]) - term(e.items[2]);
    }
    if (op == "*") {
      if (n != 2) fail(ErrorKind::Syntax, e, "'*' takes a rational and a term");
      const SExpr& k = e.items[1];
      auto r = k.is_list ? std::nullopt : parse_rat(k.atom);
      if (!r) fail(ErrorKind::Syntax, k, "expected a rational coefficient");
      return term(e.items[2]) * *r;
    }
    fail(ErrorKind::Syntax, e.items[0], "unknown term operator '" + op + "'");
  }

 private:
  std::pair<VarRef, Sort> variable(const SExpr& e) {
    std::string name = e.atom;
    bool primed = false;
    if (!name.empty() && name.back() == '\'') {
      primed = true;
      name.pop_back();
    }
    if (!is_identifier(name)) {
      if (!name.empty() && (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '-'))
        fail(ErrorKind::Lexical, e, "malformed rational '" + e.atom + "'");
      fail(ErrorKind::Syntax, e, "expected an identifier, got '" + e.atom + "'");
    }
    Symbol s = Symbol::intern(name);
    const ir::VarDecl* d = p_.find_var(s);
    if (!d) fail(ErrorKind::UnknownIdentifier, e, "unknown variable '" + name + "'");
    if (primed && !allow_primed_) fail(ErrorKind::Syntax, e, "primed variable not allowed here");
    return {VarRef{s, primed}, d->sort};
  }

  const Program& p_;
  bool allow_primed_;
};

Location location_of(const Program& p, const SExpr& e) {
  std::string n = expect_ident(e, "a location name");
  auto l = p.find_location(n);
  if (!l) fail(ErrorKind::UnknownIdentifier, e, "unknown location '" + n + "'");
  return *l;
}

std::string print_side(const std::vector<std::pair<VarRef, Rat>>& parts, const Rat& constant) {
  std::vector<std::string> items;
  for (const auto& [v, c] : parts) {
    std::string name = ir::to_string(v);
    items.push_back(c == 1 ? name : "(* " + spacer::to_string(c) + " " + name + ")");
  }
  if (constant != 0) items.push_back(spacer::to_string(constant));
  if (items.empty()) return "0";
  if (items.size() == 1) return items[0];
  std::string s = "(+";
  for (const auto& i : items) s += " " + i;
  return s + ")";
}

}  // namespace

Formula parse_formula(const SExpr& e, const Program& p, bool allow_primed) {
  return FormulaReader(p, allow_primed).formula(e);
}

Formula parse_formula(std::string_view text, const Program& p, bool allow_primed) {
  return parse_formula(parse_sexpr(text), p, allow_primed);
}

Program parse_program(std::string_view text) {
  SExpr top = parse_sexpr(text);
  if (!top.is_head("program")) fail(ErrorKind::Syntax, top, "expected (program ...)");
  const auto& it = top.items;
  if (it.size() < 5) fail(ErrorKind::Syntax, top, "program needs vars, locations, init and error sections");
  Program p;

  const SExpr& vars = expect_list(it[1], "(vars ...)");
  if (!vars.is_head("vars") || vars.items.size() < 2) fail(ErrorKind::Syntax, vars, "expected (vars (NAME rat|bool)+)");
  for (size_t i = 1; i < vars.items.size(); ++i) {
    const SExpr& d = vars.items[i];
    if (!d.is_list || d.items.size() != 2) fail(ErrorKind::Syntax, d, "expected (NAME rat|bool)");
    std::string n = expect_ident(d.items[0], "a variable name");
    Sort s;
    if (d.items[1].is_atom("rat"))
      s = Sort::Rat;
    else if (d.items[1].is_atom("bool"))
      s = Sort::Bool;
    else
      fail(ErrorKind::Syntax, d.items[1], "expected sort rat or bool");
    Symbol sym = Symbol::intern(n);
    if (p.find_var(sym)) fail(ErrorKind::Validation, d.items[0], "duplicate variable '" + n + "'");
    p.vars.push_back({sym, s, ir::VarKind::Program});
  }

  const SExpr& locs = expect_list(it[2], "(locations ...)");
  if (!locs.is_head("locations") || locs.items.size() < 2) fail(ErrorKind::Syntax, locs, "expected (locations NAME+)");
  for (size_t i = 1; i < locs.items.size(); ++i) {
    std::string n = expect_ident(locs.items[i], "a location name");
    if (p.find_location(n)) fail(ErrorKind::Validation, locs.items[i], "duplicate location '" + n + "'");
    p.locations.push_back(n);
  }

  const SExpr& init = it[3];
  if (!init.is_head("init") || init.items.size() != 2) fail(ErrorKind::Syntax, init, "expected (init NAME)");
  p.init = location_of(p, init.items[1]);
  const SExpr& err = it[4];
  if (!err.is_head("error") || err.items.size() != 2) fail(ErrorKind::Syntax, err, "expected (error NAME)");
  p.error = location_of(p, err.items[1]);

  std::set<ir::Edge> declared;
  for (size_t i = 5; i < it.size(); ++i) {
    const SExpr& e = it[i];
    if (!e.is_head("edge") || e.items.size() != 4) fail(ErrorKind::Syntax, e, "expected (edge FROM TO formula)");
    Location a = location_of(p, e.items[1]);
    Location b = location_of(p, e.items[2]);
    if (!declared.insert({a, b}).second) fail(ErrorKind::Validation, e, "duplicate edge");
    Formula f = parse_formula(e.items[3], p, true);
    if (!f.is_false() && b == p.init)
      fail(ErrorKind::Validation, e, "edges into the initial location must be false");
    if (!f.is_false() && a == p.error)
      fail(ErrorKind::Validation, e, "edges out of the error location must be false");
    p.set_tau(a, b, f);
  }
  try {
    p.validate();
  } catch (const ir::ValidationError& ex) {
    throw ParseError(ErrorKind::Validation, top.span, ex.what());
  }
  return p;
}

std::string print_term(const LinTerm& t) { return print_side(t.coeffs(), t.constant()); }

std::string print_formula(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Bool: return ir::to_string(f.boolvar_ref());
    case K::Not: return "(not " + print_formula(f.children()[0]) + ")";
    case K::And:
    case K::Or: {
      std::string s = f.kind() == K::And ? "(and" : "(or";
      for (const auto& c : f.children()) s += " " + print_formula(c);
      return s + ")";
    }
    case K::Atom: {
      const auto& a = f.lin();
      std::vector<std::pair<VarRef, Rat>> lhs, rhs;
      for (const auto& [v, c] : a.term.coeffs()) {
        if (c > 0)
          lhs.emplace_back(v, c);
        else
          rhs.emplace_back(v, -c);
      }
      Rat k = a.term.constant();
      std::string l = print_side(lhs, k > 0 ? k : Rat(0));
      std::string r = print_side(rhs, k < 0 ? Rat(-k) : Rat(0));
      const char* op = a.rel == Rel::Le ? "<=" : a.rel == Rel::Lt ? "<" : "=";
      return std::string("(") + op + " " + l + " " + r + ")";
    }
  }
  return "?";
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "(program\n  (vars";
  for (const auto& v : p.vars) os << " (" << v.sym.name() << (v.sort == Sort::Rat ? " rat)" : " bool)");
  os << ")\n  (locations";
  for (const auto& l : p.locations) os << " " << l;
  os << ")\n  (init " << p.name(p.init) << ")\n  (error " << p.name(p.error) << ")";
  for (const auto& [e, f] : p.edges)
    os << "\n  (edge " << p.name(e.first) << " " << p.name(e.second) << "\n    " << print_formula(f) << ")";
  os << ")\n";
  return os.str();
}

ir::Proof parse_proof(std::string_view text, const Program& p) {
  SExpr top = parse_sexpr(text);
  if (!top.is_head("proof")) fail(ErrorKind::Syntax, top, "expected (proof ...)");
  ir::Proof pf(p.num_locations());
  for (size_t i = 1; i < top.items.size(); ++i) {
    const SExpr& e = top.items[i];
    if (!e.is_head("location") || e.items.size() < 2) fail(ErrorKind::Syntax, e, "expected (location NAME formula*)");
    Location l = location_of(p, e.items[1]);
    for (size_t j = 2; j < e.items.size(); ++j) pf.add(l, parse_formula(e.items[j], p, false));
  }
  return pf;
}

std::string print_proof(const ir::Proof& pf, const Program& p) {
  std::ostringstream os;
  os << "(proof";
  for (uint32_t i = 0; i < p.num_locations(); ++i) {
    os << "\n  (location " << p.locations[i];
    for (const auto& f : pf.at(Location{i})) os << "\n    " << print_formula(f);
    os << ")";
  }
  os << ")\n";
  return os.str();
}

ir::Counterexample parse_cex(std::string_view text, const Program& p) {
  SExpr top = parse_sexpr(text);
  if (!top.is_head("cex") || top.items.size() < 2) fail(ErrorKind::Syntax, top, "expected (cex (path ...) (state ...)*)");
  ir::Counterexample c;
  const SExpr& path = top.items[1];
  if (!path.is_head("path") || path.items.size() < 2) fail(ErrorKind::Syntax, path, "expected (path NAME+)");
  for (size_t i = 1; i < path.items.size(); ++i) c.path.push_back(location_of(p, path.items[i]));
  for (size_t i = 2; i < top.items.size(); ++i) {
    const SExpr& s = top.items[i];
    if (!s.is_head("state")) fail(ErrorKind::Syntax, s, "expected (state RAT*)");
    if (s.items.size() - 1 != p.vars.size())
      fail(ErrorKind::Syntax, s, "state has " + std::to_string(s.items.size() - 1) + " values, expected " +
                                      std::to_string(p.vars.size()));
    ir::State st;
    for (size_t j = 1; j < s.items.size(); ++j) {
      const SExpr& v = s.items[j];
      auto r = v.is_list ? std::nullopt : parse_rat(v.atom);
      if (!r) fail(ErrorKind::Lexical, v, "expected a rational value");
      const auto& d = p.vars[j - 1];
      if (d.sort == Sort::Bool && *r != 0 && *r != 1)
        fail(ErrorKind::SortMismatch, v, "Boolean variable '" + d.sym.name() + "' needs 0 or 1");
      st[d.sym] = *r;
    }
    c.states.push_back(std::move(st));
  }
  return c;
}

std::string print_cex(const ir::Counterexample& cex, const Program& p) {
  std::ostringstream os;
  os << "(cex\n  (path";
  for (auto l : cex.path) os << " " << p.name(l);
  os << ")";
  for (const auto& s : cex.states) {
    os << "\n  (state";
    for (const auto& d : p.vars) {
      auto it = s.find(d.sym);
      os << " " << (it == s.end() ? std::string("0") : spacer::to_string(it->second));
    }
    os << ")";
  }
  os << ")\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ErrorKind::Io, Span{}, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spacer::textfmt
