#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <map>
#include <sstream>

#include "spacer/arith/arith.hpp"
#include "spacer/textfmt/sexpr.hpp"

namespace spacer::arith {

using ir::Formula;
using ir::VarRef;

namespace {

class Process {
 public:
  explicit Process(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw std::runtime_error("smtlib: pipe failed");
    signal(SIGPIPE, SIG_IGN);
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("smtlib: fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], 0);
      dup2(from_child[1], 1);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ~Process() {
    send("(exit)\n");
    close(in_);
    close(out_);
    int status;
    waitpid(pid_, &status, 0);
  }

  void send(const std::string& s) {
    size_t done = 0;
    while (done < s.size()) {
      ssize_t n = write(in_, s.data() + done, s.size() - done);
      if (n <= 0) throw std::runtime_error("smtlib: solver process closed its input");
      done += static_cast<size_t>(n);
    }
  }

  // Reads one complete s-expression or atom from the solver.
  std::string read_response() {
    std::string buf;
    int depth = 0;
    bool in_string = false, started = false;
    for (;;) {
      char c;
      ssize_t n = read(out_, &c, 1);
      if (n <= 0) throw std::runtime_error("smtlib: solver process terminated");
      if (!started) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        started = true;
      }
      buf.push_back(c);
      if (in_string) {
        if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '(') ++depth;
      else if (c == ')') {
        if (--depth == 0) return buf;
      } else if (depth == 0 && std::isspace(static_cast<unsigned char>(c))) {
        buf.pop_back();
        return buf;
      }
    }
  }

 private:
  pid_t pid_ = -1;
  int in_ = -1, out_ = -1;
};

std::string smt_rat(const Rat& r) {
  Rat a = abs(r);
  std::string s = a.get_den() == 1 ? a.get_num().get_str() + ".0"
                                   : "(/ " + a.get_num().get_str() + ".0 " + a.get_den().get_str() + ".0)";
  return r < 0 ? "(- " + s + ")" : s;
}

Rat parse_value(const textfmt::SExpr& e) {
  if (!e.is_list) {
    if (e.atom == "true") return 1;
    if (e.atom == "false") return 0;
    auto dot = e.atom.find('.');
    if (dot == std::string::npos) return Rat(mpz_class(e.atom));
    std::string digits = e.atom.substr(0, dot) + e.atom.substr(dot + 1);
    mpz_class den = 1;
    for (size_t i = dot + 1; i < e.atom.size(); ++i) den *= 10;
    Rat r(mpz_class(digits), den);
    r.canonicalize();
    return r;
  }
  if (e.is_head("-") && e.items.size() == 2) return -parse_value(e.items[1]);
  if (e.is_head("/") && e.items.size() == 3) return parse_value(e.items[1]) / parse_value(e.items[2]);
  throw std::runtime_error("smtlib: cannot read value " + textfmt::to_string(e));
}

class SmtLibSession final : public Session {
 public:
  explicit SmtLibSession(const std::string& command) : proc_(command) {
    proc_.send("(set-option :print-success false)\n(set-option :produce-models true)\n"
               "(set-option :produce-unsat-cores true)\n(set-logic QF_LRA)\n");
  }

  void add(const Formula& f) override { proc_.send("(assert " + print(f) + ")\n"); }

  SatResult check(const std::vector<Formula>& assumptions) override {
    std::vector<std::string> names;
    for (const auto& a : assumptions) names.push_back(proxy(a));
    std::string cmd = "(check-sat-assuming (";
    for (size_t i = 0; i < names.size(); ++i) cmd += (i ? " " : "") + names[i];
    proc_.send(cmd + "))\n");
    std::string ans = proc_.read_response();
    if (ans == "sat") {
      Model m;
      if (!vars_.empty()) {
        std::string q = "(get-value (";
        for (const auto& [v, n] : vars_) q += n + " ";
        proc_.send(q + "))\n");
        textfmt::SExpr r = textfmt::parse_sexpr(proc_.read_response());
        std::map<std::string, VarRef> back;
        for (const auto& [v, n] : vars_) back.emplace(n, v);
        for (const auto& item : r.items) {
          if (!item.is_list || item.items.size() != 2) continue;
          auto it = back.find(item.items[0].atom);
          if (it != back.end()) m.values[it->second] = parse_value(item.items[1]);
        }
      }
      return Sat{std::move(m)};
    }
    if (ans == "unsat") {
      proc_.send("(get-unsat-core)\n");
      textfmt::SExpr r = textfmt::parse_sexpr(proc_.read_response());
      Unsat u;
      for (const auto& item : r.items)
        for (size_t i = 0; i < names.size(); ++i)
          if (!item.is_list && item.atom == names[i]) u.core.push_back(assumptions[i]);
      return u;
    }
    if (ans == "unknown") return Unknown{"external solver returned unknown"};
    throw std::runtime_error("smtlib: unexpected response " + ans);
  }

 private:
  std::string name_of(VarRef v, bool is_bool) {
    auto it = vars_.find(v);
    if (it != vars_.end()) return it->second;
    std::string n = "v" + std::to_string(vars_.size());
    vars_.emplace(v, n);
    proc_.send("(declare-fun " + n + " () " + (is_bool ? "Bool" : "Real") + ")\n");
    return n;
  }

  std::string proxy(const Formula& a) {
    auto it = proxies_.find(a);
    if (it != proxies_.end()) return it->second;
    std::string body = print(a);
    std::string n = "a" + std::to_string(proxies_.size());
    proc_.send("(declare-fun " + n + " () Bool)\n(assert (= " + n + " " + body + "))\n");
    proxies_.emplace(a, n);
    return n;
  }

  std::string print(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::True: return "true";
      case K::False: return "false";
      case K::Bool: return name_of(f.boolvar_ref(), true);
      case K::Not: return "(not " + print(f.children()[0]) + ")";
      case K::And:
      case K::Or: {
        std::string s = f.kind() == K::And ? "(and" : "(or";
        for (const auto& c : f.children()) s += " " + print(c);
        return s + ")";
      }
      case K::Atom: {
        std::string s = "(+";
        for (const auto& [v, c] : f.lin().term.coeffs()) s += " (* " + smt_rat(c) + " " + name_of(v, false) + ")";
        s += " " + smt_rat(f.lin().term.constant()) + ")";
        const char* op = f.lin().rel == ir::Rel::Le ? "<=" : f.lin().rel == ir::Rel::Lt ? "<" : "=";
        return std::string("(") + op + " " + s + " 0.0)";
      }
    }
    return "true";
  }

  Process proc_;
  std::map<VarRef, std::string> vars_;
  std::unordered_map<Formula, std::string> proxies_;
};

class SmtLibBackend final : public Backend {
 public:
  explicit SmtLibBackend(std::string cmd) : cmd_(std::move(cmd)) {}
  std::unique_ptr<Session> open(const Limits&) const override { return std::make_unique<SmtLibSession>(cmd_); }
  std::string name() const override { return "smtlib:" + cmd_; }

 private:
  std::string cmd_;
};

}  // namespace

std::unique_ptr<Backend> smtlib_backend(std::string command) {
  return std::make_unique<SmtLibBackend>(std::move(command));
}

}  // namespace spacer::arith
