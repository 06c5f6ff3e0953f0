#include "spacer/arith/arith.hpp"
#include "spacer/ir/program.hpp"

namespace spacer::ir {

namespace {

Symbol step_copy(Symbol s, size_t i) { return Symbol::intern(s.name() + "@" + std::to_string(i)); }

}  // namespace

std::optional<std::vector<State>> check_path_feasible(const Program& p, const std::vector<Location>& path) {
  if (path.empty()) return std::nullopt;
  std::vector<Formula> steps;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    Formula t = p.tau(path[i], path[i + 1]);
    if (t.is_false()) return std::nullopt;
    steps.push_back(rename(t, [i](VarRef v) { return VarRef{step_copy(v.sym, v.primed ? i + 1 : i), false}; }));
  }
  auto r = arith::is_sat(steps);
  if (auto* u = std::get_if<arith::Unknown>(&r)) throw arith::ResourceLimit(u->reason);
  auto* sat = std::get_if<arith::Sat>(&r);
  if (!sat) return std::nullopt;
  std::vector<State> states;
  for (size_t i = 0; i < path.size(); ++i) {
    State s;
    for (const auto& d : p.vars) s[d.sym] = sat->model.value(VarRef{step_copy(d.sym, i), false});
    states.push_back(std::move(s));
  }
  return states;
}

}  // namespace spacer::ir
