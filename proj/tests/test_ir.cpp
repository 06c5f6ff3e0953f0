#include <gtest/gtest.h>

#include "spacer/ir/program.hpp"
#include "spacer/textfmt/textfmt.hpp"
#include "support/programs.hpp"

using namespace spacer;
using ir::Formula;
using ir::Location;
using ir::Symbol;
using ir::Valuation;
using testsupport::cur;
using testsupport::Gen;
using testsupport::num;
using testsupport::nxt;

namespace {

ir::Program fig2() { return textfmt::parse_program(textfmt::read_file("corpus/fig2.prog")); }

Valuation state(const ir::Program& p, std::vector<long> vals) {
  Valuation s;
  for (size_t i = 0; i < vals.size(); ++i) s[p.vars[i].sym] = Rat(vals[i]);
  return s;
}

std::vector<Location> path_of(const ir::Program& p, std::vector<std::string> names) {
  std::vector<Location> out;
  for (auto& n : names) out.push_back(*p.find_location(n));
  return out;
}

}  // namespace

TEST(Eval, LoopStepFromRunningExample) {
  auto p = fig2();
  auto lp = *p.find_location("lp");
  auto s = state(p, {0, 0, 0, 0, 2, 2}), t = state(p, {1, 100, 1, 10, 1, 2});
  EXPECT_TRUE(ir::eval(p.tau(lp, lp), s, &t));
  auto u = state(p, {2, 200, 2, 20, 0, 2});
  EXPECT_TRUE(ir::eval(p.tau(lp, lp), t, &u));
  auto bad = state(p, {2, 200, 2, 20, 0, 2});
  EXPECT_FALSE(ir::eval(p.tau(lp, lp), s, &bad));
}

TEST(Eval, TrueHoldsEverywhere) {
  Valuation s;
  EXPECT_TRUE(ir::eval(Formula::top(), s, &s));
}

TEST(Eval, InitializationChecksNextStateOnly) {
  auto p = fig2();
  auto s = state(p, {0, 0, 0, 0, 0, 0}), t = state(p, {0, 0, 0, 0, 4, 4});
  EXPECT_TRUE(ir::eval(p.tau(p.init, *p.find_location("lp")), s, &t));
}

TEST(Eval, MissingVariableIsAnError) {
  Valuation s;
  EXPECT_THROW(ir::eval(Formula::le(cur("x"), num(0)), s), std::out_of_range);
}

TEST(Eval, CompositionalOnRandomFormulas) {
  Gen g(7);
  auto vs = testsupport::vars_named({"x", "y", "z"});
  for (int i = 0; i < 300; ++i) {
    Formula a = g.formula(vs, 3), b = g.formula(vs, 3);
    Valuation s;
    for (auto v : vs) s[v.sym] = Rat(g.range(-4, 4), g.range(1, 2));
    bool ea = ir::eval(a, s), eb = ir::eval(b, s);
    EXPECT_EQ(ir::eval(Formula::land(a, b), s), ea && eb);
    EXPECT_EQ(ir::eval(Formula::lor(a, b), s), ea || eb);
    EXPECT_EQ(ir::eval(Formula::lnot(a), s), !ea);
  }
}

TEST(Priming, RoundTripAndMixedRejected) {
  Formula f = Formula::le(cur("x"), num(0));
  EXPECT_EQ(ir::prime(f), Formula::le(nxt("x"), num(0)));
  EXPECT_EQ(ir::unprime(ir::prime(f)), f);
  Formula mixed = Formula::eq(nxt("x"), cur("x") + num(1));
  EXPECT_THROW(ir::unprime(mixed), std::invalid_argument);
  EXPECT_THROW(ir::prime(mixed), std::invalid_argument);
}

TEST(PathFeasible, RunningExampleThreeSteps) {
  auto p = fig2();
  auto path = path_of(p, {"en", "lp", "lp", "lp"});
  auto st = ir::check_path_feasible(p, path);
  ASSERT_TRUE(st);
  for (size_t i = 0; i + 1 < path.size(); ++i) EXPECT_TRUE(ir::eval(p.tau(path[i], path[i + 1]), (*st)[i], &(*st)[i + 1]));
}

TEST(PathFeasible, SingleLocation) {
  auto p = fig2();
  auto st = ir::check_path_feasible(p, {p.init});
  ASSERT_TRUE(st);
  EXPECT_EQ(st->size(), 1u);
}

TEST(PathFeasible, LoopFreeErrorPathInfeasible) {
  auto p = fig2();
  auto path = path_of(p, {"en", "lp", "er"});
  EXPECT_FALSE(ir::check_path_feasible(p, path));
  EXPECT_FALSE(testsupport::path_feasible_oracle(p, path));
}

TEST(PathFeasible, AgreesWithDnfOracleOnRandomPrograms) {
  Gen g(11);
  int feasible = 0;
  for (int n = 0; n < 1000; ++n) {
    auto p = testsupport::random_small_program(g);
    std::vector<Location> path{p.init};
    int len = g.range(0, 3);
    for (int i = 0; i < len; ++i) {
      auto succ = p.successors(path.back());
      if (succ.empty()) break;
      path.push_back(g.pick(succ));
    }
    auto st = ir::check_path_feasible(p, path);
    bool oracle = testsupport::path_feasible_oracle(p, path);
    ASSERT_EQ(st.has_value(), oracle) << textfmt::print_program(p);
    if (st) {
      ++feasible;
      for (size_t i = 0; i + 1 < path.size(); ++i)
        ASSERT_TRUE(ir::eval(p.tau(path[i], path[i + 1]), (*st)[i], &(*st)[i + 1]));
    }
  }
  EXPECT_GT(feasible, 100);
}

TEST(Program, ValidateRejectsEdgeIntoInit) {
  auto p = testsupport::make_program({"a", "b"}, {"x"});
  p.set_tau(Location{1}, Location{0}, Formula::top());
  EXPECT_THROW(p.validate(), ir::ValidationError);
}

TEST(Program, FalseEdgesAreAbsent) {
  auto p = testsupport::make_program({"a", "b"}, {"x"});
  p.set_tau(Location{0}, Location{1}, Formula::bottom());
  EXPECT_TRUE(p.edges.empty());
  EXPECT_TRUE(p.tau(Location{0}, Location{1}).is_false());
}

TEST(Proof, AddDeduplicates) {
  ir::Proof pf(2);
  Formula f = Formula::le(cur("x"), num(1));
  EXPECT_TRUE(pf.add(Location{0}, f));
  EXPECT_FALSE(pf.add(Location{0}, f));
  EXPECT_EQ(pf.size(), 1u);
}
