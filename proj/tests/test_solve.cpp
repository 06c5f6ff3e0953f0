#include <gtest/gtest.h>

#include "spacer/textfmt/textfmt.hpp"
#include "support/engine_helpers.hpp"

namespace ir = spacer::ir;
namespace arith = spacer::arith;
namespace textfmt = spacer::textfmt;
namespace check = spacer::check;
using namespace spacer::solve;
using spacer::Rat;
using spacer::instrument::factor_assumptions;
using spacer::instrument::Granularity;
using spacer::instrument::UnderApprox;
using ir::Formula;
using ir::LinTerm;
using ir::Location;
using testsupport::cur;
using testsupport::Gen;
using testsupport::num;
using testsupport::nxt;

namespace {

ir::Program load(const char* f) { return textfmt::parse_program(textfmt::read_file(f)); }

arith::Polyhedron poly(std::vector<Formula> atoms) {
  arith::Polyhedron p;
  for (auto& f : atoms) p.add(f.lin());
  return p;
}

}  // namespace

TEST(PostImage, Increment) {
  auto out = post_image(poly({Formula::eq(cur("x"), num(0))}), Formula::eq(nxt("x"), cur("x") + num(1)));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(arith::equivalent(out[0].to_formula(), Formula::eq(cur("x"), num(1))));
}

TEST(PostImage, InconsistentGuard) {
  auto out = post_image(poly({Formula::le(cur("x"), num(0))}),
                        Formula::land(Formula::eq(nxt("x"), cur("x")), Formula::ge(cur("x"), num(5))));
  EXPECT_TRUE(out.empty());
}

TEST(PostImage, SampledBothDirections) {
  Gen g(71);
  auto cv = testsupport::vars_named({"x", "y"});
  for (int n = 0; n < 200; ++n) {
    arith::Polyhedron pre;
    for (int k = g.range(1, 3); k > 0; --k) pre.add(g.atom(cv).lin());
    if (!arith::feasible(pre)) continue;
    Formula edge = testsupport::random_tau(g, {"x", "y"}, 3);
    auto out = post_image(pre, edge);
    // every output model has a predecessor in pre
    for (const auto& q : out) {
      auto m = arith::poly_model(q);
      ASSERT_TRUE(m);
      std::vector<Formula> query{pre.to_formula(), edge};
      for (auto v : cv) query.push_back(Formula::eq(LinTerm::var({v.sym, true}), LinTerm(m->count(v) ? m->at(v) : Rat(0))));
      ASSERT_TRUE(arith::is_sat_result(arith::is_sat(query)));
    }
    // every successor of a sampled pre-state lands in some output polyhedron
    auto r = arith::is_sat({pre.to_formula(), edge});
    if (!arith::is_sat_result(r)) {
      ASSERT_TRUE(out.empty());
      continue;
    }
    auto next = std::get<arith::Sat>(r).model.next();
    for (auto v : cv) next.emplace(v.sym, Rat(0));
    bool covered = false;
    for (const auto& q : out) covered = covered || ir::eval(q.to_formula(), next);
    ASSERT_TRUE(covered);
  }
}

TEST(Solve, RunningExampleBoundZeroSafe) {
  auto bp = spacer::instrument::instrument(load("corpus/fig2.prog"));
  auto r = testsupport::solve_bounded(bp, 0);
  ASSERT_TRUE(std::holds_alternative<Safe>(r));
  const auto& pf = std::get<Safe>(r).proof;
  EXPECT_EQ(pf.at(bp.base.error), std::vector<Formula>{Formula::bottom()});
  EXPECT_TRUE(pf.at(bp.base.init).empty());
  auto rep = check::check_proof(testsupport::bounded_base(bp, 0), pf);
  EXPECT_TRUE(rep.ok) << rep.describe(bp.base);
}

TEST(Solve, RunningExampleSafeAtSeveralBounds) {
  auto bp = spacer::instrument::instrument(load("corpus/fig2.prog"));
  for (uint32_t k : {1u, 2u, 4u}) {
    auto r = testsupport::solve_bounded(bp, k);
    ASSERT_TRUE(std::holds_alternative<Safe>(r)) << k;
    auto rep = check::check_proof(testsupport::bounded_base(bp, k), std::get<Safe>(r).proof);
    EXPECT_TRUE(rep.ok) << rep.describe(bp.base);
  }
}

TEST(Solve, FirstAbstractionAdmitsFiveVisitPath) {
  auto p = load("corpus/fig2.prog");
  auto bp = spacer::instrument::instrument(p);
  auto ft = factor_assumptions(bp, Granularity::Conjunct);
  Location lp = *p.find_location("lp");
  auto kept = [&](const Formula& f) {
    auto vs = ir::vars_of(f);
    for (const char* v : {"y", "z", "w"})
      if (std::find(vs.begin(), vs.end(), ir::VarRef{ir::Symbol::intern(v), true}) != vs.end()) return false;
    return true;
  };
  auto u = UnderApprox::uniform(bp, ft.size(), false, 4);
  for (size_t i = 0; i < ft.size(); ++i) {
    const auto& gd = ft.guards[i];
    if (gd.edge == ir::Edge{p.init, lp}) u.sigma_hat[i] = true;
    else if (gd.edge == ir::Edge{lp, lp}) u.sigma_hat[i] = kept(gd.conjunct);
    else u.sigma_hat[i] = ir::vars_of(gd.conjunct) != std::vector<ir::VarRef>{{ir::Symbol::intern("y"), false}};
  }
  InvariantMap inv(p.num_locations());
  inv[lp.index] = {Formula::le(cur("z"), cur("x") * Rat(100)),
                   Formula::lor(Formula::le(cur("z"), cur("x") * Rat(100) - num(90)), Formula::le(cur("y"), cur("w") * Rat(10)))};
  auto pb = make_problem(ft, bp, u, inv);
  auto r = solve(pb);
  ASSERT_TRUE(std::holds_alternative<Unsafe>(r));
  const auto& cex = std::get<Unsafe>(r).cex;
  std::vector<Location> expect{p.init, lp, lp, lp, lp, lp, p.error};
  EXPECT_EQ(cex.path, expect);
  ir::Program eff = pb.program;
  for (auto& [e, f] : eff.edges) f = pb.effective(e);
  EXPECT_TRUE(check::check_cex(eff, cex).ok);
}

TEST(Solve, FalseErrorEdgeImmediatelySafe) {
  auto p = testsupport::make_program({"a", "e"}, {"x"});
  auto r = solve(make_problem(p));
  ASSERT_TRUE(std::holds_alternative<Safe>(r));
  EXPECT_EQ(std::get<Safe>(r).proof.at(p.error), std::vector<Formula>{Formula::bottom()});
}

TEST(Solve, PolyhedraLimitYieldsUnknown) {
  auto bp = spacer::instrument::instrument(load("corpus/fig2.prog"));
  auto ft = factor_assumptions(bp, Granularity::Conjunct);
  auto u = UnderApprox::uniform(bp, ft.size(), true, 6);
  Options opt;
  opt.max_polyhedra = 5;
  EXPECT_TRUE(std::holds_alternative<Unknown>(solve(make_problem(ft, bp, u), opt)));
}

TEST(Solve, AgreesWithPathEnumeration) {
  Gen g(81);
  int unsafe = 0, total = 0;
  for (int n = 0; n < 60; ++n) {
    auto p = testsupport::random_loop_program(g);
    auto bp = spacer::instrument::instrument(p);
    for (uint32_t k = 0; k <= 2; ++k) {
      auto r = testsupport::solve_bounded(bp, k);
      ASSERT_FALSE(std::holds_alternative<Unknown>(r));
      bool oracle = testsupport::bounded_unsafe(testsupport::bounded_base(bp, k), k + 1);
      ASSERT_EQ(std::holds_alternative<Unsafe>(r), oracle) << "k=" << k << "\n" << textfmt::print_program(p);
      auto q = testsupport::bounded_base(bp, k);
      if (auto* s = std::get_if<Safe>(&r)) {
        auto rep = check::check_proof(q, s->proof);
        ASSERT_TRUE(rep.ok) << rep.describe(q) << textfmt::print_program(p);
      } else {
        ASSERT_TRUE(check::check_cex(q, std::get<Unsafe>(r).cex).ok);
      }
      unsafe += oracle;
      ++total;
    }
  }
  EXPECT_GT(unsafe, 0);
  EXPECT_LT(unsafe, total);
}
