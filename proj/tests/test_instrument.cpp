#include <gtest/gtest.h>

#include "spacer/instrument/instrument.hpp"
#include "spacer/textfmt/textfmt.hpp"
#include "support/programs.hpp"

namespace ir = spacer::ir;
namespace arith = spacer::arith;
namespace textfmt = spacer::textfmt;
using spacer::Rat;
using namespace spacer::instrument;
using ir::Formula;
using ir::Location;
using ir::Symbol;
using testsupport::cur;
using testsupport::Gen;
using testsupport::num;
using testsupport::nxt;

namespace {

ir::Program load(const char* f) { return textfmt::parse_program(textfmt::read_file(f)); }

Location at(const ir::Program& p, const char* n) { return *p.find_location(n); }

// Every back-edge targets a head enclosing its source.
bool wto_condition(const ir::Program& p, const Wto& w) {
  for (const auto& [e, f] : p.edges) {
    if (w.before(e.first, e.second)) continue;
    const auto& h = w.hds[e.first.index];
    if (std::find(h.begin(), h.end(), e.second) == h.end()) return false;
  }
  return true;
}

ir::Program with_bound(const BoundedProgram& bp, uint32_t k) {
  auto u = UnderApprox::uniform(bp, 0, true, k);
  ir::Program q = bp.base;
  for (auto& [e, f] : q.edges) f = Formula::land(f, u.bound_formula());
  return q;
}

std::vector<bool> random_subset(Gen& g, size_t n) {
  std::vector<bool> s(n);
  for (size_t i = 0; i < n; ++i) s[i] = g.coin();
  return s;
}

}  // namespace

TEST(Wto, RunningExample) {
  auto p = load("corpus/fig2.prog");
  auto w = compute_wto(p);
  EXPECT_EQ(w.render(p), "en (lp) er");
  EXPECT_EQ(w.heads, std::vector<Location>{at(p, "lp")});
  EXPECT_EQ(w.hds[at(p, "lp").index], std::vector<Location>{at(p, "lp")});
  EXPECT_TRUE(w.hds[p.init.index].empty());
}

TEST(Wto, NestedLoops) {
  auto p = load("corpus/nested.prog");
  auto w = compute_wto(p);
  EXPECT_EQ(w.render(p), "l0 (l1 (l2) l3) le");
  EXPECT_EQ(w.heads, (std::vector<Location>{at(p, "l1"), at(p, "l2")}));
  EXPECT_EQ(w.hds[at(p, "l3").index], std::vector<Location>{at(p, "l1")});
  EXPECT_EQ(w.hds[at(p, "l2").index], (std::vector<Location>{at(p, "l1"), at(p, "l2")}));
}

TEST(Wto, LoopFreeChain) {
  auto p = testsupport::make_program({"a", "b", "c", "d"}, {"x"});
  p.set_tau(Location{0}, Location{2}, Formula::top());
  p.set_tau(Location{2}, Location{1}, Formula::top());
  p.set_tau(Location{1}, Location{3}, Formula::top());
  auto w = compute_wto(p);
  EXPECT_TRUE(w.heads.empty());
  EXPECT_EQ(w.render(p), "a c b d");
}

TEST(Wto, BackEdgesTargetEnclosingHeads) {
  Gen g(21);
  for (int i = 0; i < 500; ++i) {
    auto p = i % 2 ? testsupport::random_small_program(g) : testsupport::random_loop_program(g);
    auto w = compute_wto(p);
    ASSERT_TRUE(wto_condition(p, w)) << textfmt::print_program(p) << w.render(p);
    EXPECT_EQ(w.order.front(), p.init);
    EXPECT_EQ(w.order.back(), p.error);
    for (Location h : w.heads) EXPECT_EQ(w.hds[h.index].back(), h);
  }
}

TEST(Instrument, RunningExampleCounters) {
  auto p = load("corpus/fig2.prog");
  auto bp = instrument(p);
  Location lp = at(p, "lp");
  ASSERT_EQ(bp.counters.size(), 1u);
  ASSERT_EQ(bp.bounds.size(), 1u);
  std::string c = bp.counters[0].name(), b = bp.bounds[0].name();
  EXPECT_EQ(c, "c_lp");
  EXPECT_EQ(b, "b_lp");
  Formula expect = Formula::land({Formula::le(num(0), nxt(c)), Formula::eq(nxt(c), cur(c) - num(1)), Formula::le(cur(c), cur(b))});
  EXPECT_TRUE(arith::equivalent(bp.tau_b_at(lp, lp), expect));
  EXPECT_TRUE(arith::equivalent(bp.tau_b_at(lp, p.error), Formula::eq(cur(c), num(0))));
  EXPECT_TRUE(bp.tau_b_at(p.init, lp).is_true());
  EXPECT_EQ(bp.base.vars.size(), 8u);
  for (const auto& [e, f] : p.edges) EXPECT_EQ(bp.base.tau(e.first, e.second), Formula::land(f, bp.tau_b_at(e.first, e.second)));
  EXPECT_NO_THROW(bp.base.validate());
}

TEST(Instrument, NestedPassOnAndExit) {
  auto p = load("corpus/nested.prog");
  auto bp = instrument(p);
  std::string c1 = bp.ctr.at(at(p, "l1")).name(), c2 = bp.ctr.at(at(p, "l2")).name();
  // inner self-loop keeps the outer counter
  EXPECT_TRUE(arith::entails({bp.tau_b_at(at(p, "l2"), at(p, "l2"))}, Formula::eq(nxt(c1), cur(c1))));
  // leaving the inner loop requires its counter to be exhausted
  EXPECT_TRUE(arith::entails({bp.tau_b_at(at(p, "l2"), at(p, "l3"))}, Formula::eq(cur(c2), num(0))));
  // entering the inner loop leaves its counter free
  EXPECT_FALSE(arith::entails({bp.tau_b_at(at(p, "l1"), at(p, "l2"))}, Formula::le(nxt(c2), num(5))));
  EXPECT_TRUE(arith::entails({bp.tau_b_at(at(p, "l1"), p.error)}, Formula::eq(cur(c1), num(0))));
}

TEST(Instrument, LoopFreeUnchanged) {
  auto p = testsupport::make_program({"a", "b", "c"}, {"x"});
  p.set_tau(Location{0}, Location{1}, Formula::eq(nxt("x"), num(1)));
  p.set_tau(Location{1}, Location{2}, Formula::le(cur("x"), num(0)));
  auto bp = instrument(p);
  EXPECT_TRUE(bp.tau_b.empty());
  EXPECT_TRUE(bp.counters.empty());
  EXPECT_EQ(bp.base.edges, p.edges);
}

TEST(Instrument, CounterNamesAvoidCollisions) {
  auto p = textfmt::parse_program(
      "(program (vars (c_lp rat) (b_lp rat)) (locations en lp er) (init en) (error er)"
      " (edge en lp true) (edge lp lp true) (edge lp er true))");
  auto bp = instrument(p);
  EXPECT_NE(bp.counters[0].name(), "c_lp");
  EXPECT_NE(bp.bounds[0].name(), "b_lp");
}

// Bounded reachability of the origin (k back-edges per loop visit) equals reachability of the
// instrumented program under b ≤ k, both by explicit path enumeration.
TEST(Instrument, BoundedEquivalenceByPathEnumeration) {
  Gen g(33);
  int unsafe = 0, total = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = testsupport::random_loop_program(g, 1 + i % 2);
    auto bp = instrument(p);
    for (uint32_t k = 0; k <= 3; ++k) {
      bool origin = testsupport::bounded_unsafe(p, k);
      bool inst = testsupport::bounded_unsafe(with_bound(bp, k), k + 1);
      ASSERT_EQ(origin, inst) << "k=" << k << "\n" << textfmt::print_program(p);
      unsafe += origin;
      ++total;
    }
  }
  EXPECT_GT(unsafe, 0);
  EXPECT_LT(unsafe, total);
}

TEST(Factor, RunningExampleGuards) {
  auto p = load("corpus/fig2.prog");
  auto bp = instrument(p);
  auto ft = factor_assumptions(bp, Granularity::Conjunct);
  Location lp = at(p, "lp");
  const auto& ds = ft.edges.at({lp, lp});
  ASSERT_EQ(ds.size(), 3u);
  Formula x_inc = Formula::eq(nxt("x"), cur("x") + num(1));
  Formula y_jump = Formula::eq(nxt("y"), cur("y") + num(100));
  std::vector<bool> sel(ft.size(), true);
  int found = 0;
  for (size_t i : ds[0].guarded) {
    if (ft.guards[i].conjunct == x_inc || ft.guards[i].conjunct == y_jump) ++found;
    if (ft.guards[i].conjunct == y_jump) sel[i] = false;
  }
  EXPECT_EQ(found, 2);
  // dropping the y guard leaves (x'=x+1) alone in the first disjunct
  Formula weaker = ft.tau_hat({lp, lp}, sel);
  ir::Valuation s{{Symbol::intern("x"), 0}, {Symbol::intern("y"), 0}, {Symbol::intern("w"), 0},
                  {Symbol::intern("z"), 0}, {Symbol::intern("c"), 1}, {Symbol::intern("b"), 1}};
  ir::Valuation t = s;
  t[Symbol::intern("x")] = 1;
  t[Symbol::intern("y")] = 7;
  t[Symbol::intern("w")] = 1;
  t[Symbol::intern("z")] = 10;
  t[Symbol::intern("c")] = 0;
  EXPECT_TRUE(ir::eval(weaker, s, &t));
  EXPECT_FALSE(ir::eval(p.tau(lp, lp), s, &t));
}

TEST(Factor, SigmaCountsOnCorpus) {
  auto gc = factor_assumptions(instrument(load("corpus/gcnr.prog")), Granularity::Conjunct);
  EXPECT_EQ(gc.size(), 42u);
  auto f2 = factor_assumptions(instrument(load("corpus/fig2.prog")), Granularity::Conjunct);
  EXPECT_EQ(f2.size(), 4u + 3u * 5u + 2u + 3u + 4u + 3u);
}

TEST(Factor, RecoveryEmptyAndMonotone) {
  Gen g(44);
  for (int i = 0; i < 80; ++i) {
    auto p = testsupport::random_loop_program(g);
    auto bp = instrument(p);
    auto gran = i % 2 ? Granularity::StateVar : Granularity::Conjunct;
    auto ft = factor_assumptions(bp, gran);
    std::vector<bool> all(ft.size(), true), none(ft.size(), false);
    auto s1 = random_subset(g, ft.size());
    auto s2 = s1;
    for (size_t k = 0; k < s2.size(); ++k) s2[k] = s2[k] || g.coin();
    for (const auto& [e, f] : p.edges) {
      ASSERT_TRUE(arith::equivalent(ft.tau_hat(e, all), f));
      std::vector<Formula> sigmas;
      for (size_t k = 0; k < ft.size(); ++k) sigmas.push_back(ft.sigma_literal(k));
      ASSERT_TRUE(arith::equivalent(Formula::land(ft.tau_sigma(e), Formula::land(sigmas)), Formula::land(f, Formula::land(sigmas))));
      if (gran == Granularity::Conjunct && !ft.edges.at(e).empty()) {
        ASSERT_TRUE(arith::is_unsat_result(arith::is_sat({Formula::lnot(ft.tau_hat(e, none))})));
      }
      ASSERT_TRUE(arith::entails({ft.tau_hat(e, s2)}, ft.tau_hat(e, s1)));
    }
  }
}

TEST(Factor, StateVarGuardsOnlyNextStateConjuncts) {
  auto bp = instrument(load("corpus/fig2.prog"));
  auto ft = factor_assumptions(bp, Granularity::StateVar);
  for (const auto& gd : ft.guards) EXPECT_TRUE(ir::has_primed(gd.conjunct));
  bool plain_guard = false;
  for (const auto& [e, ds] : ft.edges)
    for (const auto& d : ds)
      for (const auto& f : d.plain) plain_guard = plain_guard || !ir::has_primed(f);
  EXPECT_TRUE(plain_guard);
}

TEST(ProjectCex, IdentityWithoutCounters) {
  auto p = testsupport::make_program({"a", "b"}, {"x"});
  p.set_tau(Location{0}, Location{1}, Formula::eq(nxt("x"), num(3)));
  auto bp = instrument(p);
  ir::Counterexample c{{Location{0}, Location{1}}, {{{Symbol::intern("x"), 0}}, {{Symbol::intern("x"), 3}}}};
  auto r = project_cex(bp, c);
  EXPECT_EQ(r.path, c.path);
  EXPECT_EQ(r.states, c.states);
}

TEST(ProjectCex, InstrumentedUnsafeMutantProjects) {
  auto p = load("corpus/fig2-unsafe.prog");
  auto bp = instrument(p);
  std::vector<Location> path{p.init, at(p, "lp"), at(p, "lp"), p.error};
  auto st = ir::check_path_feasible(bp.base, path);
  ASSERT_TRUE(st);
  auto r = project_cex(bp, {path, *st});
  EXPECT_EQ(r.path, path);
  EXPECT_EQ(r.states[0].size(), p.vars.size());
}

TEST(ProjectCex, NonReplayingThrows) {
  auto p = load("corpus/fig2-unsafe.prog");
  auto bp = instrument(p);
  std::vector<Location> path{p.init, at(p, "lp"), p.error};
  std::vector<ir::State> st(3);
  EXPECT_THROW(project_cex(bp, {path, st}), std::logic_error);
}

TEST(Generalize, ClosureExamples) {
  Symbol c = Symbol::intern("c_lp"), b = Symbol::intern("b_lp");
  Formula free = Formula::le(cur("x"), num(3));
  EXPECT_EQ(universal_closure(free, {c, b}), free);
  Formula cb = Formula::le(cur("c_lp"), cur("b_lp"));
  EXPECT_FALSE(testsupport::dnf_sat(universal_closure(cb, {c, b})));
  Formula xc = Formula::le(cur("x"), cur("c_lp"));
  EXPECT_TRUE(arith::equivalent(universal_closure(xc, {c, b}), Formula::le(cur("x"), num(0))));
  Formula disj = Formula::lor(Formula::lt(cur("c_lp"), num(1)), Formula::le(cur("x"), num(5)));
  EXPECT_TRUE(arith::equivalent(universal_closure(disj, {c, b}), Formula::le(cur("x"), num(5))));
}

TEST(Generalize, ClosureAgreesWithSampling) {
  Gen g(55);
  Symbol c = Symbol::intern("c_lp");
  auto vs = testsupport::vars_named({"x", "c_lp"});
  for (int i = 0; i < 150; ++i) {
    Formula f = g.formula(vs, 3);
    Formula h = universal_closure(f, {c});
    ASSERT_FALSE(ir::has_primed(h));
    for (const auto& v : ir::vars_of(h)) ASSERT_NE(v.sym, c);
    for (int xv = -4; xv <= 4; ++xv) {
      ir::Valuation s{{Symbol::intern("x"), Rat(xv, 2)}};
      if (ir::eval(h, s)) {
        for (int cv = 0; cv <= 12; ++cv) {
          s[c] = Rat(cv, 2);
          ASSERT_TRUE(ir::eval(f, s)) << ir::debug_string(f) << " / " << ir::debug_string(h);
        }
      }
    }
  }
}

TEST(Generalize, DropsFalseClosuresKeepsRest) {
  auto p = load("corpus/fig2.prog");
  auto bp = instrument(p);
  Location lp = at(p, "lp");
  ir::Proof pf(p.num_locations());
  pf.add(lp, Formula::le(cur("z"), cur("x") * Rat(100)));
  pf.add(lp, Formula::le(cur("c_lp"), cur("b_lp")));
  pf.add(p.error, Formula::bottom());
  auto out = generalize_proof(bp, pf);
  EXPECT_EQ(out.at(lp), std::vector<Formula>{Formula::le(cur("z"), cur("x") * Rat(100))});
  EXPECT_EQ(out.at(p.error), std::vector<Formula>{Formula::bottom()});
}

TEST(Adapt, TopUnchangedAndIdempotent) {
  auto p = load("corpus/fig2.prog");
  std::map<ir::Edge, Formula> top;
  for (const auto& [e, f] : p.edges) top[e] = Formula::top();
  EXPECT_EQ(adapt(p, top).edges, p.edges);
  std::map<ir::Edge, Formula> extra;
  for (const auto& [e, f] : p.edges) extra[e] = Formula::le(cur("x"), num(10));
  auto once = adapt(p, extra), twice = adapt(once, extra);
  for (const auto& [e, f] : once.edges) EXPECT_TRUE(arith::equivalent(f, twice.tau(e.first, e.second)));
}
