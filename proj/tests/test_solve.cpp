#include "doctest.h"
#include "invsyn/solve.hpp"

using namespace invsyn;
using namespace invsyn::solve;

namespace {

smt::SmtSolver make_solver() {
  smt::SolverConfig cfg;
  cfg.path = LIASMT_PATH;
  return smt::SmtSolver(cfg);
}

ChcSystem toy_system() {
  ChcSystem sys;
  sys.space = StateSpace{2, 64};
  sys.pre.cubes.push_back(Cube{{LinearPredicate{{1, 0}, 1}, LinearPredicate{{-1, 0}, -1},
                                LinearPredicate{{0, 1}, 1}, LinearPredicate{{0, -1}, -1}}});
  sys.guard = dnf_true(2);
  TransitionRelation::Block b;
  b.guard = dnf_true(2);
  b.maps.push_back(LinearMap{{{1, 1}, {1, 1}}, {0, 0}});
  sys.trans.blocks.push_back(b);
  sys.post.cubes.push_back(Cube{{LinearPredicate{{0, -1}, -1}}}); // y >= 1
  return sys;
}

// counter with an unsafe assertion: x starts at 0, always increments, the
// postcondition x <= 50 eventually fails, so no invariant exists and every
// iteration ends in fresh counterexamples
ChcSystem unsafe_counter() {
  ChcSystem sys;
  sys.space = StateSpace{1, 64};
  sys.pre.cubes.push_back(Cube{{LinearPredicate{{1}, 0}, LinearPredicate{{-1}, 0}}});
  sys.guard = dnf_true(1);
  TransitionRelation::Block b;
  b.guard = dnf_true(1);
  b.maps.push_back(LinearMap{{{1}}, {1}});
  sys.trans.blocks.push_back(b);
  sys.post.cubes.push_back(Cube{{LinearPredicate{{1}, 50}}});
  return sys;
}

}  // namespace

TEST_CASE("toy system solves and the result passes the oracle") {
  ChcSystem sys = toy_system();
  SolveConfig cfg;
  cfg.d = 1;
  cfg.c = 2;
  for (uint64_t seed : {3u, 9u}) {
    cfg.seed = seed;
    smt::SmtSolver solver = make_solver();
    SolveOutcome out = invsyn::solve::solve(sys, cfg, solver);
    REQUIRE(out.status == Status::Invariant);
    REQUIRE(out.invariant.has_value());
    auto [ok, cex] = smt::brute_force_verify(*out.invariant, sys, cfg.verify);
    CHECK(ok);
  }
}

TEST_CASE("ds_t_max = 0 exhausts immediately") {
  ChcSystem sys = toy_system();
  SolveConfig cfg;
  cfg.ds_t_max = 0;
  smt::SmtSolver solver = make_solver();
  SolveOutcome out = invsyn::solve::solve(sys, cfg, solver);
  CHECK(out.status == Status::Exhausted);
  CHECK(out.trace.empty());
  CHECK(out.iterations == 0);
}

TEST_CASE("epsilon schedule and dataset monotonicity over forced iterations") {
  ChcSystem sys = unsafe_counter();
  SolveConfig cfg;
  cfg.d = 1;
  cfg.c = 1;
  cfg.t_refine = 2;
  cfg.ds_t_max = 5;
  cfg.seed = 4;
  smt::SmtSolver solver = make_solver();
  SolveOutcome out = invsyn::solve::solve(sys, cfg, solver);
  REQUIRE(out.trace.size() == 5); // never accepted, never SaFail in 5 rounds
  CHECK(out.status == Status::Exhausted);
  using sampling::Rat64;
  std::vector<Rat64> eps;
  for (const IterationRecord& r : out.trace) eps.push_back(r.eps);
  CHECK(eps == std::vector<Rat64>{{1, 2}, {1, 2}, {1, 4}, {1, 4}, {1, 8}});
  for (size_t i = 1; i < out.trace.size(); ++i) {
    CHECK(out.trace[i].plus >= out.trace[i - 1].plus);
    CHECK(out.trace[i].minus >= out.trace[i - 1].minus);
    CHECK(out.trace[i].implications >= out.trace[i - 1].implications);
  }
}

TEST_CASE("identical seeds replay identically") {
  ChcSystem sys = toy_system();
  SolveConfig cfg;
  cfg.d = 1;
  cfg.c = 2;
  cfg.seed = 21;
  smt::SmtSolver s1 = make_solver(), s2 = make_solver();
  SolveOutcome a = invsyn::solve::solve(sys, cfg, s1);
  SolveOutcome b = invsyn::solve::solve(sys, cfg, s2);
  CHECK(a.status == b.status);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.invariant.has_value());
  CHECK(*a.invariant == *b.invariant);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].eps == b.trace[i].eps);
    CHECK(a.trace[i].plus == b.trace[i].plus);
    CHECK(a.trace[i].minus == b.trace[i].minus);
    CHECK(a.trace[i].implications == b.trace[i].implications);
    CHECK(a.trace[i].sa_steps == b.trace[i].sa_steps);
  }
}

TEST_CASE("merge_cex uses set semantics") {
  Dataset d;
  d.plus.insert({1, 1});
  smt::CexDataset empty;
  Dataset same = merge_cex(d, empty);
  CHECK(same.plus == d.plus);

  smt::CexDataset cex;
  cex.plus_cex.insert({1, 1}); // duplicate
  cex.plus_cex.insert({2, 2});
  cex.minus_cex.insert({0, 0});
  Dataset merged = merge_cex(d, cex);
  CHECK(merged.plus.size() == 2);
  CHECK(merged.minus.size() == 1);
  CHECK(merged.plus.size() <= d.plus.size() + cex.plus_cex.size());
}

TEST_CASE("diagnostics") {
  ChcSystem sys = toy_system();
  SolveConfig cfg;
  SUBCASE("single iteration gives a one-row report") {
    SolveOutcome out;
    out.trace.push_back(IterationRecord{});
    std::string rep = diagnostics_report(out, sys, cfg);
    CHECK(std::count(rep.begin(), rep.end(), '\n') == 3); // header + row + ceiling line
    CHECK(rep.find("NON-BINDING") != std::string::npos);
  }
  SUBCASE("ceiling is monotone in t_refine") {
    SolveConfig a = cfg, b = cfg;
    a.t_refine = 2;
    b.t_refine = 6;
    CHECK(iteration_ceiling(sys, a) <= iteration_ceiling(sys, b));
  }
}
