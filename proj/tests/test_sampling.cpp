#include <algorithm>
#include <map>

#include "doctest.h"
#include "invsyn/sampling.hpp"

using namespace invsyn;
using namespace invsyn::sampling;

namespace {

// chi-squared 99th percentile critical values by degrees of freedom
constexpr double kChi2Dof4 = 13.2767;
constexpr double kChi2Dof9 = 21.666;

double chi2_stat(const std::map<StateVector, long>& counts, size_t cells, long total) {
  double expect = static_cast<double>(total) / static_cast<double>(cells);
  double stat = 0.0;
  long seen = 0;
  for (const auto& [_, n] : counts) {
    double diff = static_cast<double>(n) - expect;
    stat += diff * diff / expect;
    seen += n;
  }
  // cells never drawn still contribute their full expectation
  stat += static_cast<double>(cells - counts.size()) * expect;
  REQUIRE(seen == total);
  return stat;
}

Cube axis_cube(int64_t xlo, int64_t xhi, int64_t ylo, int64_t yhi) {
  return Cube{{LinearPredicate{{1, 0}, xhi}, LinearPredicate{{-1, 0}, -xlo},
               LinearPredicate{{0, 1}, yhi}, LinearPredicate{{0, -1}, -ylo}}};
}

}  // namespace

TEST_CASE("phi binomial tail") {
  CHECK(phi(2, 4) == 11);
  CHECK(phi(3, 2) == 4);
  CHECK(phi(0, 5) == 1);
  CHECK(phi(5, 5) == 32);
}

TEST_CASE("epsilon_net_size golden values") {
  // oracle: exact-arithmetic scan over m with the same inequality, computed
  // independently with arbitrary-precision integers; values frozen here
  CHECK(epsilon_net_size({{1, 2}, {9, 10}, 5}) == 156);
  CHECK(epsilon_net_size({{1, 4}, {9, 10}, 5}) == 360);
  CHECK(epsilon_net_size({{1, 10}, {9, 10}, 5}) == 1060);
  // with eps = 1 and delta near 0 the ceil(8/eps) floor already suffices
  CHECK(epsilon_net_size({{1, 1}, {1, 1000000000}, 0}) == 8);
  // monotone in eps
  CHECK(epsilon_net_size({{1, 4}, {9, 10}, 5}) >= epsilon_net_size({{1, 2}, {9, 10}, 5}));
}

TEST_CASE("bounding_box worked examples") {
  StateSpace sp{2, 10};
  SUBCASE("axis aligned") {
    auto box = bounding_box(axis_cube(0, 2, 0, 2), sp);
    REQUIRE(box.has_value());
    CHECK(box->lo == StateVector{0, 0});
    CHECK(box->hi == StateVector{2, 2});
  }
  SUBCASE("diagonal line x + y = 0 spans the whole box per axis") {
    Cube line{{LinearPredicate{{1, 1}, 0}, LinearPredicate{{-1, -1}, 0}}};
    auto box = bounding_box(line, sp);
    REQUIRE(box.has_value());
    CHECK(box->lo == StateVector{-10, -10});
    CHECK(box->hi == StateVector{10, 10});
  }
  SUBCASE("empty cube") {
    Cube contra{{LinearPredicate{{1, 0}, 0}, LinearPredicate{{-1, 0}, -1}}};
    CHECK_FALSE(bounding_box(contra, sp).has_value());
  }
}

TEST_CASE("bounding_box contains every lattice point of random cubes") {
  Rng rng(404);
  StateSpace sp{2, 10};
  for (int trial = 0; trial < 50; ++trial) {
    Cube c;
    for (int i = 0; i < 3; ++i)
      c.predicates.push_back(LinearPredicate{
          {rng.uniform_int(-3, 3), rng.uniform_int(-3, 3)}, rng.uniform_int(-8, 12)});
    auto box = bounding_box(c, sp);
    for (int64_t x = sp.lo(); x <= sp.hi(); ++x)
      for (int64_t y = sp.lo(); y <= sp.hi(); ++y)
        if (eval_cube(c, {x, y})) {
          REQUIRE(box.has_value());
          REQUIRE(box->contains({x, y}));
        }
  }
}

TEST_CASE("is_affine_contained syntactic pair detection") {
  StateSpace sp{2, 10};
  Cube with_pair{{LinearPredicate{{1, 1}, 4}, LinearPredicate{{-1, -1}, -4},
                  LinearPredicate{{1, 0}, 4}, LinearPredicate{{-1, 0}, 0}}};
  auto sys = is_affine_contained(with_pair, sp);
  REQUIRE(sys.has_value());
  REQUIRE(sys->A.size() == 1);
  CHECK(sys->A[0] == std::vector<int64_t>{1, 1});
  CHECK(sys->B == std::vector<int64_t>{4});

  Cube no_pair{{LinearPredicate{{1, 0}, 4}, LinearPredicate{{-1, 0}, 0}}};
  CHECK_FALSE(is_affine_contained(no_pair, sp).has_value());

  // the rule is purely syntactic: a scaled mirror pair is not detected
  Cube scaled{{LinearPredicate{{2, 2}, 8}, LinearPredicate{{-2, -2}, -8}}};
  CHECK_FALSE(is_affine_contained(scaled, sp).has_value());
}

TEST_CASE("diophantine_sample on x + y = 4") {
  DiophantineSystem sys;
  sys.A = {{1, 1}};
  sys.B = {4};
  sys.box = Hyperrectangle{{0, 0}, {4, 4}};
  Rng rng(17);
  std::set<StateVector> support{{0, 4}, {1, 3}, {2, 2}, {3, 1}, {4, 0}};
  std::map<StateVector, long> counts;
  const long draws = 5000;
  for (long i = 0; i < draws; ++i) {
    StateVector s = diophantine_sample(sys, rng);
    REQUIRE(support.count(s) == 1);
    ++counts[s];
  }
  CHECK(chi2_stat(counts, 5, draws) < kChi2Dof4);
}

TEST_CASE("diophantine_sample parity failure") {
  DiophantineSystem sys;
  sys.A = {{2}};
  sys.B = {3};
  sys.box = Hyperrectangle{{-10}, {10}};
  Rng rng(1);
  CHECK_THROWS_AS(diophantine_sample(sys, rng), NoIntegerSolution);
}

TEST_CASE("diophantine_sample empty within box") {
  DiophantineSystem sys;
  sys.A = {{1, 1}};
  sys.B = {50};
  sys.box = Hyperrectangle{{0, 0}, {4, 4}};
  Rng rng(1);
  CHECK_THROWS_AS(diophantine_sample(sys, rng), EmptyRegion);
}

TEST_CASE("uniform_sample_polytope") {
  StateSpace sp{2, 10};
  Rng rng(23);
  SUBCASE("full box accepts immediately") {
    Cube full{{LinearPredicate{{0, 0}, 0}}};
    for (int i = 0; i < 100; ++i) CHECK(sp.contains(uniform_sample_polytope(full, sp, rng)));
  }
  SUBCASE("triangle uniformity") {
    // x >= 0, y >= 0, x + y <= 3: 10 lattice points
    Cube tri{{LinearPredicate{{-1, 0}, 0}, LinearPredicate{{0, -1}, 0}, LinearPredicate{{1, 1}, 3}}};
    std::map<StateVector, long> counts;
    const long draws = 10000;
    for (long i = 0; i < draws; ++i) {
      StateVector s = uniform_sample_polytope(tri, sp, rng);
      REQUIRE(eval_cube(tri, s));
      ++counts[s];
    }
    CHECK(counts.size() == 10);
    CHECK(chi2_stat(counts, 10, draws) < kChi2Dof9);
  }
  SUBCASE("contradictory cube raises the emptiness error") {
    Cube contra{{LinearPredicate{{1, 0}, 0}, LinearPredicate{{-1, 0}, -1}}};
    CHECK_THROWS_AS(uniform_sample_polytope(contra, sp, rng), EmptyRegion);
  }
  SUBCASE("affine cube routes through the diophantine sampler") {
    Cube line{{LinearPredicate{{1, 1}, 4}, LinearPredicate{{-1, -1}, -4},
               LinearPredicate{{-1, 0}, 0}, LinearPredicate{{0, -1}, 0}}};
    for (int i = 0; i < 200; ++i) {
      StateVector s = uniform_sample_polytope(line, sp, rng);
      REQUIRE(s[0] + s[1] == 4);
      REQUIRE(s[0] >= 0);
      REQUIRE(s[1] >= 0);
    }
  }
}

TEST_CASE("rejection acceptance rate matches the volume ratio") {
  // expected tries = |box| / |cube| on enumerable cubes; estimate the
  // acceptance rate empirically and compare within 20%
  StateSpace sp{2, 6}; // box is 14 x 14 = 196 points
  Rng rng(61);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 20; ++trial) {
    int64_t xl = rng.uniform_int(-6, 2), yl = rng.uniform_int(-6, 2);
    Cube c = axis_cube(xl, xl + rng.uniform_int(1, 4), yl, yl + rng.uniform_int(1, 4));
    long inside = 0;
    auto bb = bounding_box(c, sp);
    REQUIRE(bb.has_value());
    for (int64_t x = sp.lo(); x <= sp.hi(); ++x)
      for (int64_t y = sp.lo(); y <= sp.hi(); ++y)
        if (eval_cube(c, {x, y})) ++inside;
    // the sampler rejects against the bounding box, so the acceptance
    // probability is inside / |bb|
    double expect_accept = static_cast<double>(inside) / bb->cardinality();
    long tries = 0;
    const long draws = 2000;
    for (long i = 0; i < draws; ++i) {
      // count tries by drawing from the box directly
      while (true) {
        ++tries;
        StateVector s{rng.uniform_int(bb->lo[0], bb->hi[0]), rng.uniform_int(bb->lo[1], bb->hi[1])};
        if (eval_cube(c, s)) break;
      }
    }
    double measured = static_cast<double>(draws) / static_cast<double>(tries);
    CHECK(measured == doctest::Approx(expect_accept).epsilon(0.2));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("net_draws contract") {
  StateSpace sp{2, 20};
  Rng rng(5);
  DnfFormula one;
  one.cubes.push_back(axis_cube(-20, 20, -20, 20));
  NetParams p{{1, 2}, {9, 10}, 5};
  long m = epsilon_net_size(p);
  std::set<StateVector> net = net_draws(one, m, sp, rng);
  CHECK(net.size() <= static_cast<size_t>(m));
  CHECK(net.size() > static_cast<size_t>(m) / 2); // dedup loses few points on a large box

  CHECK(net_draws(DnfFormula{}, m, sp, rng).empty());

  // empty cubes are skipped with a warning
  DnfFormula with_empty;
  with_empty.cubes.push_back(Cube{{LinearPredicate{{1, 0}, 0}, LinearPredicate{{-1, 0}, -1}}});
  with_empty.cubes.push_back(axis_cube(0, 3, 0, 3));
  std::vector<std::string> warnings;
  std::set<StateVector> net2 = net_draws(with_empty, 50, sp, rng, &warnings);
  CHECK_FALSE(net2.empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("initial_dataset on the toy system") {
  StateSpace sp{2, 64};
  ChcSystem sys;
  sys.space = sp;
  sys.pre.cubes.push_back(Cube{{LinearPredicate{{1, 0}, 1}, LinearPredicate{{-1, 0}, -1},
                                LinearPredicate{{0, 1}, 1}, LinearPredicate{{0, -1}, -1}}});
  sys.guard = dnf_true(2);
  TransitionRelation::Block b;
  b.guard = dnf_true(2);
  b.maps.push_back(LinearMap{{{1, 1}, {1, 1}}, {0, 0}});
  sys.trans.blocks.push_back(b);
  sys.post.cubes.push_back(Cube{{LinearPredicate{{0, -1}, -1}}}); // y >= 1

  Rng rng(9);
  Dataset d = initial_dataset(sys, {1, 2}, {9, 10}, rng);
  // P is the single point (1,1)
  CHECK(d.plus == std::set<StateVector>{{1, 1}});
  // every implication pair is T-consistent
  for (const StatePair& pr : d.implications) {
    auto tails = apply_transition(sys.trans, sp, pr.first);
    REQUIRE(tails.count(pr.second) == 1);
  }
  CHECK_FALSE(d.minus.empty());
  for (const StateVector& s : d.minus) CHECK(s[1] <= 0);

  SUBCASE("Q = true gives an empty minus class") {
    ChcSystem sys2 = sys;
    sys2.post = dnf_true(2);
    Rng rng2(9);
    Dataset d2 = initial_dataset(sys2, {1, 2}, {9, 10}, rng2);
    CHECK(d2.minus.empty());
  }
}

TEST_CASE("refined_dataset halves epsilon and only appends") {
  StateSpace sp{2, 64};
  ChcSystem sys;
  sys.space = sp;
  sys.pre.cubes.push_back(axis_cube(0, 10, 0, 10));
  sys.guard = dnf_true(2);
  TransitionRelation::Block b;
  b.guard = dnf_true(2);
  b.maps.push_back(LinearMap{{{1, 0}, {0, 1}}, {1, 0}});
  sys.trans.blocks.push_back(b);
  sys.post.cubes.push_back(Cube{{LinearPredicate{{-1, 0}, 20}}});

  Rng rng(41);
  Dataset d = initial_dataset(sys, {1, 2}, {9, 10}, rng);
  auto [d2, eps2] = refined_dataset(sys, {1, 2}, {9, 10}, d, rng);
  CHECK(eps2 == Rat64{1, 4});
  CHECK(std::includes(d2.plus.begin(), d2.plus.end(), d.plus.begin(), d.plus.end()));
  CHECK(std::includes(d2.minus.begin(), d2.minus.end(), d.minus.begin(), d.minus.end()));
  CHECK(std::includes(d2.implications.begin(), d2.implications.end(), d.implications.begin(),
                      d.implications.end()));
  CHECK(d2.total() > d.total());
}

TEST_CASE("refine_criterion") {
  CHECK(sampling::refine_criterion(3, 3));
  CHECK_FALSE(sampling::refine_criterion(4, 3));
  for (long tr : {1L, 2L, 5L, 7L}) CHECK(sampling::refine_criterion(tr, tr));
}
