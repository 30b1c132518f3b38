#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "invsyn/sa.hpp"

using namespace invsyn;
using namespace invsyn::sa;

namespace {

CandidateInvariant single(int64_t w, int64_t b) {
  CandidateInvariant inv;
  inv.cubes.push_back(Cube{{LinearPredicate{{w}, b}}});
  return inv;
}

// true lattice set distance oracle: min L2 distance from s to a satisfying
// point, scanned over a box wide enough to contain the nearest one
double lattice_distance(const DnfFormula& f, const StateVector& s, int64_t radius) {
  double best = std::numeric_limits<double>::infinity();
  StateVector probe(s.size());
  if (s.size() == 2) {
    for (int64_t x = s[0] - radius; x <= s[0] + radius; ++x)
      for (int64_t y = s[1] - radius; y <= s[1] + radius; ++y) {
        probe[0] = x; probe[1] = y;
        if (eval_dnf(f, probe)) {
          double dx = static_cast<double>(x - s[0]), dy = static_cast<double>(y - s[1]);
          best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
      }
  }
  return best;
}

}  // namespace

TEST_CASE("search space parameters") {
  StateSpace sp{2, 64};
  SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 2, 3);
  CHECK(p.k_prime == 3 * 2 * 65);
  // k_prime = floor(k * sqrt(n) * rho) with rho = sqrt(n) * (bound + 1)
  CHECK(p.k_prime == static_cast<int64_t>(std::floor(3.0 * std::sqrt(2.0) * sp.radius())));
}

TEST_CASE("valid_candidate enforces the shape and norm bounds") {
  StateSpace sp{1, 10};
  SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 1, 2);
  CHECK(valid_candidate(single(2, 5), p));
  CHECK_FALSE(valid_candidate(single(3, 5), p));            // coeff beyond k
  CHECK_FALSE(valid_candidate(single(0, 5), p));            // zero coefficient vector
  CHECK_FALSE(valid_candidate(single(1, p.k_prime + 1), p)); // constant beyond k_prime
  CandidateInvariant two = single(1, 0);
  two.cubes.push_back(Cube{{LinearPredicate{{1}, 1}}});
  CHECK_FALSE(valid_candidate(two, p)); // d mismatch
}

TEST_CASE("delta_approx worked examples") {
  // 3x - 4y <= -13 at the origin: violation 13, norm 5
  DnfFormula pred;
  pred.cubes.push_back(Cube{{LinearPredicate{{3, -4}, -13}}});
  CHECK(delta_approx(pred, {0, 0}) == doctest::Approx(2.6));

  // two-cube min: (x <= 0) or (-x <= -10) at x = 4
  DnfFormula twocube;
  twocube.cubes.push_back(Cube{{LinearPredicate{{1}, 0}}});
  twocube.cubes.push_back(Cube{{LinearPredicate{{-1}, -10}}});
  CHECK(delta_approx(twocube, {4}) == doctest::Approx(4.0));

  // satisfied formula has distance zero
  CHECK(delta_approx(twocube, {-2}) == 0.0);

  // empty DNF is infinitely far from everything
  CHECK(std::isinf(delta_approx(DnfFormula{}, {0})));
}

TEST_CASE("per-face averaging matches the six-face example") {
  // a cube whose per-face normalized violations at the probe point are
  // 0, 0, 0, 2, 8, 2.12 averages to 2.02 and under-approximates the true
  // set distance 2.23
  double faces[6] = {0, 0, 0, 2, 8, 2.12};
  double mean = 0;
  for (double f : faces) mean += f;
  mean /= 6.0;
  CHECK(mean == doctest::Approx(2.02).epsilon(1e-9));
  CHECK(mean < 2.23);
}

TEST_CASE("delta_approx under-approximates the true set distance") {
  Rng rng(808);
  int live = 0;
  for (int trial = 0; trial < 150; ++trial) {
    DnfFormula f;
    int d = static_cast<int>(rng.uniform_int(1, 2));
    for (int i = 0; i < d; ++i) {
      Cube c;
      int preds = static_cast<int>(rng.uniform_int(1, 3));
      for (int j = 0; j < preds; ++j) {
        LinearPredicate p{{rng.uniform_int(-2, 2), rng.uniform_int(-2, 2)},
                          rng.uniform_int(-6, 6)};
        if (p.coeffs[0] == 0 && p.coeffs[1] == 0) p.coeffs[0] = 1;
        c.predicates.push_back(p);
      }
      f.cubes.push_back(c);
    }
    StateVector s{rng.uniform_int(-5, 5), rng.uniform_int(-5, 5)};
    double truth = lattice_distance(f, s, 40);
    if (std::isinf(truth)) continue; // no satisfying point nearby
    ++live;
    double approx = delta_approx(f, s);
    REQUIRE(approx <= truth + 1e-9);
    REQUIRE((approx == 0.0) == eval_dnf(f, s));
  }
  CHECK(live > 60);
}

TEST_CASE("normalizer properties") {
  CHECK(normalizer(0.0, 50, 2) == 0.0);
  CHECK(normalizer(10.0, 50, 2) == doctest::Approx(5.0));
  CHECK(normalizer(1e6, 50, 2) == doctest::Approx(26.0).epsilon(1e-6));
  // monotone; the curve saturates in double precision for very large inputs,
  // so only require strict growth on the working range
  double prev = -1.0;
  for (double x = 0; x < 200; x += 0.5) {
    double v = normalizer(x, 50, 2);
    if (x <= 60.0)
      CHECK(v > prev);
    else
      CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("cost worked examples") {
  // invariant satisfying the whole dataset costs exactly zero
  Dataset data;
  data.plus.insert({1});
  data.minus.insert({10});
  data.implications.insert({{1}, {2}});
  CandidateInvariant inv = single(1, 5); // x <= 5
  CHECK(cost(inv, data, 50, 2, 1) == 0.0);
  CHECK(satisfies_dataset(inv, data));

  // one violated plus point p with delta v in the linear branch: v / (3 beta)
  Dataset lone;
  lone.plus.insert({4});
  CandidateInvariant zero = single(1, 0); // x <= 0, delta at 4 is 4
  CHECK(cost(zero, lone, 50, 2, 1) == doctest::Approx(4.0 / 6.0));
  CHECK_FALSE(satisfies_dataset(zero, lone));
}

TEST_CASE("cost is zero exactly when the dataset is satisfied") {
  Rng rng(3030);
  for (int trial = 0; trial < 300; ++trial) {
    int dim = trial % 2 ? 2 : 3;
    CandidateInvariant inv;
    int d = static_cast<int>(rng.uniform_int(1, 2));
    for (int i = 0; i < d; ++i) {
      Cube c;
      int preds = static_cast<int>(rng.uniform_int(1, 2));
      for (int j = 0; j < preds; ++j) {
        LinearPredicate p;
        p.coeffs.resize(dim);
        bool nz = false;
        for (int k = 0; k < dim; ++k) {
          p.coeffs[k] = rng.uniform_int(-2, 2);
          nz = nz || p.coeffs[k] != 0;
        }
        if (!nz) p.coeffs[0] = 1;
        p.bound = rng.uniform_int(-5, 5);
        c.predicates.push_back(p);
      }
      inv.cubes.push_back(c);
    }
    Dataset data;
    auto draw = [&] {
      StateVector s(dim);
      for (int k = 0; k < dim; ++k) s[k] = rng.uniform_int(-4, 4);
      return s;
    };
    for (int i = 0; i < 3; ++i) data.plus.insert(draw());
    for (int i = 0; i < 3; ++i) data.minus.insert(draw());
    for (int i = 0; i < 3; ++i) data.implications.insert({draw(), draw()});

    double c = cost(inv, data, 50, 2, dim);
    // oracle: direct clause evaluation
    bool sat = true;
    for (const auto& s : data.plus) sat = sat && eval_dnf(inv, s);
    for (const auto& s : data.minus) sat = sat && !eval_dnf(inv, s);
    for (const auto& pr : data.implications)
      sat = sat && (!eval_dnf(inv, pr.first) || eval_dnf(inv, pr.second));
    REQUIRE((c == 0.0) == sat);
    REQUIRE(satisfies_dataset(inv, data) == sat);
    REQUIRE(cost_parallel(inv, data, 50, 2, dim) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("neighborhood structure") {
  SUBCASE("exclusion of the zero coefficient") {
    StateSpace sp{1, 1000};
    SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 1, 2);
    auto nb = neighbor_candidates(single(1, 0), p);
    // coeff 1 -> 2 allowed, 1 -> 0 excluded; constants 0 -> +-1
    REQUIRE(nb.size() == 3);
    CHECK(std::count(nb.begin(), nb.end(), single(2, 0)) == 1);
    CHECK(std::count(nb.begin(), nb.end(), single(1, 1)) == 1);
    CHECK(std::count(nb.begin(), nb.end(), single(1, -1)) == 1);
  }
  SUBCASE("interior move count is cd(2n+2)") {
    StateSpace sp{2, 1000};
    SearchSpaceParams p = SearchSpaceParams::make(sp, 2, 2, 5);
    CandidateInvariant inv;
    inv.cubes.push_back(Cube{{LinearPredicate{{2, 2}, 7}, LinearPredicate{{-2, 3}, 0}}});
    inv.cubes.push_back(Cube{{LinearPredicate{{1, -3}, -4}, LinearPredicate{{3, 1}, 9}}});
    auto nb = neighbor_candidates(inv, p);
    CHECK(nb.size() == static_cast<size_t>(2 * 2 * (2 * 2 + 2)));
  }
  SUBCASE("reversibility") {
    StateSpace sp{2, 50};
    SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 2, 3);
    Rng rng(15);
    CandidateInvariant inv;
    inv.cubes.push_back(Cube{{LinearPredicate{{1, 2}, 4}, LinearPredicate{{-1, 1}, 2}}});
    for (int i = 0; i < 20; ++i) {
      CandidateInvariant next = sample_neighbor(inv, p, rng);
      auto back = neighbor_candidates(next, p);
      CHECK(std::count(back.begin(), back.end(), inv) == 1);
      inv = next;
    }
  }
}

TEST_CASE("initial_invariant") {
  StateSpace sp{2, 64};
  SearchSpaceParams p = SearchSpaceParams::make(sp, 2, 2, 3);
  Dataset data;
  data.plus.insert({1, 1});
  data.minus.insert({10, 10});
  Rng a(44), b(44);
  CandidateInvariant i1 = initial_invariant(data, p, 32, 50, 2, a);
  CandidateInvariant i2 = initial_invariant(data, p, 32, 50, 2, b);
  CHECK(i1 == i2); // seeded determinism
  CHECK(valid_candidate(i1, p));
  for (const Cube& c : i1.cubes)
    for (const LinearPredicate& pr : c.predicates) CHECK(pr.bound == 0);
}

TEST_CASE("bounded_random_walk chains costs") {
  StateSpace sp{1, 64};
  SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 1, 2);
  Dataset data;
  data.plus.insert({3});
  data.minus.insert({7});
  Rng rng(2);
  auto walk = bounded_random_walk(single(1, 0), 50, data, p, 50, 2, rng);
  REQUIRE(walk.size() == 50);
  for (size_t i = 0; i + 1 < walk.size(); ++i)
    CHECK(walk[i].cost_after == walk[i + 1].cost_before);
  for (const TransitionSample& t : walk) {
    CHECK(t.cost_before >= 0.0);
    CHECK(t.cost_after >= 0.0);
  }
}

TEST_CASE("initial_temperature") {
  SUBCASE("single positive transition algebra") {
    std::vector<TransitionSample> walk{{1.0, 2.0}};
    double t0 = initial_temperature(walk, 0.5, 0.01);
    CHECK(t0 == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-9));
  }
  SUBCASE("no uphill transitions falls back to 1 with a warning") {
    std::vector<TransitionSample> walk{{2.0, 1.0}, {1.0, 1.0}};
    std::vector<std::string> warnings;
    CHECK(initial_temperature(walk, 0.35, 0.01, &warnings) == 1.0);
    CHECK(warnings.size() == 1);
  }
  SUBCASE("fixed point reproduces the target acceptance on synthetic gaps") {
    std::vector<TransitionSample> walk{{0.0, 1.0}, {0.0, 3.0}};
    double a0 = 0.35, eps_T = 0.001;
    double t0 = initial_temperature(walk, a0, eps_T);
    double mean = (std::exp(-1.0 / t0) + std::exp(-3.0 / t0)) / 2.0;
    CHECK(mean == doctest::Approx(a0).epsilon(0.02));
  }
}

TEST_CASE("simulated_annealing") {
  StateSpace sp{1, 64};
  SearchSpaceParams p = SearchSpaceParams::make(sp, 1, 1, 1);
  Dataset data;
  data.plus.insert({3});
  data.minus.insert({4});
  AnnealConfig cfg;
  cfg.t_max = 10000;

  SUBCASE("zero-cost start returns immediately") {
    Rng rng(1);
    SaRun run = simulated_annealing(data, single(1, 3), p, 10.0, cfg, rng);
    REQUIRE(run.result.has_value());
    CHECK(*run.result == single(1, 3));
    CHECK(run.steps_used == 0);
  }
  SUBCASE("three constant moves to the unique optimum") {
    int found = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      SaRun run = simulated_annealing(data, single(1, 0), p, 100.0, cfg, rng);
      if (run.result && *run.result == single(1, 3)) ++found;
    }
    CHECK(found >= 19);
  }
  SUBCASE("stop flag halts within t_check") {
    // contradictory dataset so the run cannot finish before the first check
    Dataset stuck;
    stuck.plus.insert({3});
    stuck.minus.insert({3});
    std::atomic<bool> stop{true};
    Rng rng(1);
    cfg.t_check = 10;
    SaRun run = simulated_annealing(stuck, single(1, 0), p, 100.0, cfg, rng, &stop);
    CHECK_FALSE(run.result.has_value());
    CHECK(run.steps_used <= cfg.t_check);
  }
}

TEST_CASE("parallel_sa matches the serial reference") {
  StateSpace sp{1, 64};
  Dataset data;
  data.plus.insert({3});
  data.minus.insert({9});
  AnnealConfig cfg;
  cfg.t_max = 20000;
  Rng r1(5), r2(5);
  ParallelResult a = parallel_sa(data, std::nullopt, 1, 1, sp, cfg, r1);
  ParallelResult b = parallel_sa_serial(data, std::nullopt, 1, 1, sp, cfg, r2);
  REQUIRE(a.success);
  REQUIRE(b.success);
  CHECK(a.worker == b.worker);
  CHECK(*a.invariant == *b.invariant);
  CHECK(satisfies_dataset(*a.invariant, data));

  SUBCASE("single worker degenerates to one annealing run") {
    AnnealConfig one = cfg;
    one.k_list = {2};
    one.workers = 1;
    Rng r3(5), r4(5);
    ParallelResult pa = parallel_sa(data, std::nullopt, 1, 1, sp, one, r3);
    ParallelResult pb = parallel_sa(data, std::nullopt, 1, 1, sp, one, r4);
    REQUIRE(pa.success);
    CHECK(*pa.invariant == *pb.invariant); // replay determinism
    CHECK(pa.k == 2);
  }
}
