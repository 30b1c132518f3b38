#pragma once

#include <gmpxx.h>

#include <optional>

#include "invsyn/core.hpp"
#include "invsyn/rng.hpp"

namespace invsyn::sampling {

// exact rational, kept in int64 because epsilon only ever halves
struct Rat64 {
  int64_t num = 1;
  int64_t den = 2;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rat64 halved() const { return {num, den * 2}; }
  bool operator==(const Rat64&) const = default;
};

struct NetParams {
  Rat64 epsilon{1, 2};
  Rat64 delta{9, 10};
  int vc = 5; // (n^2 + 3n)/2 for ellipsoid ranges
};

inline int ellipsoid_vc(int n) { return (n * n + 3 * n) / 2; }

struct Hyperrectangle {
  StateVector lo, hi;

  double cardinality() const {
    double c = 1.0;
    for (size_t i = 0; i < lo.size(); ++i) c *= static_cast<double>(hi[i] - lo[i] + 1);
    return c;
  }
  bool contains(const StateVector& s) const {
    for (size_t i = 0; i < s.size(); ++i)
      if (s[i] < lo[i] || s[i] > hi[i]) return false;
    return true;
  }
};

struct DiophantineSystem {
  std::vector<std::vector<int64_t>> A; // m x n
  std::vector<int64_t> B;              // length m
  Hyperrectangle box;
};

struct EmptyRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoIntegerSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RetryBudgetExhausted : std::runtime_error {
  double acceptance_estimate;
  RetryBudgetExhausted(const std::string& msg, double est)
      : std::runtime_error(msg), acceptance_estimate(est) {}
};

inline constexpr int64_t kDefaultRetryBudget = 1000000;

// phi_d(m) = sum_{i<=d} C(m, i), or 2^m when d > m
mpz_class phi(int d, long m);

// smallest m >= ceil(8/eps) with 1 - 2*phi(vc, 2m)*2^{-eps*m/2} > delta;
// the non-integral exponent is floored, which errs toward larger m
long epsilon_net_size(const NetParams& p);

// tight per-axis bounds on cube intersected with the state box via 2n exact
// rational LP solves, rounded inward; nullopt when the relaxation is empty
std::optional<Hyperrectangle> bounding_box(const Cube& cube, const StateSpace& space);

// syntactic check for equality pairs (w.x <= b, -w.x <= -b); sound, incomplete
std::optional<DiophantineSystem> is_affine_contained(const Cube& cube, const StateSpace& space);

StateVector diophantine_sample(const DiophantineSystem& sys, Rng& rng,
                               int64_t retry_budget = kDefaultRetryBudget);

StateVector uniform_sample_polytope(const Cube& cube, const StateSpace& space, Rng& rng,
                                    int64_t retry_budget = kDefaultRetryBudget);

// `count` uniform draws per nonempty cube (empty cubes skipped with warning)
std::set<StateVector> net_draws(const DnfFormula& f, long count, const StateSpace& space, Rng& rng,
                                std::vector<std::string>* warnings = nullptr);

std::set<StateVector> randomized_epsilon_net(const DnfFormula& f, const NetParams& p,
                                             const StateSpace& space, Rng& rng,
                                             std::vector<std::string>* warnings = nullptr);

Dataset initial_dataset(const ChcSystem& sys, Rat64 eps0, Rat64 delta0, Rng& rng,
                        std::vector<std::string>* warnings = nullptr);

// halves epsilon and appends only the marginal m(eps/2) - m(eps) draws per cube
std::pair<Dataset, Rat64> refined_dataset(const ChcSystem& sys, Rat64 current_eps, Rat64 delta0,
                                          const Dataset& existing, Rng& rng,
                                          std::vector<std::string>* warnings = nullptr);

inline bool refine_criterion(long t, long t_refine) { return t % t_refine == 0; }

}  // namespace invsyn::sampling
