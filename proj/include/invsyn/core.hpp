#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace invsyn {

using std::int64_t;
using i128 = __int128;

using StateVector = std::vector<int64_t>;
using StatePair = std::pair<StateVector, StateVector>;

struct StateSpace {
  int dim = 1;              // n
  int64_t int_bound = 1000; // box is [-int_bound-1, int_bound]^n

  int64_t lo() const { return -int_bound - 1; }
  int64_t hi() const { return int_bound; }
  // L2 radius bound on any admissible state: sqrt(n) * (int_bound + 1)
  double radius() const;
  bool contains(const StateVector& s) const;
  // |box| as double (may overflow 64 bits for large n/bounds)
  double box_cardinality() const;
};

struct LinearPredicate {
  std::vector<int64_t> coeffs; // w
  int64_t bound = 0;           // b; semantics w.x <= b

  bool operator==(const LinearPredicate&) const = default;
  auto operator<=>(const LinearPredicate&) const = default;
};

// exact dot product; coordinates and coefficients fit in int64, the
// accumulator is 128-bit so n * k * int_bound scale sums cannot wrap
i128 dot(const std::vector<int64_t>& w, const StateVector& s);

bool eval_predicate(const LinearPredicate& p, const StateVector& s);

struct Cube {
  std::vector<LinearPredicate> predicates; // conjunction, length >= 1

  bool operator==(const Cube&) const = default;
  auto operator<=>(const Cube&) const = default;
};

struct DnfFormula {
  std::vector<Cube> cubes; // disjunction; empty list = false

  // (d, c) = (cube count, max cube length)
  std::pair<int, int> shape() const;
  bool operator==(const DnfFormula&) const = default;
};

// the tautological predicate 0.x <= 0, used to spell "true" as a DNF
DnfFormula dnf_true(int dim);
inline DnfFormula dnf_false() { return DnfFormula{}; }

struct LinearMap {
  std::vector<std::vector<int64_t>> matrix; // n x n
  std::vector<int64_t> offset;              // length n

  StateVector apply(const StateVector& s) const; // exact, may leave the box
  bool operator==(const LinearMap&) const = default;
};

struct TransitionRelation {
  struct Block {
    DnfFormula guard;
    std::vector<LinearMap> maps; // nonempty
  };
  std::vector<Block> blocks;

  int d_T() const { return static_cast<int>(blocks.size()); }
  int r_T() const; // max maps per block
};

struct ChcSystem {
  StateSpace space;
  DnfFormula pre;   // P
  DnfFormula guard; // B
  TransitionRelation trans;
  DnfFormula post;  // Q
};

struct Dataset {
  std::set<StateVector> plus;
  std::set<StateVector> minus;
  std::set<StatePair> implications;

  size_t total() const { return plus.size() + minus.size() + implications.size(); }
};

struct DatasetStats {
  double kappa_inf = 0.0;
  double lambda_arrow = 0.0;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SizeCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool eval_cube(const Cube& c, const StateVector& s);
bool eval_dnf(const DnfFormula& f, const StateVector& s);

inline constexpr int kDefaultDnfCap = 4096;

// integer complement: ~(w.x <= b) = (-w.x <= -b-1)
LinearPredicate negate_predicate(const LinearPredicate& p);

// drops tautological predicates, dedups, detects contradictions (nullopt);
// a cube reduced to nothing comes back as the single tautology predicate
std::optional<Cube> simplify_cube(Cube c, int dim);

// simplify every cube, drop contradictory ones, sort and dedup cubes
DnfFormula canonicalize_dnf(DnfFormula f, int dim);

// pointwise complement over integer states; at most c^d cubes of <= d
// predicates each.  ~(w.x <= b) becomes (-w.x <= -b-1).  Throws
// SizeCapExceeded when the distribution would exceed cap cubes.
DnfFormula negate_dnf(const DnfFormula& f, int dim, int cap = kDefaultDnfCap);

// all tails of one transition application; tails leaving the box are dropped
// and counted in *clipped when given
std::set<StateVector> apply_transition(const TransitionRelation& t, const StateSpace& space,
                                       const StateVector& head, int64_t* clipped = nullptr);

// depth successive expansions, intermediate heads restricted to guard
std::set<StateVector> iterated_tails(const TransitionRelation& t, const StateSpace& space,
                                     const DnfFormula& guard, const std::set<StateVector>& states,
                                     int depth, size_t frontier_cap = 1u << 20);

DatasetStats dataset_stats(const Dataset& data);

int64_t norm_inf(const StateVector& s);

}  // namespace invsyn
