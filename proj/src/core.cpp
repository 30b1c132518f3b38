#include "invsyn/core.hpp"

#include <algorithm>
#include <cmath>

namespace invsyn {

double StateSpace::radius() const {
  return std::sqrt(static_cast<double>(dim)) * static_cast<double>(int_bound + 1);
}

bool StateSpace::contains(const StateVector& s) const {
  if (static_cast<int>(s.size()) != dim) return false;
  for (int64_t x : s)
    if (x < lo() || x > hi()) return false;
  return true;
}

double StateSpace::box_cardinality() const {
  double side = static_cast<double>(hi() - lo() + 1);
  double total = 1.0;
  for (int i = 0; i < dim; ++i) total *= side;
  return total;
}

i128 dot(const std::vector<int64_t>& w, const StateVector& s) {
  if (w.size() != s.size()) throw DimensionMismatch("dot: length mismatch");
  i128 acc = 0;
  for (size_t i = 0; i < w.size(); ++i) acc += static_cast<i128>(w[i]) * s[i];
  return acc;
}

bool eval_predicate(const LinearPredicate& p, const StateVector& s) {
  return dot(p.coeffs, s) <= static_cast<i128>(p.bound);
}

std::pair<int, int> DnfFormula::shape() const {
  int c = 0;
  for (const Cube& cube : cubes) c = std::max(c, static_cast<int>(cube.predicates.size()));
  return {static_cast<int>(cubes.size()), c};
}

DnfFormula dnf_true(int dim) {
  LinearPredicate taut;
  taut.coeffs.assign(static_cast<size_t>(dim), 0);
  taut.bound = 0;
  return DnfFormula{{Cube{{taut}}}};
}

StateVector LinearMap::apply(const StateVector& s) const {
  StateVector out(offset.size());
  for (size_t i = 0; i < matrix.size(); ++i) {
    i128 acc = offset[i];
    for (size_t j = 0; j < s.size(); ++j) acc += static_cast<i128>(matrix[i][j]) * s[j];
    // clamp detection: results beyond int64 are far outside any box and get
    // clipped by the caller anyway, but keep them representable
    if (acc > INT64_MAX) acc = INT64_MAX;
    if (acc < INT64_MIN) acc = INT64_MIN;
    out[i] = static_cast<int64_t>(acc);
  }
  return out;
}

int TransitionRelation::r_T() const {
  int r = 0;
  for (const Block& b : blocks) r = std::max(r, static_cast<int>(b.maps.size()));
  return r;
}

bool eval_cube(const Cube& c, const StateVector& s) {
  for (const LinearPredicate& p : c.predicates)
    if (!eval_predicate(p, s)) return false;
  return true;
}

bool eval_dnf(const DnfFormula& f, const StateVector& s) {
  for (const Cube& c : f.cubes)
    if (eval_cube(c, s)) return true;
  return false;
}

namespace {

bool is_zero_vec(const std::vector<int64_t>& w) {
  return std::all_of(w.begin(), w.end(), [](int64_t x) { return x == 0; });
}

}  // namespace

// drop tautologies (0.x <= b, b >= 0), detect contradictions (0.x <= b, b < 0),
// dedup predicates
std::optional<Cube> simplify_cube(Cube c, int dim) {
  std::vector<LinearPredicate> kept;
  for (LinearPredicate& p : c.predicates) {
    if (is_zero_vec(p.coeffs)) {
      if (p.bound < 0) return std::nullopt;
      continue;
    }
    kept.push_back(std::move(p));
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) {
    // cube reduced to "true"
    LinearPredicate taut;
    taut.coeffs.assign(static_cast<size_t>(dim), 0);
    kept.push_back(taut);
  }
  c.predicates = std::move(kept);
  return c;
}

DnfFormula canonicalize_dnf(DnfFormula f, int dim) {
  std::vector<Cube> out;
  for (Cube& c : f.cubes)
    if (auto s = simplify_cube(std::move(c), dim)) out.push_back(std::move(*s));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return DnfFormula{std::move(out)};
}

LinearPredicate negate_predicate(const LinearPredicate& p) {
  LinearPredicate q;
  q.coeffs.resize(p.coeffs.size());
  for (size_t i = 0; i < p.coeffs.size(); ++i) q.coeffs[i] = -p.coeffs[i];
  q.bound = -p.bound - 1;
  return q;
}

DnfFormula negate_dnf(const DnfFormula& f, int dim, int cap) {
  if (f.cubes.empty()) return dnf_true(dim);

  // ~(V_i cube_i) = A_i (V_j ~p_ij); distributing picks one predicate per cube
  double combos = 1.0;
  for (const Cube& c : f.cubes) combos *= static_cast<double>(c.predicates.size());
  if (combos > static_cast<double>(cap))
    throw SizeCapExceeded("negate_dnf: result would exceed cube cap");

  std::vector<Cube> result;
  std::vector<size_t> idx(f.cubes.size(), 0);
  for (;;) {
    Cube cand;
    for (size_t i = 0; i < f.cubes.size(); ++i)
      cand.predicates.push_back(negate_predicate(f.cubes[i].predicates[idx[i]]));
    if (auto s = simplify_cube(std::move(cand), dim)) result.push_back(std::move(*s));

    size_t i = 0;
    while (i < idx.size()) {
      if (++idx[i] < f.cubes[i].predicates.size()) break;
      idx[i] = 0;
      ++i;
    }
    if (i == idx.size()) break;
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  if (static_cast<int>(result.size()) > cap)
    throw SizeCapExceeded("negate_dnf: result would exceed cube cap");
  return DnfFormula{std::move(result)};
}

std::set<StateVector> apply_transition(const TransitionRelation& t, const StateSpace& space,
                                       const StateVector& head, int64_t* clipped) {
  std::set<StateVector> tails;
  for (const TransitionRelation::Block& b : t.blocks) {
    if (!eval_dnf(b.guard, head)) continue;
    for (const LinearMap& m : b.maps) {
      StateVector out = m.apply(head);
      if (space.contains(out)) {
        tails.insert(std::move(out));
      } else if (clipped) {
        ++*clipped;
      }
    }
  }
  return tails;
}

std::set<StateVector> iterated_tails(const TransitionRelation& t, const StateSpace& space,
                                     const DnfFormula& guard, const std::set<StateVector>& states,
                                     int depth, size_t frontier_cap) {
  std::set<StateVector> frontier = states;
  for (int step = 0; step < depth; ++step) {
    std::set<StateVector> next;
    for (const StateVector& s : frontier) {
      if (!eval_dnf(guard, s)) continue;
      for (StateVector tail : apply_transition(t, space, s)) next.insert(std::move(tail));
      if (next.size() > frontier_cap)
        throw SizeCapExceeded("iterated_tails: frontier cap exceeded");
    }
    frontier = std::move(next);
  }
  return frontier;
}

int64_t norm_inf(const StateVector& s) {
  int64_t m = 0;
  for (int64_t x : s) m = std::max(m, x < 0 ? -x : x);
  return m;
}

DatasetStats dataset_stats(const Dataset& data) {
  DatasetStats st;
  double terms[3] = {0.0, 0.0, 0.0};
  if (!data.plus.empty()) {
    i128 sum = 0;
    for (const StateVector& p : data.plus) sum += norm_inf(p);
    terms[0] = static_cast<double>(sum) / static_cast<double>(data.plus.size());
  }
  if (!data.implications.empty()) {
    i128 sum = 0;
    for (const StatePair& hp : data.implications)
      sum += std::max(norm_inf(hp.first), norm_inf(hp.second));
    terms[1] = static_cast<double>(sum) / static_cast<double>(data.implications.size());
  }
  if (!data.minus.empty()) {
    i128 sum = 0;
    for (const StateVector& m : data.minus) sum += norm_inf(m);
    terms[2] = static_cast<double>(sum) / static_cast<double>(data.minus.size());
  }
  st.kappa_inf = (terms[0] + terms[1] + terms[2]) / 3.0;

  if (!data.implications.empty()) {
    double sum = 0.0;
    for (const StatePair& hp : data.implications) {
      i128 sq = 0;
      for (size_t i = 0; i < hp.first.size(); ++i) {
        i128 d = static_cast<i128>(hp.first[i]) - hp.second[i];
        sq += d * d;
      }
      sum += std::sqrt(static_cast<double>(sq));
    }
    st.lambda_arrow = sum / static_cast<double>(data.implications.size());
  }
  return st;
}

}  // namespace invsyn
