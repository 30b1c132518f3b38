#include "invsyn/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "invsyn/ratlp.hpp"

namespace invsyn::sampling {

using ratlp::Constraint;
using ratlp::LpStatus;
using ratlp::Rat;

mpz_class phi(int d, long m) {
  if (d > m) {
    mpz_class two = 1;
    mpz_mul_2exp(two.get_mpz_t(), two.get_mpz_t(), static_cast<mp_bitcnt_t>(m));
    return two;
  }
  mpz_class sum = 0, term;
  for (int i = 0; i <= d; ++i) {
    mpz_bin_uiui(term.get_mpz_t(), static_cast<unsigned long>(m), static_cast<unsigned long>(i));
    sum += term;
  }
  return sum;
}

long epsilon_net_size(const NetParams& p) {
  // m starts at ceil(8/eps)
  long m = static_cast<long>((8 * p.epsilon.den + p.epsilon.num - 1) / p.epsilon.num);
  mpz_class b_minus_a = p.delta.den - p.delta.num; // delta = a/b
  for (;; ++m) {
    // 1 - 2*phi(vc,2m)*2^{-e} > delta  <=>  (b-a)*2^e > 2*b*phi(vc,2m)
    // with e = floor(eps*m/2); flooring only weakens the bound (larger m)
    long e = static_cast<long>((static_cast<i128>(p.epsilon.num) * m) / (2 * p.epsilon.den));
    mpz_class lhs = b_minus_a;
    mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    mpz_class rhs = 2 * mpz_class(p.delta.den) * phi(p.vc, 2 * m);
    if (lhs > rhs) return m;
  }
}

namespace {

int64_t floor_rat(const Rat& r) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return static_cast<int64_t>(q.get_si());
}

int64_t ceil_rat(const Rat& r) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return static_cast<int64_t>(q.get_si());
}

std::vector<Constraint> cube_constraints(const Cube& cube, const StateSpace& space) {
  std::vector<Constraint> cons;
  size_t n = static_cast<size_t>(space.dim);
  for (const LinearPredicate& p : cube.predicates) {
    Constraint c;
    c.a.resize(n);
    for (size_t j = 0; j < n; ++j) c.a[j] = Rat(static_cast<long>(p.coeffs[j]));
    c.b = Rat(static_cast<long>(p.bound));
    cons.push_back(std::move(c));
  }
  for (size_t j = 0; j < n; ++j) {
    Constraint up, down;
    up.a.assign(n, Rat(0));
    down.a.assign(n, Rat(0));
    up.a[j] = 1;
    up.b = Rat(static_cast<long>(space.hi()));
    down.a[j] = -1;
    down.b = Rat(static_cast<long>(-space.lo()));
    cons.push_back(std::move(up));
    cons.push_back(std::move(down));
  }
  return cons;
}

}  // namespace

std::optional<Hyperrectangle> bounding_box(const Cube& cube, const StateSpace& space) {
  size_t n = static_cast<size_t>(space.dim);
  std::vector<Constraint> cons = cube_constraints(cube, space);
  Hyperrectangle box;
  box.lo.resize(n);
  box.hi.resize(n);
  for (size_t j = 0; j < n; ++j) {
    std::vector<Rat> obj(n, Rat(0));
    obj[j] = 1;
    ratlp::LpResult up = ratlp::optimize(cons, obj, space.dim);
    if (up.status == LpStatus::Infeasible) return std::nullopt;
    obj[j] = -1;
    ratlp::LpResult down = ratlp::optimize(cons, obj, space.dim);
    // box constraints are part of the program, so Unbounded cannot occur
    box.hi[j] = floor_rat(up.value);
    box.lo[j] = ceil_rat(-down.value);
    if (box.lo[j] > box.hi[j]) return std::nullopt; // no lattice point on this axis
  }
  return box;
}

std::optional<DiophantineSystem> is_affine_contained(const Cube& cube, const StateSpace& space) {
  DiophantineSystem sys;
  size_t np = cube.predicates.size();
  std::vector<bool> used(np, false);
  for (size_t i = 0; i < np; ++i) {
    if (used[i]) continue;
    const LinearPredicate& p = cube.predicates[i];
    // purely syntactic rule: scaled pairs like {2x+2y <= 8, -2x-2y <= -8}
    // are deliberately passed over, the rejection path still handles them
    int64_t g = 0;
    for (int64_t c : p.coeffs) g = std::gcd(g, c);
    if (g != 1) continue;
    for (size_t j = i + 1; j < np; ++j) {
      if (used[j]) continue;
      const LinearPredicate& q = cube.predicates[j];
      bool mirror = q.bound == -p.bound;
      for (size_t v = 0; mirror && v < p.coeffs.size(); ++v)
        if (q.coeffs[v] != -p.coeffs[v]) mirror = false;
      if (mirror) {
        sys.A.push_back(p.coeffs);
        sys.B.push_back(p.bound);
        used[i] = used[j] = true;
        break;
      }
    }
  }
  if (sys.A.empty()) return std::nullopt;
  sys.box.lo.assign(static_cast<size_t>(space.dim), space.lo());
  sys.box.hi.assign(static_cast<size_t>(space.dim), space.hi());
  return sys;
}

namespace {

struct DioReduction {
  std::vector<mpz_class> x0;                 // particular solution
  std::vector<std::vector<mpz_class>> basis; // null-space basis vectors, length n each
};

// unimodular row reduction of [A^T : I]; solves A x = B over the integers
DioReduction reduce_diophantine(const DiophantineSystem& sys) {
  size_t m = sys.A.size();
  size_t n = sys.A.empty() ? 0 : sys.A[0].size();
  // G = [A^T : I], n rows, m + n columns
  std::vector<std::vector<mpz_class>> g(n, std::vector<mpz_class>(m + n, 0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) g[i][j] = sys.A[j][i];
    g[i][m + i] = 1;
  }

  size_t rank = 0;
  std::vector<size_t> pivot_col;
  for (size_t col = 0; col < m && rank < n; ++col) {
    // clear all but one nonzero below the current rank row with gcd steps
    for (;;) {
      size_t first = n;
      for (size_t i = rank; i < n; ++i)
        if (g[i][col] != 0) {
          first = i;
          break;
        }
      if (first == n) break;
      size_t second = n;
      for (size_t i = first + 1; i < n; ++i)
        if (g[i][col] != 0) {
          second = i;
          break;
        }
      if (second == n) {
        std::swap(g[rank], g[first]);
        pivot_col.push_back(col);
        ++rank;
        break;
      }
      mpz_class a = g[first][col], b = g[second][col], gcd, u, v;
      mpz_gcdext(gcd.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      mpz_class p = -b / gcd, q = a / gcd; // det of [[u, v], [p, q]] transform is 1
      for (size_t j = 0; j < m + n; ++j) {
        mpz_class r1 = u * g[first][j] + v * g[second][j];
        mpz_class r2 = p * g[first][j] + q * g[second][j];
        g[first][j] = r1;
        g[second][j] = r2;
      }
    }
  }

  // back-substitute R^T y = B on the pivot equations
  std::vector<mpz_class> y(n, 0);
  for (size_t i = 0; i < rank; ++i) {
    mpz_class acc = sys.B[pivot_col[i]];
    for (size_t i2 = 0; i2 < i; ++i2) acc -= g[i2][pivot_col[i]] * y[i2];
    mpz_class rem;
    mpz_tdiv_r(rem.get_mpz_t(), acc.get_mpz_t(), g[i][pivot_col[i]].get_mpz_t());
    if (rem != 0) throw NoIntegerSolution("diophantine system has no integer solution");
    y[i] = acc / g[i][pivot_col[i]];
  }
  // consistency on the non-pivot equations
  for (size_t j = 0; j < m; ++j) {
    mpz_class acc = 0;
    for (size_t i = 0; i < rank; ++i) acc += g[i][j] * y[i];
    if (acc != sys.B[j]) throw NoIntegerSolution("diophantine system is inconsistent");
  }

  DioReduction red;
  red.x0.assign(n, 0);
  for (size_t i = 0; i < rank; ++i)
    for (size_t v = 0; v < n; ++v) red.x0[v] += y[i] * g[i][m + v];
  for (size_t i = rank; i < n; ++i) {
    std::vector<mpz_class> bvec(n);
    for (size_t v = 0; v < n; ++v) bvec[v] = g[i][m + v];
    red.basis.push_back(std::move(bvec));
  }
  return red;
}

Rat mpz_to_rat(const mpz_class& z) {
  Rat r(z);
  return r;
}

}  // namespace

StateVector diophantine_sample(const DiophantineSystem& sys, Rng& rng, int64_t retry_budget) {
  DioReduction red = reduce_diophantine(sys);
  size_t n = red.x0.size();
  size_t f = red.basis.size();

  auto in_box = [&](const std::vector<mpz_class>& x) {
    for (size_t v = 0; v < n; ++v)
      if (x[v] < sys.box.lo[v] || x[v] > sys.box.hi[v]) return false;
    return true;
  };
  auto to_state = [&](const std::vector<mpz_class>& x) {
    StateVector s(n);
    for (size_t v = 0; v < n; ++v) s[v] = static_cast<int64_t>(x[v].get_si());
    return s;
  };

  if (f == 0) {
    if (!in_box(red.x0)) throw EmptyRegion("unique diophantine solution outside box");
    return to_state(red.x0);
  }

  // exact alpha ranges: optimize each alpha_i subject to box bounds on
  // x0 + basis * alpha (always bounded: basis columns are part of a
  // unimodular matrix, hence independent)
  std::vector<Constraint> cons;
  for (size_t v = 0; v < n; ++v) {
    Constraint up, down;
    up.a.resize(f);
    down.a.resize(f);
    for (size_t i = 0; i < f; ++i) {
      up.a[i] = mpz_to_rat(red.basis[i][v]);
      down.a[i] = -up.a[i];
    }
    up.b = mpz_to_rat(mpz_class(sys.box.hi[v]) - red.x0[v]);
    down.b = mpz_to_rat(red.x0[v] - mpz_class(sys.box.lo[v]));
    cons.push_back(std::move(up));
    cons.push_back(std::move(down));
  }
  std::vector<int64_t> lo(f), hi(f);
  for (size_t i = 0; i < f; ++i) {
    std::vector<Rat> obj(f, Rat(0));
    obj[i] = 1;
    ratlp::LpResult up = ratlp::optimize(cons, obj, static_cast<int>(f));
    if (up.status == LpStatus::Infeasible)
      throw EmptyRegion("no in-box solution (alpha polytope empty)");
    obj[i] = -1;
    ratlp::LpResult down = ratlp::optimize(cons, obj, static_cast<int>(f));
    hi[i] = floor_rat(up.value);
    lo[i] = ceil_rat(-down.value);
    if (lo[i] > hi[i]) throw EmptyRegion("no in-box solution (empty alpha range)");
  }

  std::vector<mpz_class> x(n);
  auto instantiate = [&](const std::vector<int64_t>& alpha) {
    for (size_t v = 0; v < n; ++v) {
      x[v] = red.x0[v];
      for (size_t i = 0; i < f; ++i) x[v] += red.basis[i][v] * alpha[i];
    }
  };

  std::vector<int64_t> alpha(f);
  for (int64_t t = 0; t < retry_budget; ++t) {
    for (size_t i = 0; i < f; ++i) alpha[i] = rng.uniform_int(lo[i], hi[i]);
    instantiate(alpha);
    if (in_box(x)) return to_state(x);
  }

  // budget exhausted: prove emptiness by enumeration when feasible
  double combos = 1.0;
  for (size_t i = 0; i < f; ++i) combos *= static_cast<double>(hi[i] - lo[i] + 1);
  if (combos <= static_cast<double>(retry_budget)) {
    std::vector<StateVector> hits;
    std::vector<int64_t> a = lo;
    for (;;) {
      instantiate(a);
      if (in_box(x)) hits.push_back(to_state(x));
      size_t i = 0;
      while (i < f) {
        if (++a[i] <= hi[i]) break;
        a[i] = lo[i];
        ++i;
      }
      if (i == f) break;
    }
    if (hits.empty()) throw EmptyRegion("no in-box solution (exhaustive alpha scan)");
    return rng.pick(hits);
  }
  throw RetryBudgetExhausted("diophantine sampler retry budget exhausted", 0.0);
}

StateVector uniform_sample_polytope(const Cube& cube, const StateSpace& space, Rng& rng,
                                    int64_t retry_budget) {
  std::optional<Hyperrectangle> box = bounding_box(cube, space);
  if (!box) throw EmptyRegion("cube has empty relaxation over the box");
  size_t n = static_cast<size_t>(space.dim);

  if (std::optional<DiophantineSystem> dio = is_affine_contained(cube, space)) {
    dio->box = *box; // tighter than the state box, still covers every solution
    for (int64_t t = 0; t < retry_budget; ++t) {
      StateVector s = diophantine_sample(*dio, rng, retry_budget);
      if (eval_cube(cube, s)) return s; // reject against remaining inequalities
    }
    throw RetryBudgetExhausted("affine-path retry budget exhausted", 0.0);
  }

  int64_t accepted = 0;
  StateVector s(n);
  for (int64_t t = 0; t < retry_budget; ++t) {
    for (size_t v = 0; v < n; ++v) s[v] = rng.uniform_int(box->lo[v], box->hi[v]);
    if (eval_cube(cube, s)) return s;
  }
  double estimate = static_cast<double>(accepted) / static_cast<double>(retry_budget);
  throw RetryBudgetExhausted("rejection sampler retry budget exhausted (low density)", estimate);
}

std::set<StateVector> net_draws(const DnfFormula& f, long count, const StateSpace& space, Rng& rng,
                                std::vector<std::string>* warnings) {
  std::set<StateVector> out;
  for (size_t ci = 0; ci < f.cubes.size(); ++ci) {
    try {
      for (long i = 0; i < count; ++i) out.insert(uniform_sample_polytope(f.cubes[ci], space, rng));
    } catch (const EmptyRegion&) {
      if (warnings)
        warnings->push_back("net: cube " + std::to_string(ci) + " is empty over the box; skipped");
    }
  }
  return out;
}

std::set<StateVector> randomized_epsilon_net(const DnfFormula& f, const NetParams& p,
                                             const StateSpace& space, Rng& rng,
                                             std::vector<std::string>* warnings) {
  return net_draws(f, epsilon_net_size(p), space, rng, warnings);
}

namespace {

void add_implications(Dataset& data, const ChcSystem& sys, const std::set<StateVector>& heads) {
  for (const StateVector& h : heads)
    for (const StateVector& t : apply_transition(sys.trans, sys.space, h))
      data.implications.insert({h, t});
}

}  // namespace

Dataset initial_dataset(const ChcSystem& sys, Rat64 eps0, Rat64 delta0, Rng& rng,
                        std::vector<std::string>* warnings) {
  NetParams p{eps0, delta0, ellipsoid_vc(sys.space.dim)};
  Dataset data;
  data.plus = randomized_epsilon_net(sys.pre, p, sys.space, rng, warnings);
  add_implications(data, sys, randomized_epsilon_net(sys.guard, p, sys.space, rng, warnings));
  DnfFormula not_q = negate_dnf(sys.post, sys.space.dim);
  data.minus = randomized_epsilon_net(not_q, p, sys.space, rng, warnings);
  return data;
}

std::pair<Dataset, Rat64> refined_dataset(const ChcSystem& sys, Rat64 current_eps, Rat64 delta0,
                                          const Dataset& existing, Rng& rng,
                                          std::vector<std::string>* warnings) {
  Rat64 new_eps = current_eps.halved();
  int vc = ellipsoid_vc(sys.space.dim);
  long m_old = epsilon_net_size({current_eps, delta0, vc});
  long m_new = epsilon_net_size({new_eps, delta0, vc});
  long marginal = std::max(0L, m_new - m_old);

  Dataset data = existing;
  for (const StateVector& s : net_draws(sys.pre, marginal, sys.space, rng, warnings))
    data.plus.insert(s);
  add_implications(data, sys, net_draws(sys.guard, marginal, sys.space, rng, warnings));
  DnfFormula not_q = negate_dnf(sys.post, sys.space.dim);
  for (const StateVector& s : net_draws(not_q, marginal, sys.space, rng, warnings))
    data.minus.insert(s);
  return {std::move(data), new_eps};
}

}  // namespace invsyn::sampling
