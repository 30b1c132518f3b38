#include "invsyn/sa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace invsyn::sa {

bool valid_candidate(const CandidateInvariant& inv, const SearchSpaceParams& p) {
  if (static_cast<int>(inv.cubes.size()) != p.d) return false;
  for (const Cube& cube : inv.cubes) {
    if (static_cast<int>(cube.predicates.size()) != p.c) return false;
    for (const LinearPredicate& pred : cube.predicates) {
      if (static_cast<int>(pred.coeffs.size()) != p.n) return false;
      int64_t inf = 0;
      for (int64_t w : pred.coeffs) inf = std::max(inf, w < 0 ? -w : w);
      if (inf == 0 || inf > p.k) return false;
      if (pred.bound > p.k_prime || pred.bound < -p.k_prime) return false;
    }
  }
  return true;
}

double delta_approx(const DnfFormula& inv, const StateVector& s) {
  if (inv.cubes.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const Cube& cube : inv.cubes) {
    double sum = 0.0;
    for (const LinearPredicate& p : cube.predicates) {
      i128 v = dot(p.coeffs, s) - static_cast<i128>(p.bound);
      if (v <= 0) continue;
      i128 sq = 0;
      for (int64_t w : p.coeffs) sq += static_cast<i128>(w) * w;
      double norm = std::sqrt(static_cast<double>(sq));
      sum += norm > 0 ? static_cast<double>(v) / norm : static_cast<double>(v);
    }
    best = std::min(best, sum / static_cast<double>(cube.predicates.size()));
  }
  return best;
}

double normalizer(double x, double alpha, double beta) {
  if (x <= alpha) return x / beta;
  return alpha / beta - 1.0 + 2.0 / (1.0 + std::exp(-2.0 * (x - alpha) / beta));
}

namespace {

// predicate norms depend only on the formula, not on the evaluation point, so
// they are hoisted out of the per-point loops (same arithmetic as delta_approx)
using NormTable = std::vector<std::vector<double>>;

NormTable norm_table(const DnfFormula& f) {
  NormTable t(f.cubes.size());
  for (size_t i = 0; i < f.cubes.size(); ++i) {
    t[i].reserve(f.cubes[i].predicates.size());
    for (const LinearPredicate& p : f.cubes[i].predicates) {
      i128 sq = 0;
      for (int64_t w : p.coeffs) sq += static_cast<i128>(w) * w;
      t[i].push_back(std::sqrt(static_cast<double>(sq)));
    }
  }
  return t;
}

double delta_prepared(const DnfFormula& inv, const NormTable& norms, const StateVector& s) {
  if (inv.cubes.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (size_t ci = 0; ci < inv.cubes.size(); ++ci) {
    const Cube& cube = inv.cubes[ci];
    double sum = 0.0;
    for (size_t pi = 0; pi < cube.predicates.size(); ++pi) {
      const LinearPredicate& p = cube.predicates[pi];
      i128 v = dot(p.coeffs, s) - static_cast<i128>(p.bound);
      if (v <= 0) continue;
      double norm = norms[ci][pi];
      sum += norm > 0 ? static_cast<double>(v) / norm : static_cast<double>(v);
    }
    best = std::min(best, sum / static_cast<double>(cube.predicates.size()));
  }
  return best;
}

double cost_with_negation(const CandidateInvariant& inv, const DnfFormula& neg,
                          const Dataset& data, double alpha, double beta) {
  NormTable inv_norms = norm_table(inv), neg_norms = norm_table(neg);
  double total = 0.0;
  if (!data.plus.empty()) {
    double sum = 0.0;
    for (const StateVector& p : data.plus)
      sum += normalizer(delta_prepared(inv, inv_norms, p), alpha, beta);
    total += sum / static_cast<double>(data.plus.size());
  }
  if (!data.implications.empty()) {
    double sum = 0.0;
    for (const StatePair& hp : data.implications)
      sum += std::min(normalizer(delta_prepared(neg, neg_norms, hp.first), alpha, beta),
                      normalizer(delta_prepared(inv, inv_norms, hp.second), alpha, beta));
    total += sum / static_cast<double>(data.implications.size());
  }
  if (!data.minus.empty()) {
    double sum = 0.0;
    for (const StateVector& m : data.minus)
      sum += normalizer(delta_prepared(neg, neg_norms, m), alpha, beta);
    total += sum / static_cast<double>(data.minus.size());
  }
  return total / 3.0;
}

}  // namespace

double cost(const CandidateInvariant& inv, const Dataset& data, double alpha, double beta,
            int dim) {
  return cost_with_negation(inv, negate_dnf(inv, dim), data, alpha, beta);
}

double cost_parallel(const CandidateInvariant& inv, const Dataset& data, double alpha, double beta,
                     int dim) {
  DnfFormula neg = negate_dnf(inv, dim);
  NormTable inv_norms = norm_table(inv), neg_norms = norm_table(neg);
  std::vector<const StateVector*> plus, minus;
  std::vector<const StatePair*> imps;
  plus.reserve(data.plus.size());
  minus.reserve(data.minus.size());
  imps.reserve(data.implications.size());
  for (const StateVector& p : data.plus) plus.push_back(&p);
  for (const StateVector& m : data.minus) minus.push_back(&m);
  for (const StatePair& hp : data.implications) imps.push_back(&hp);

  double total = 0.0;
  if (!plus.empty()) {
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (long i = 0; i < static_cast<long>(plus.size()); ++i)
      sum += normalizer(delta_prepared(inv, inv_norms, *plus[i]), alpha, beta);
    total += sum / static_cast<double>(plus.size());
  }
  if (!imps.empty()) {
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (long i = 0; i < static_cast<long>(imps.size()); ++i)
      sum += std::min(normalizer(delta_prepared(neg, neg_norms, imps[i]->first), alpha, beta),
                      normalizer(delta_prepared(inv, inv_norms, imps[i]->second), alpha, beta));
    total += sum / static_cast<double>(imps.size());
  }
  if (!minus.empty()) {
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (long i = 0; i < static_cast<long>(minus.size()); ++i)
      sum += normalizer(delta_prepared(neg, neg_norms, *minus[i]), alpha, beta);
    total += sum / static_cast<double>(minus.size());
  }
  return total / 3.0;
}

bool satisfies_dataset(const CandidateInvariant& inv, const Dataset& data) {
  for (const StateVector& p : data.plus)
    if (!eval_dnf(inv, p)) return false;
  for (const StatePair& hp : data.implications)
    if (eval_dnf(inv, hp.first) && !eval_dnf(inv, hp.second)) return false;
  for (const StateVector& m : data.minus)
    if (eval_dnf(inv, m)) return false;
  return true;
}

namespace {

struct Move {
  int cube, pred;
  int coord;     // -1 for a constant move
  int64_t delta; // +1 or -1
};

std::vector<Move> legal_moves(const CandidateInvariant& inv, const SearchSpaceParams& p) {
  std::vector<Move> moves;
  for (int ci = 0; ci < p.d; ++ci) {
    for (int pi = 0; pi < p.c; ++pi) {
      const LinearPredicate& pred = inv.cubes[ci].predicates[pi];
      for (int v = 0; v < p.n; ++v) {
        for (int64_t dlt : {int64_t(1), int64_t(-1)}) {
          int64_t w = pred.coeffs[v] + dlt;
          if (w < -p.k || w > p.k) continue;
          if (w == 0) {
            bool zero = true;
            for (int u = 0; u < p.n && zero; ++u)
              if (u != v && pred.coeffs[u] != 0) zero = false;
            if (zero) continue; // zero coefficient vectors are outside X(k)
          }
          moves.push_back({ci, pi, v, dlt});
        }
      }
      for (int64_t dlt : {int64_t(1), int64_t(-1)}) {
        int64_t b = pred.bound + dlt;
        if (b < -p.k_prime || b > p.k_prime) continue;
        moves.push_back({ci, pi, -1, dlt});
      }
    }
  }
  return moves;
}

CandidateInvariant apply_move(CandidateInvariant inv, const Move& m) {
  LinearPredicate& pred = inv.cubes[m.cube].predicates[m.pred];
  if (m.coord < 0)
    pred.bound += m.delta;
  else
    pred.coeffs[m.coord] += m.delta;
  return inv;
}

}  // namespace

std::vector<CandidateInvariant> neighbor_candidates(const CandidateInvariant& inv,
                                                    const SearchSpaceParams& p) {
  std::vector<CandidateInvariant> out;
  for (const Move& m : legal_moves(inv, p)) out.push_back(apply_move(inv, m));
  return out;
}

CandidateInvariant sample_neighbor(const CandidateInvariant& inv, const SearchSpaceParams& p,
                                   Rng& rng) {
  std::vector<Move> moves = legal_moves(inv, p);
  if (moves.empty()) throw std::logic_error("no legal move (requires n >= 1, k >= 1)");
  return apply_move(inv, rng.pick(moves));
}

CandidateInvariant initial_invariant(const Dataset& data, const SearchSpaceParams& p, long l0,
                                     double alpha, double beta, Rng& rng) {
  CandidateInvariant best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (long trial = 0; trial < l0; ++trial) {
    CandidateInvariant cand;
    for (int ci = 0; ci < p.d; ++ci) {
      Cube cube;
      for (int pi = 0; pi < p.c; ++pi) {
        LinearPredicate pred;
        pred.coeffs.resize(static_cast<size_t>(p.n));
        // uniform over nonzero vectors in [-k, k]^n (small-constant heuristic
        // keeps every b at 0)
        do {
          for (int v = 0; v < p.n; ++v) pred.coeffs[v] = rng.uniform_int(-p.k, p.k);
        } while (std::all_of(pred.coeffs.begin(), pred.coeffs.end(),
                             [](int64_t w) { return w == 0; }));
        pred.bound = 0;
        cube.predicates.push_back(std::move(pred));
      }
      cand.cubes.push_back(std::move(cube));
    }
    double c = cost(cand, data, alpha, beta, p.n);
    if (c < best_cost) {
      best_cost = c;
      best = std::move(cand);
    }
  }
  return best;
}

std::vector<TransitionSample> bounded_random_walk(const CandidateInvariant& start, long t_rw,
                                                  const Dataset& data, const SearchSpaceParams& p,
                                                  double alpha, double beta, Rng& rng) {
  std::vector<TransitionSample> samples;
  samples.reserve(static_cast<size_t>(t_rw));
  CandidateInvariant cur = start;
  double cur_cost = cost(cur, data, alpha, beta, p.n);
  for (long t = 0; t < t_rw; ++t) {
    CandidateInvariant next = sample_neighbor(cur, p, rng);
    double next_cost = cost(next, data, alpha, beta, p.n);
    samples.push_back({cur_cost, next_cost});
    cur = std::move(next);
    cur_cost = next_cost;
  }
  return samples;
}

double initial_temperature(const std::vector<TransitionSample>& walk, double a0, double eps_T,
                           std::vector<std::string>* warnings) {
  std::vector<double> gaps; // positive transitions only
  for (const TransitionSample& s : walk)
    if (s.cost_after > s.cost_before) gaps.push_back(s.cost_after - s.cost_before);
  if (gaps.empty()) {
    if (warnings) warnings->push_back("initial_temperature: no positive transitions, using T0=1");
    return 1.0;
  }
  double sum = 0.0;
  for (double g : gaps) sum += g;
  double t = -sum / (std::log(a0) * static_cast<double>(gaps.size()));
  for (int iter = 0; iter < 1000; ++iter) {
    double a = 0.0;
    for (double g : gaps) a += std::exp(-g / t);
    a /= static_cast<double>(gaps.size()); // mean acceptance over the walk
    if (std::abs(a - a0) <= eps_T) return t;
    t *= std::sqrt(std::log(a) / std::log(a0));
  }
  if (warnings) warnings->push_back("initial_temperature: fixed point did not converge in 1000 iterations");
  return t;
}

// kept separate so the acceptance frequency can be validated on its own
bool metropolis_accept(double gap, double temp, Rng& rng) {
  if (gap <= 0.0) return true;
  return rng.uniform01() < std::exp(-gap / temp);
}

SaRun simulated_annealing(const Dataset& data, const CandidateInvariant& start,
                          const SearchSpaceParams& p, double t0, const AnnealConfig& cfg, Rng& rng,
                          const std::atomic<bool>* stop, const TelemetrySink* telemetry,
                          int worker_id) {
  SaRun run;
  CandidateInvariant cur = start;
  double cur_cost = cost(cur, data, cfg.alpha, cfg.beta, p.n);
  if (satisfies_dataset(cur, data)) {
    run.result = cur;
    return run;
  }
  long accepted_window = 0;
  for (long t = 1; t <= cfg.t_max; ++t) {
    run.steps_used = t;
    if (stop && t % cfg.t_check == 0 && stop->load(std::memory_order_relaxed)) return run;
    if (t % 10000 == 0) cur_cost = cost(cur, data, cfg.alpha, cfg.beta, p.n); // drift guard
    double temp = t0 / std::log1p(static_cast<double>(t));
    CandidateInvariant next = sample_neighbor(cur, p, rng);
    double next_cost = cost(next, data, cfg.alpha, cfg.beta, p.n);
    if (next_cost == 0.0 && satisfies_dataset(next, data)) {
      run.result = std::move(next);
      return run;
    }
    if (metropolis_accept(next_cost - cur_cost, temp, rng)) {
      cur = std::move(next);
      cur_cost = next_cost;
      ++accepted_window;
    }
    if (telemetry && t % 1000 == 0) {
      (*telemetry)({worker_id, t, temp, cur_cost,
                    static_cast<double>(accepted_window) / 1000.0});
      accepted_window = 0;
    }
  }
  return run;
}

namespace {

struct WorkerPlan {
  Rng rng;
  SearchSpaceParams params;
};

ParallelResult run_workers(const Dataset& data, const std::optional<CandidateInvariant>& warm,
                           int d, int c, const StateSpace& space, const AnnealConfig& cfg,
                           Rng& rng, const TelemetrySink* telemetry, bool use_openmp) {
  int p = cfg.workers;
  if (static_cast<size_t>(p) != cfg.k_list.size())
    throw std::invalid_argument("workers must equal length of k_list");

  std::vector<WorkerPlan> plans;
  plans.reserve(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i)
    plans.push_back({rng.split(), SearchSpaceParams::make(space, d, c, cfg.k_list[i])});

  std::vector<SaRun> runs(static_cast<size_t>(p));
  std::atomic<bool> stop{false};

  auto worker = [&](int i) {
    WorkerPlan& plan = plans[static_cast<size_t>(i)];
    CandidateInvariant start =
        (warm && valid_candidate(*warm, plan.params))
            ? *warm
            : initial_invariant(data, plan.params, cfg.l0, cfg.alpha, cfg.beta, plan.rng);
    std::vector<TransitionSample> walk =
        bounded_random_walk(start, cfg.t_rw, data, plan.params, cfg.alpha, cfg.beta, plan.rng);
    double t0 = initial_temperature(walk, cfg.a0, cfg.eps_T);
    runs[static_cast<size_t>(i)] = simulated_annealing(data, start, plan.params, t0, cfg, plan.rng,
                                                       &stop, telemetry, i);
    if (runs[static_cast<size_t>(i)].result) stop.store(true, std::memory_order_relaxed);
  };

  if (use_openmp) {
#pragma omp parallel for num_threads(p) schedule(static, 1)
    for (int i = 0; i < p; ++i) worker(i);
  } else {
    for (int i = 0; i < p; ++i) worker(i);
  }

  ParallelResult res;
  for (int i = 0; i < p; ++i) {
    res.steps_used += runs[static_cast<size_t>(i)].steps_used;
    if (!res.success && runs[static_cast<size_t>(i)].result) {
      res.success = true;
      res.invariant = runs[static_cast<size_t>(i)].result;
      res.worker = i;
      res.k = cfg.k_list[static_cast<size_t>(i)];
    }
  }
  return res;
}

}  // namespace

ParallelResult parallel_sa(const Dataset& data, const std::optional<CandidateInvariant>& warm,
                           int d, int c, const StateSpace& space, const AnnealConfig& cfg, Rng& rng,
                           const TelemetrySink* telemetry) {
  return run_workers(data, warm, d, c, space, cfg, rng, telemetry, true);
}

ParallelResult parallel_sa_serial(const Dataset& data,
                                  const std::optional<CandidateInvariant>& warm, int d, int c,
                                  const StateSpace& space, const AnnealConfig& cfg, Rng& rng,
                                  const TelemetrySink* telemetry) {
  return run_workers(data, warm, d, c, space, cfg, rng, telemetry, false);
}

}  // namespace invsyn::sa
