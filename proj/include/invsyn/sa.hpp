#pragma once

#include <atomic>
#include <functional>
#include <optional>

#include "invsyn/core.hpp"
#include "invsyn/rng.hpp"

namespace invsyn::sa {

struct SearchSpaceParams {
  int n = 1, c = 1, d = 1;
  int64_t k = 1;
  int64_t k_prime = 1; // floor(k * sqrt(n) * rho) = k * n * (int_bound + 1) exactly

  static SearchSpaceParams make(const StateSpace& space, int d, int c, int64_t k) {
    SearchSpaceParams p;
    p.n = space.dim;
    p.c = c;
    p.d = d;
    p.k = k;
    p.k_prime = k * space.dim * (space.int_bound + 1);
    return p;
  }
};

// a point of X(k): exactly d cubes of exactly c predicates, nonzero
// coefficient vectors with inf-norm <= k, |constants| <= k_prime
using CandidateInvariant = DnfFormula;

bool valid_candidate(const CandidateInvariant& inv, const SearchSpaceParams& p);

struct AnnealConfig {
  long t_max = 200000;
  long t_check = 1000;
  double a0 = 0.35;
  double eps_T = 0.01;
  long t_rw = 500;
  long l0 = 32;
  double alpha = 50.0;
  double beta = 2.0;
  int workers = 4;
  std::vector<int64_t> k_list{1, 2, 3, 5};
};

struct TransitionSample {
  double cost_before = 0.0;
  double cost_after = 0.0;
};

// min over cubes of the average normalized hyperplane violation
// (1/|cube|) * sum_i (w_i.s - b_i)^+ / ||w_i||_2; +inf for the empty DNF
double delta_approx(const DnfFormula& inv, const StateVector& s);

double normalizer(double x, double alpha, double beta);

// (1/3) * (plus avg + implication avg of min(delta(~I,h), delta(I,t)) + minus
// avg); empty classes contribute 0; ~I computed once per call
double cost(const CandidateInvariant& inv, const Dataset& data, double alpha, double beta, int dim);

// OpenMP variant of the same kernel; serial cost() is the reference
double cost_parallel(const CandidateInvariant& inv, const Dataset& data, double alpha, double beta,
                     int dim);

// exact integer satisfaction of all three approximate clauses
bool satisfies_dataset(const CandidateInvariant& inv, const Dataset& data);

// every legal single-predicate move (coefficient +-1 on one coordinate or
// constant +-1); size <= cd(2n+2)
std::vector<CandidateInvariant> neighbor_candidates(const CandidateInvariant& inv,
                                                    const SearchSpaceParams& p);

CandidateInvariant sample_neighbor(const CandidateInvariant& inv, const SearchSpaceParams& p,
                                   Rng& rng);

CandidateInvariant initial_invariant(const Dataset& data, const SearchSpaceParams& p, long l0,
                                     double alpha, double beta, Rng& rng);

std::vector<TransitionSample> bounded_random_walk(const CandidateInvariant& start, long t_rw,
                                                  const Dataset& data, const SearchSpaceParams& p,
                                                  double alpha, double beta, Rng& rng);

double initial_temperature(const std::vector<TransitionSample>& walk, double a0, double eps_T,
                           std::vector<std::string>* warnings = nullptr);

// Metropolis rule: accept with probability e^{-gap/temp}, always when gap <= 0
bool metropolis_accept(double gap, double temp, Rng& rng);

struct TelemetryRecord {
  int worker = 0;
  long t = 0;
  double temperature = 0.0;
  double cost = 0.0;
  double accept_rate_window = 0.0;
};
using TelemetrySink = std::function<void(const TelemetryRecord&)>;

struct SaRun {
  std::optional<CandidateInvariant> result;
  long steps_used = 0;
};

SaRun simulated_annealing(const Dataset& data, const CandidateInvariant& start,
                          const SearchSpaceParams& p, double t0, const AnnealConfig& cfg, Rng& rng,
                          const std::atomic<bool>* stop = nullptr,
                          const TelemetrySink* telemetry = nullptr, int worker_id = 0);

struct ParallelResult {
  bool success = false;
  std::optional<CandidateInvariant> invariant;
  int worker = -1;
  int64_t k = 0;
  long steps_used = 0;
};

// one worker per k in cfg.k_list; warm start reused when it is valid in that
// worker's X(k), otherwise the worker builds its own initial invariant
ParallelResult parallel_sa(const Dataset& data, const std::optional<CandidateInvariant>& warm,
                           int d, int c, const StateSpace& space, const AnnealConfig& cfg, Rng& rng,
                           const TelemetrySink* telemetry = nullptr);

// serial reference: workers run one after another in index order
ParallelResult parallel_sa_serial(const Dataset& data,
                                  const std::optional<CandidateInvariant>& warm, int d, int c,
                                  const StateSpace& space, const AnnealConfig& cfg, Rng& rng,
                                  const TelemetrySink* telemetry = nullptr);

}  // namespace invsyn::sa
