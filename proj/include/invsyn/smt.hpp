#pragma once

#include <string>

#include "invsyn/core.hpp"
#include <memory>

#include "invsyn/rng.hpp"

namespace invsyn::smt {

enum class ClauseKind { Fact, Inductive, Query };

struct CexDataset {
  std::set<StateVector> plus_cex;  // P and not I
  std::set<StatePair> ice_cex;     // I(h), B(h), T(h,t), not I(t)
  std::set<StateVector> minus_cex; // I and not Q

  bool empty() const { return plus_cex.empty() && ice_cex.empty() && minus_cex.empty(); }
};

struct VerifierConfig {
  int cex_max = 5;
  int64_t d0 = 5; // L1 dispersion radius between counterexamples
  int k0 = 3;     // iterated implication pair depth
  int solver_timeout_ms = 120000;
  double oracle_limit = 2e7;
  std::string mirror_dir; // when set, every emitted script is written here
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::string path;
  std::vector<std::string> args;
  bool fresh_per_query = true; // else one process with (reset) between queries
  int timeout_ms = 120000;
  std::string mirror_dir;
};

// child process speaking SMT-LIB 2 over stdin/stdout
class SmtSolver {
public:
  explicit SmtSolver(SolverConfig cfg);
  ~SmtSolver();
  SmtSolver(const SmtSolver&) = delete;
  SmtSolver& operator=(const SmtSolver&) = delete;

  // sends the script plus (check-sat); on sat fills values for the requested
  // symbols via (get-value ...)
  bool check_sat(const std::string& script, const std::vector<std::string>& symbols,
                 std::vector<int64_t>* values);

private:
  struct Process;
  void ensure_process();
  void shutdown();

  SolverConfig cfg_;
  std::unique_ptr<Process> proc_;
  long query_count_ = 0;
};

// quantifier-free refutation script: box bounds + clause body + negated head;
// unsat means the clause is valid
std::string encode_clause(ClauseKind kind, const DnfFormula& inv, const ChcSystem& sys);

struct ClauseCex {
  std::vector<StateVector> states; // fact/query models
  std::vector<StatePair> pairs;    // inductive models
};

// up to cfg.cex_max models, each forced to L1 distance >= d0 from the earlier
// ones (heads only for the inductive clause)
std::pair<bool, ClauseCex> chc_verify_clause(ClauseKind kind, const DnfFormula& inv,
                                             const ChcSystem& sys, const VerifierConfig& cfg,
                                             SmtSolver& solver);

std::vector<StatePair> iterated_implication_pairs(const TransitionRelation& trans,
                                                  const StateSpace& space, const DnfFormula& guard,
                                                  const std::vector<StatePair>& ice, int k0,
                                                  Rng& rng);

std::pair<bool, CexDataset> verifier(const DnfFormula& inv, const ChcSystem& sys,
                                     const VerifierConfig& cfg, SmtSolver& solver, Rng& rng);

// exhaustive bounded-box oracle; complete (non-dispersed) counterexamples
std::pair<bool, CexDataset> brute_force_verify(const DnfFormula& inv, const ChcSystem& sys,
                                               const VerifierConfig& cfg);

}  // namespace invsyn::smt
