#pragma once

#include "invsyn/core.hpp"
#include "invsyn/sa.hpp"
#include "invsyn/sampling.hpp"
#include "invsyn/smt.hpp"

namespace invsyn::solve {

struct SolveConfig {
  int d = 1;
  int c = 2;
  sampling::Rat64 eps0{1, 2};
  sampling::Rat64 delta0{9, 10};
  long t_refine = 3;
  long ds_t_max = 50;
  sa::AnnealConfig anneal;
  smt::VerifierConfig verify;
  uint64_t seed = 0;
  double diag_C = 0.5;        // non-constructive bound constant, diagnostics only
  bool serial_workers = false;
};

enum class Status { Invariant, SaFail, Exhausted, SolverError };

const char* status_name(Status s);

struct IterationRecord {
  long t = 0;
  sampling::Rat64 eps;
  size_t plus = 0, minus = 0, implications = 0;
  size_t cex_plus = 0, cex_ice = 0, cex_minus = 0;
  double kappa_inf = 0.0, lambda_arrow = 0.0;
  long sa_steps = 0;
  int sa_worker = -1;
  double seconds = 0.0;
};

struct SolveOutcome {
  Status status = Status::Exhausted;
  std::optional<DnfFormula> invariant;
  long iterations = 0;
  std::vector<IterationRecord> trace;
  std::vector<std::string> warnings;
  std::string error;
};

SolveOutcome solve(const ChcSystem& sys, const SolveConfig& cfg, smt::SmtSolver& solver,
                   const sa::TelemetrySink* telemetry = nullptr);

// set union per class
Dataset merge_cex(const Dataset& data, const smt::CexDataset& cex);

// schedule-derived iteration ceiling; NON-BINDING, reported for diagnostics
double iteration_ceiling(const ChcSystem& sys, const SolveConfig& cfg);

std::string diagnostics_report(const SolveOutcome& outcome, const ChcSystem& sys,
                               const SolveConfig& cfg);

}  // namespace invsyn::solve
