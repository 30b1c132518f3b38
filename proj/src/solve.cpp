#include "invsyn/solve.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace invsyn::solve {

const char* status_name(Status s) {
  switch (s) {
    case Status::Invariant: return "Invariant";
    case Status::SaFail: return "SaFail";
    case Status::Exhausted: return "Exhausted";
    case Status::SolverError: return "SolverError";
  }
  return "?";
}

Dataset merge_cex(const Dataset& data, const smt::CexDataset& cex) {
  Dataset out = data;
  out.plus.insert(cex.plus_cex.begin(), cex.plus_cex.end());
  out.minus.insert(cex.minus_cex.begin(), cex.minus_cex.end());
  out.implications.insert(cex.ice_cex.begin(), cex.ice_cex.end());
  return out;
}

SolveOutcome solve(const ChcSystem& sys, const SolveConfig& cfg, smt::SmtSolver& solver,
                   const sa::TelemetrySink* telemetry) {
  using clock = std::chrono::steady_clock;
  SolveOutcome out;
  Rng rng(cfg.seed);

  Dataset data;
  try {
    data = sampling::initial_dataset(sys, cfg.eps0, cfg.delta0, rng, &out.warnings);
  } catch (const std::exception& e) {
    out.status = Status::SolverError;
    out.error = std::string("dataset construction failed: ") + e.what();
    return out;
  }

  sampling::Rat64 eps = cfg.eps0;
  std::optional<sa::CandidateInvariant> warm;

  for (long t = 1; t <= cfg.ds_t_max; ++t) {
    auto started = clock::now();
    out.iterations = t;
    IterationRecord rec;
    rec.t = t;
    rec.eps = eps;
    rec.plus = data.plus.size();
    rec.minus = data.minus.size();
    rec.implications = data.implications.size();
    DatasetStats stats = dataset_stats(data);
    rec.kappa_inf = stats.kappa_inf;
    rec.lambda_arrow = stats.lambda_arrow;

    sa::ParallelResult sa_res =
        cfg.serial_workers
            ? sa::parallel_sa_serial(data, warm, cfg.d, cfg.c, sys.space, cfg.anneal, rng, telemetry)
            : sa::parallel_sa(data, warm, cfg.d, cfg.c, sys.space, cfg.anneal, rng, telemetry);
    rec.sa_steps = sa_res.steps_used;
    rec.sa_worker = sa_res.worker;
    if (!sa_res.success) {
      rec.seconds = std::chrono::duration<double>(clock::now() - started).count();
      out.trace.push_back(rec);
      out.status = Status::SaFail;
      return out;
    }
    sa::CandidateInvariant inv = *sa_res.invariant;

    bool correct;
    smt::CexDataset cex;
    try {
      std::tie(correct, cex) = smt::verifier(inv, sys, cfg.verify, solver, rng);
    } catch (const smt::SolverError& e) {
      rec.seconds = std::chrono::duration<double>(clock::now() - started).count();
      out.trace.push_back(rec);
      out.status = Status::SolverError;
      out.error = e.what();
      return out;
    }
    rec.cex_plus = cex.plus_cex.size();
    rec.cex_ice = cex.ice_cex.size();
    rec.cex_minus = cex.minus_cex.size();
    rec.seconds = std::chrono::duration<double>(clock::now() - started).count();
    out.trace.push_back(rec);

    if (correct) {
      out.status = Status::Invariant;
      out.invariant = inv;
      return out;
    }

    data = merge_cex(data, cex);
    if (sampling::refine_criterion(t, cfg.t_refine)) {
      try {
        std::tie(data, eps) = sampling::refined_dataset(sys, eps, cfg.delta0, data, rng, &out.warnings);
      } catch (const std::exception& e) {
        out.status = Status::SolverError;
        out.error = std::string("dataset refinement failed: ") + e.what();
        return out;
      }
    }
    warm = std::move(inv);
  }
  out.status = Status::Exhausted;
  return out;
}

namespace {

// box-volume overestimate of the lattice count of a DNF region
double lambda_hat(const DnfFormula& f, const StateSpace& space) {
  double total = 0.0;
  for (const Cube& c : f.cubes)
    if (auto box = sampling::bounding_box(c, space)) total += box->cardinality();
  return total;
}

}  // namespace

double iteration_ceiling(const ChcSystem& sys, const SolveConfig& cfg) {
  double n = static_cast<double>(sys.space.dim);
  double C = cfg.diag_C;
  double max_lambda = std::max(
      {lambda_hat(sys.pre, sys.space), lambda_hat(sys.guard, sys.space),
       lambda_hat(negate_dnf(sys.post, sys.space.dim), sys.space)});
  double factor = (1.0 + C / std::pow(n, 2.0 - 2.0 / (n + 1.0))) / (1.0 - C);
  double inner = cfg.eps0.value() * std::pow(n, n) * factor * max_lambda;
  if (inner <= 1.0) return 0.0;
  return static_cast<double>(cfg.t_refine) * std::log2(inner);
}

std::string diagnostics_report(const SolveOutcome& outcome, const ChcSystem& sys,
                               const SolveConfig& cfg) {
  std::ostringstream out;
  out << "iteration  eps        |+|   |->|  |-|   cex(+/->/-)  kappa_inf  lambda    sa_steps  sec\n";
  for (const IterationRecord& r : outcome.trace) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "%-9ld  %-9.6f  %-4zu  %-4zu  %-4zu  %zu/%zu/%zu      %-9.3f  %-8.3f  %-8ld  %.2f\n",
                  r.t, r.eps.value(), r.plus, r.implications, r.minus, r.cex_plus, r.cex_ice,
                  r.cex_minus, r.kappa_inf, r.lambda_arrow, r.sa_steps, r.seconds);
    out << line;
  }
  out << "schedule-derived iteration ceiling (NON-BINDING diagnostic, C=" << cfg.diag_C
      << "): " << iteration_ceiling(sys, cfg) << "\n";
  return out.str();
}

}  // namespace invsyn::solve
