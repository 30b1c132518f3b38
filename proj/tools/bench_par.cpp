// compares the serial reference kernels against the OpenMP ones on a synthetic
// workload and prints a small CSV: kernel,variant,threads,seconds,checksum

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "invsyn/rng.hpp"
#include "invsyn/sa.hpp"

using namespace invsyn;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

Dataset synthetic_dataset(const StateSpace& space, size_t per_class, Rng& rng) {
  Dataset d;
  auto draw = [&] {
    StateVector s(space.dim);
    for (int i = 0; i < space.dim; ++i) s[i] = rng.uniform_int(space.lo(), space.hi());
    return s;
  };
  while (d.plus.size() < per_class) d.plus.insert(draw());
  while (d.minus.size() < per_class) d.minus.insert(draw());
  while (d.implications.size() < per_class) d.implications.insert({draw(), draw()});
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  size_t per_class = 2000;
  int dim = 4;
  uint64_t seed = 7;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    auto next = [&] { return std::stoll(argv[++i]); };
    if (a == "--reps" && i + 1 < argc) reps = static_cast<int>(next());
    else if (a == "--points" && i + 1 < argc) per_class = static_cast<size_t>(next());
    else if (a == "--dim" && i + 1 < argc) dim = static_cast<int>(next());
    else if (a == "--seed" && i + 1 < argc) seed = static_cast<uint64_t>(next());
    else {
      std::fprintf(stderr, "usage: %s [--reps N] [--points N] [--dim N] [--seed N]\n", argv[0]);
      return 1;
    }
  }

  StateSpace space{dim, 100};
  Rng rng(seed);
  Dataset data = synthetic_dataset(space, per_class, rng);

  sa::SearchSpaceParams params = sa::SearchSpaceParams::make(space, 2, 3, 5);
  sa::AnnealConfig base_cfg;
  sa::CandidateInvariant cand =
      sa::initial_invariant(data, params, base_cfg.l0, base_cfg.alpha, base_cfg.beta, rng);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif

  std::printf("kernel,variant,threads,seconds,checksum\n");

  for (int variant = 0; variant < 2; ++variant) {
    sa::AnnealConfig cfg;
    double checksum = 0.0;
    double t0 = now_seconds();
    for (int r = 0; r < reps; ++r)
      checksum += variant == 0 ? sa::cost(cand, data, cfg.alpha, cfg.beta, space.dim)
                               : sa::cost_parallel(cand, data, cfg.alpha, cfg.beta, space.dim);
    double secs = now_seconds() - t0;
    std::printf("cost,%s,%d,%.6f,%.9f\n", variant == 0 ? "serial" : "openmp",
                variant == 0 ? 1 : threads, secs, checksum);
  }

  // full annealing run, serial worker loop vs OpenMP worker loop
  sa::AnnealConfig cfg;
  cfg.t_max = 20000;
  for (int variant = 0; variant < 2; ++variant) {
    Rng run_rng(seed + 1);
    double t0 = now_seconds();
    sa::ParallelResult res =
        variant == 0
            ? sa::parallel_sa_serial(data, std::nullopt, 2, 3, space, cfg, run_rng, nullptr)
            : sa::parallel_sa(data, std::nullopt, 2, 3, space, cfg, run_rng, nullptr);
    double secs = now_seconds() - t0;
    std::printf("parallel_sa,%s,%d,%.6f,%ld\n", variant == 0 ? "serial" : "openmp",
                variant == 0 ? 1 : threads, secs, res.steps_used);
  }
  return 0;
}
