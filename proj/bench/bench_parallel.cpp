// Compares the serial reference implementations against the OpenMP
// kernels: the path-enumeration information oracle and the Monte Carlo
// replicate loop. Also verifies that parallel and serial results match
// bit for bit, since that is the contract the tests rely on.

#include <chrono>
#include <vector>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "larfi/exact_fisher.hpp"
#include "larfi/montecarlo.hpp"

using namespace larfi;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

void bench_bruteforce() {
  ModelSpec spec{2, 0};
  ParamVector theta = ParamVector::lar((Vector(3) << 0.1, 0.4, -0.3).finished());
  LagState init{1, 2};
  std::printf("path-enumeration information (p=2)\n");
  std::printf("%6s %12s %12s %9s %12s\n", "T", "serial (s)", "parallel (s)", "speedup",
              "bit-equal");
  for (int T : {18, 20, 22, 24}) {
    auto t0 = clock_type::now();
    FisherMatrix serial = ex_fi_bruteforce_serial(theta, spec, init, T);
    double ts = seconds_since(t0);
    t0 = clock_type::now();
    FisherMatrix parallel = ex_fi_bruteforce(theta, spec, init, T);
    double tp = seconds_since(t0);
    bool equal = (serial - parallel).cwiseAbs().maxCoeff() == 0.0;
    std::printf("%6d %12.4f %12.4f %8.2fx %12s\n", T, ts, tp, ts / tp, equal ? "yes" : "NO");
  }
}

void bench_replicates() {
  ScenarioConfig cfg;
  cfg.spec = ModelSpec{1, 0};
  cfg.theta_true = (Vector(2) << 0.1, 0.5).finished();
  cfg.theta_null = (Vector(2) << 0.1, 0.0).finished();
  cfg.T = 200;
  cfg.replicates = 4000;
  std::printf("\nsimulation replicates (T=200, %d replicates)\n", cfg.replicates);
#ifdef _OPENMP
  int max_threads = omp_get_max_threads();
  double t1 = 0.0;
  std::vector<int> counts{1};
  if (max_threads > 1) counts.push_back(max_threads);
  for (int threads : counts) {
    omp_set_num_threads(threads);
    auto t0 = clock_type::now();
    McSummary s = run_scenario(cfg);
    double dt = seconds_since(t0);
    if (threads == 1) t1 = dt;
    std::printf("%3d thread(s): %7.3f s  (speedup %5.2fx, obs sd %.6f)\n", threads, dt, t1 / dt,
                s.observed_sd);
  }
  omp_set_num_threads(max_threads);
#else
  auto t0 = clock_type::now();
  McSummary s = run_scenario(cfg);
  std::printf("serial build: %7.3f s (obs sd %.6f)\n", seconds_since(t0), s.observed_sd);
#endif
}

}  // namespace

int main() {
  bench_bruteforce();
  bench_replicates();
  return 0;
}
