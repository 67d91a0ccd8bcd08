// Benchmark of the OpenMP trial and counting kernels against their serial
// reference implementations. Also verifies that both paths produce identical
// results, which is the determinism contract the harness relies on.

#include <chrono>
#include <cstdio>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "csbm/harness.hpp"

using namespace csbm;

namespace {

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP benchmark for the Monte Carlo kernels"};
  int points = 4;
  int trials = 50;
  std::uint32_t n = 12;
  int threads = 0;
  std::uint64_t seed = 20240101;
  app.add_option("--points", points, "sweep grid points");
  app.add_option("--trials", trials, "trials per point");
  app.add_option("--n", n, "vertex count");
  app.add_option("--threads", threads, "threads for the parallel run (default: hardware)");
  app.add_option("--seed", seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 2 : static_cast<int>(hw);
  }

  SweepSpec sweep;
  sweep.axis = Axis::S;
  sweep.grid.clear();
  for (int i = 0; i < points; ++i) {
    sweep.grid.push_back(0.4 + 0.5 * i / std::max(points - 1, 1));
  }
  sweep.trials_per_point = trials;
  sweep.base.params = {n, 2, 0.6, 0.15, LabelMode::UniformRandom};
  sweep.base.matcher = MatcherKind::BranchAndBound;
  sweep.base.seed = seed;

  std::printf("sweep kernel: %d points x %d trials at n=%u\n", points, trials, n);
  auto t0 = std::chrono::steady_clock::now();
  const SweepResult serial = run_sweep_serial(sweep);
  const double serial_s = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const SweepResult parallel = run_sweep(sweep, threads);
  const double parallel_s = seconds(t0);

  const bool identical = sweep_csv_stable(serial) == sweep_csv_stable(parallel);
  std::printf("  serial   %8.3f s\n", serial_s);
  std::printf("  openmp   %8.3f s  (%d threads, speedup %.2fx)\n", parallel_s, threads,
              parallel_s > 0 ? serial_s / parallel_s : 0.0);
  std::printf("  results  %s\n", identical ? "identical" : "MISMATCH");

  SbmParams iso{60, 2, 0.12, 0.04, LabelMode::FixedBalanced};
  const std::uint64_t iso_trials = 4000;
  std::printf("isolation kernel: %llu trials at n=%u\n",
              static_cast<unsigned long long>(iso_trials), iso.n);
  t0 = std::chrono::steady_clock::now();
  const MomentCheckReport iso_serial = moment_check_serial(iso, 0.7, iso_trials, seed);
  const double iso_serial_s = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const MomentCheckReport iso_parallel = moment_check(iso, 0.7, iso_trials, seed, threads);
  const double iso_parallel_s = seconds(t0);
  const bool iso_identical = iso_serial.empirical_mean == iso_parallel.empirical_mean &&
                             iso_serial.empirical_variance == iso_parallel.empirical_variance;
  std::printf("  serial   %8.3f s\n", iso_serial_s);
  std::printf("  openmp   %8.3f s  (speedup %.2fx)\n", iso_parallel_s,
              iso_parallel_s > 0 ? iso_serial_s / iso_parallel_s : 0.0);
  std::printf("  results  %s\n", iso_identical ? "identical" : "MISMATCH");

  return identical && iso_identical ? 0 : 1;
}
