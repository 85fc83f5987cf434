// Serial reference kernels against their OpenMP versions: wall time and
// whether the outputs agree exactly.
//
//   bench_kernels [trials] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

#include "rateless/code_search.hpp"
#include "rateless/code_trials.hpp"
#include "rateless/outage_kernels.hpp"

using namespace rateless;

template <typename F>
double time_it(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s serial %8.3f s   omp %8.3f s   speedup %5.2fx   %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

int main(int argc, char** argv) {
  const std::uint64_t trials = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1'000'000;
  if (argc > 2) omp_set_num_threads(std::atoi(argv[2]));
  std::printf("trials %llu, omp threads %d, cores %d\n", static_cast<unsigned long long>(trials),
              omp_get_max_threads(), omp_get_num_procs());

  const std::uint64_t seed = 42;
  bool all_same = true;

  for (const auto& [M, N] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {4, 4}}) {
    const RatelessConfig cfg(AntennaConfig(M, N), 4);
    std::vector<SnrRate> points;
    for (double db : {10.0, 20.0, 30.0}) {
      const SnrPoint eta = SnrPoint::from_db(db);
      points.push_back({eta, 0.5 * eta.log2()});
    }
    const std::uint64_t n = M == 1 ? trials : trials / (M * N);
    std::vector<StopHistogram> a, b;
    const double ts = time_it([&] { a = stop_histograms_serial(cfg, points, n, seed); });
    const double tp = time_it([&] { b = stop_histograms_omp(cfg, points, n, seed); });
    const std::string name = "outage " + std::to_string(M) + "x" + std::to_string(N) + " L=4";
    report(name.c_str(), ts, tp, a == b);
    all_same = all_same && a == b;
  }

  for (const auto& [L, bits] : std::vector<std::pair<int, int>>{{2, 2}, {3, 4}}) {
    const PermutationCode code = search_permutation_code(L, bits).code;
    std::vector<SnrPoint> etas;
    for (double db : {10.0, 20.0, 30.0}) etas.push_back(SnrPoint::from_db(db));
    const std::uint64_t n = trials / (std::uint64_t{1} << bits);
    std::vector<CodeTrialCounts> a, b;
    const double ts = time_it([&] { a = code_trial_counts_serial(code, etas, n, seed); });
    const double tp = time_it([&] { b = code_trial_counts_omp(code, etas, n, seed); });
    const std::string name = "code trials L=" + std::to_string(L) + " bits=" + std::to_string(bits);
    report(name.c_str(), ts, tp, a == b);
    all_same = all_same && a == b;
  }
  return all_same ? 0 : 1;
}
