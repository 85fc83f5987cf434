#include "rateless/outage_kernels.hpp"

#include <omp.h>

namespace rateless {

namespace {

void check_args(std::span<const SnrRate> points, std::uint64_t trials) {
  if (trials < 1) throw UsageError("trials must be >= 1");
  if (points.empty()) throw UsageError("SNR grid must be nonempty");
  for (const auto& p : points) {
    if (!(p.R >= 0.0)) throw DomainError("rate must be nonnegative");
  }
}

std::vector<StopHistogram> empty_histograms(int L, std::size_t n) {
  return std::vector<StopHistogram>(n, StopHistogram{std::vector<std::uint64_t>(L + 1, 0)});
}

void run_trial(const RatelessConfig& cfg, std::span<const SnrRate> points, std::uint64_t t, std::uint64_t seed,
               std::vector<StopHistogram>& hists) {
  TrialRng rng(seed, StreamTag::kChannel, t);
  const ChannelRealization h = sample_channel(cfg.antennas, rng);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double info = block_mutual_info(h, points[i].eta, cfg.antennas.M);
    const StopOutcome stop = rateless_stop(info, points[i].R, cfg.L);
    ++hists[i].counts[stop.outage() ? cfg.L : stop.block - 1];
  }
}

}  // namespace

std::vector<StopHistogram> stop_histograms_serial(const RatelessConfig& cfg, std::span<const SnrRate> points,
                                                  std::uint64_t trials, std::uint64_t seed) {
  check_args(points, trials);
  auto hists = empty_histograms(cfg.L, points.size());
  for (std::uint64_t t = 0; t < trials; ++t) run_trial(cfg, points, t, seed, hists);
  return hists;
}

std::vector<StopHistogram> stop_histograms_omp(const RatelessConfig& cfg, std::span<const SnrRate> points,
                                               std::uint64_t trials, std::uint64_t seed) {
  check_args(points, trials);
  auto hists = empty_histograms(cfg.L, points.size());
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    auto local = empty_histograms(cfg.L, points.size());
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) run_trial(cfg, points, static_cast<std::uint64_t>(t), seed, local);
#pragma omp critical(rateless_stop_merge)
    for (std::size_t i = 0; i < hists.size(); ++i) {
      for (std::size_t k = 0; k < hists[i].counts.size(); ++k) hists[i].counts[k] += local[i].counts[k];
    }
  }
  return hists;
}

OutageProfile estimate_outage_profile(const RatelessConfig& cfg, SnrPoint eta, double R, std::uint64_t trials,
                                      std::uint64_t seed) {
  const SnrRate point{eta, R};
  const auto hists = stop_histograms_omp(cfg, std::span<const SnrRate>(&point, 1), trials, seed);
  return profile_from_histogram(hists.front());
}

}  // namespace rateless
