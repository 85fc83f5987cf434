#pragma once

// Monte Carlo stop-block histograms for the rateless protocol. Each kernel
// has a serial reference and an OpenMP version; both draw trial t's channel
// from TrialRng(seed, kChannel, t), so every SNR point sees the same fading
// realisations and the two versions agree bit for bit.

#include <cstdint>
#include <span>
#include <vector>

#include "rateless/channel.hpp"

namespace rateless {

struct SnrRate {
  SnrPoint eta;
  double R;
};

std::vector<StopHistogram> stop_histograms_serial(const RatelessConfig& cfg, std::span<const SnrRate> points,
                                                  std::uint64_t trials, std::uint64_t seed);

std::vector<StopHistogram> stop_histograms_omp(const RatelessConfig& cfg, std::span<const SnrRate> points,
                                               std::uint64_t trials, std::uint64_t seed);

/// p_hat[l] for l = 0..L at one SNR, one channel draw per trial shared by all l.
OutageProfile estimate_outage_profile(const RatelessConfig& cfg, SnrPoint eta, double R, std::uint64_t trials,
                                      std::uint64_t seed);

}  // namespace rateless
