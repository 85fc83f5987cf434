#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rateless/channel.hpp"
#include "rateless/outage_kernels.hpp"

namespace rateless {

/// Either a per-level multiplexing gain (R = r_n log2 eta at each SNR) or a
/// fixed rate in bits per channel use.
struct RateTarget {
  std::optional<double> r_n;
  std::optional<double> R;

  static RateTarget per_level(double r_n) { return {r_n, std::nullopt}; }
  static RateTarget fixed(double R) { return {std::nullopt, R}; }
  double rate_at(SnrPoint eta) const;
};

struct ExperimentRecord {
  SnrPoint eta;
  double R;
  StopHistogram stops;
  OutageProfile profile;
  EffectiveRate rate;
  double r_bar_stderr;
};

std::vector<ExperimentRecord> run_rateless_experiment(const RatelessConfig& cfg, RateTarget rate,
                                                      std::span<const SnrPoint> eta_grid, std::uint64_t trials,
                                                      std::uint64_t seed);

/// Rows `eta_db,l,p_hat,stderr,trials,r_bar,r_hat,seed`, one per (SNR, l),
/// l = 0..L. Lines in `preamble` are written first, each prefixed by "# ".
void write_results_csv(std::ostream& out, std::span<const ExperimentRecord> records, std::uint64_t seed,
                       std::span<const std::string> preamble = {});

}  // namespace rateless
