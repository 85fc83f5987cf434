#pragma once

// Monte Carlo trials of a permutation code over the SISO rateless channel.
// Trial t draws its fading gain from TrialRng(seed, kChannel, t) (the same
// stream channel_sim uses), its message from kMessage and its L noise
// samples from kNoise. Draws do not depend on the SNR, so results across an
// SNR grid, and across codes, use common random numbers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rateless/code_search.hpp"
#include "rateless/permutation_code.hpp"

namespace rateless {

/// Raw counters from one SNR point. errors[l-1] counts wrong decodes after
/// stopping at l; outage trials are counted in errors[L-1] as well.
struct CodeTrialCounts {
  std::vector<std::uint64_t> stop_hist;  // [0..L-1] stop at l, [L] outage
  std::vector<std::uint64_t> errors;     // size L
  std::uint64_t trials = 0;

  friend bool operator==(const CodeTrialCounts&, const CodeTrialCounts&) = default;
};

struct ErrorDecomposition {
  std::vector<double> joint_err;        // Pr(error, stop at l), l = 1..L
  std::vector<double> joint_err_stderr;
  double p_e = 0.0;
  double p_e_stderr = 0.0;
  std::vector<std::uint64_t> stop_hist;  // stop at 1..L, then outage
  double cond_err_nonoutage = 0.0;       // Pr(error | not outage)
  double cond_err_stderr = 0.0;
  double early_minus_final = 0.0;        // sum_{l<L} joint_err[l] - joint_err[L]
  double early_minus_final_stderr = 0.0;
};

struct CodeTrialResult {
  double R = 0.0;
  SnrPoint eta;
  CodeTrialCounts counts;
  ErrorDecomposition errors;
  OutageProfile profile;
  EffectiveRate rate;
};

std::vector<CodeTrialCounts> code_trial_counts_serial(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                      std::uint64_t trials, std::uint64_t seed);
std::vector<CodeTrialCounts> code_trial_counts_omp(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                   std::uint64_t trials, std::uint64_t seed);

ErrorDecomposition decompose(const CodeTrialCounts& counts);

/// `R`, if given, must equal bits / L (T = 1).
CodeTrialResult run_rateless_code_trials(const PermutationCode& code, SnrPoint eta, std::uint64_t trials,
                                         std::uint64_t seed, std::optional<double> R = {});
std::vector<CodeTrialResult> run_rateless_code_trials(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                      std::uint64_t trials, std::uint64_t seed);

/// Paired error comparison of two codes of equal L and bits under common
/// random numbers.
struct PairedComparison {
  double p_e_a = 0.0;
  double p_e_b = 0.0;
  double diff = 0.0;  // p_e_a - p_e_b
  double diff_stderr = 0.0;
  std::uint64_t only_a = 0;
  std::uint64_t only_b = 0;
  std::uint64_t both = 0;
  std::uint64_t trials = 0;
};

PairedComparison paired_code_comparison(const PermutationCode& a, const PermutationCode& b, SnrPoint eta,
                                        std::uint64_t trials, std::uint64_t seed);

/// Conditional error given (stop at l, no outage) per prefix and SNR, plus a
/// fitted decay exponent of the pooled non-outage error.
UniversalityEvidence universality_margin(const PermutationCode& code, std::span<const SnrPoint> eta_grid,
                                         std::uint64_t trials, std::uint64_t seed, std::uint64_t min_samples = 100);

/// Rows `eta_db,l,joint_err,stderr,p_e,cond_err_nonoutage,seed`, l = 1..L.
void write_code_trials_csv(std::ostream& out, std::span<const CodeTrialResult> results, std::uint64_t seed,
                           std::span<const std::string> preamble = {});

}  // namespace rateless
