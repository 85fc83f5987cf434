#pragma once

// Rayleigh block-fading channel, per-block mutual information, the rateless
// stopping rule and the estimators built on top of them.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rateless/dmt.hpp"
#include "rateless/rng.hpp"

namespace rateless {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Average SNR per receive antenna.
class SnrPoint {
 public:
  static SnrPoint from_db(double db);
  static SnrPoint from_linear(double linear);

  double linear() const { return linear_; }
  double db() const { return db_; }
  double log2() const;

 private:
  SnrPoint(double linear, double db) : linear_(linear), db_(db) {}
  double linear_;
  double db_;
};

struct ChannelRealization {
  Eigen::MatrixXcd H;  // N x M, i.i.d. CN(0, 1)
};

ChannelRealization sample_channel(const AntennaConfig& cfg, TrialRng& rng);

/// log2 det(I_N + (eta / M) H H^*), in bits per channel use.
double block_mutual_info(const ChannelRealization& h, SnrPoint eta, int M);
/// SISO specialisation, log2(1 + eta |h|^2).
double siso_mutual_info(double gain_sq, SnrPoint eta);

/// Decoding stops after block `block` (1-based) or the codeword is in outage.
struct StopOutcome {
  int block = 0;  // 0 iff outage
  bool outage() const { return block == 0; }
  friend bool operator==(const StopOutcome&, const StopOutcome&) = default;
};

/// Smallest l in 1..L with l * I_b >= L * R (ties decode). T cancels from
/// both sides and therefore is not a parameter.
StopOutcome rateless_stop(double info_per_block, double R, int L);

struct OutageProfile {
  std::vector<double> p_hat;   // index 0..L, p_hat[0] == 1
  std::vector<double> std_error;  // binomial standard error per entry
  std::uint64_t trials = 0;

  int L() const { return static_cast<int>(p_hat.size()) - 1; }
};

/// Histogram of stopping blocks: counts[l-1] for stop at l, counts[L] for outage.
struct StopHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t trials() const;
  int L() const { return static_cast<int>(counts.size()) - 1; }
  friend bool operator==(const StopHistogram&, const StopHistogram&) = default;
};

/// p_hat[l] = fraction of trials with the stop block strictly after l.
OutageProfile profile_from_histogram(const StopHistogram& hist);

/// Exact Pr(log2(1 + eta |h|^2) < threshold) for |h|^2 ~ Exp(1).
double siso_outage_closed_form(SnrPoint eta, double rate_threshold);

/// Closed-form p(0..L) for SISO at rate R: p(l) = Pr(l I_b < L R).
std::vector<double> siso_outage_profile(SnrPoint eta, double R, int L);

struct EffectiveRate {
  double r_bar = 0.0;
  std::optional<double> r_hat;  // r_bar / log2(eta), when eta is supplied and log2(eta) != 0
};

/// R_bar = R L / sum_{l=0}^{L-1} p(l).
EffectiveRate effective_rate(double R, int L, std::span<const double> p, std::optional<SnrPoint> eta = {});
EffectiveRate effective_rate(double R, int L, const OutageProfile& profile, std::optional<SnrPoint> eta = {});

/// Standard error of R_bar from the per-trial count of failed prefixes
/// (delta method on the denominator).
double effective_rate_stderr(double R, const StopHistogram& hist);

struct SlopePoint {
  SnrPoint eta;
  double probability;
};

struct SlopeFit {
  double slope = 0.0;        // OLS of -log2 p against log2 eta
  double rms_residual = 0.0;
  double secant = 0.0;       // two highest-SNR points
  std::vector<std::size_t> excluded;  // indices with p in {0, 1}
  std::vector<std::string> warnings;
};

SlopeFit diversity_slope(std::span<const SlopePoint> points);

}  // namespace rateless
