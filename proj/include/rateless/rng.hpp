#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace rateless {

// Purposes for independent substreams of one trial.
enum class StreamTag : std::uint64_t {
  kChannel = 1,
  kMessage = 2,
  kNoise = 3,
  kSearch = 4,
};

/// SplitMix64 generator keyed by (seed, tag, index). Each Monte Carlo trial
/// owns its own stream, so results do not depend on execution order.
class TrialRng {
 public:
  using result_type = std::uint64_t;

  TrialRng(std::uint64_t seed, StreamTag tag, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  /// Uniform integer on [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

}  // namespace rateless
