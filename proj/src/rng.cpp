#include "rateless/rng.hpp"

#include <cmath>
#include <numbers>

namespace rateless {

std::uint64_t TrialRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrialRng::TrialRng(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  std::uint64_t key = mix(seed ^ 0x6A09E667F3BCC908ULL);
  key = mix(key ^ (static_cast<std::uint64_t>(tag) * 0xD1B54A32D192ED03ULL));
  state_ = mix(key ^ (index * 0x9E3779B97F4A7C15ULL + 0x3C6EF372FE94F82BULL));
}

double TrialRng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t TrialRng::below(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % bound;
}

std::complex<double> TrialRng::complex_normal(double variance) {
  // Box-Muller: |z|^2 is exponential with mean `variance`, phase uniform.
  const double radius = std::sqrt(-variance * std::log(uniform_open0()));
  const double phase = 2.0 * std::numbers::pi * uniform();
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

}  // namespace rateless
