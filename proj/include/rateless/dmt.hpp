#pragma once

// Analytic diversity-multiplexing tradeoff curves for rateless codes over
// MIMO block-fading channels. Everything here is exact rational arithmetic.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace rateless {

using Rational = boost::rational<std::int64_t>;

/// Thrown when an argument lies outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for caller mistakes that are not domain violations (bad ordering,
/// malformed input).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AntennaConfig {
  int M = 1;  // transmit
  int N = 1;  // receive

  AntennaConfig() = default;
  AntennaConfig(int m, int n);

  int min_dim() const { return M < N ? M : N; }
};

struct RatelessConfig {
  AntennaConfig antennas;
  int L = 1;  // blocks per codeword
  int T = 1;  // channel uses per block

  RatelessConfig() = default;
  RatelessConfig(AntennaConfig a, int blocks, int uses = 1);
};

struct GainPoint {
  Rational r;
  Rational d;

  friend bool operator==(const GainPoint&, const GainPoint&) = default;
};

/// Per-level rate description; r_L is always L * r_n.
struct RateSpec {
  double R = 0.0;
  Rational r_n;
  Rational r_L;

  static RateSpec from_per_level(const RatelessConfig& cfg, Rational r_n, double snr_linear);
};

/// Segment of the rateless DMT that a per-level gain r_n falls into.
/// `tail` is set when r_n >= min(M, N); `l` is then 0.
struct Segment {
  int l = 0;
  bool tail = false;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct DmtCurve {
  std::vector<Rational> params;  // generating parameter (r_n, or r for plain curves)
  std::vector<GainPoint> points;
  std::vector<int> segment_index;  // 0 for non-rateless curves, -1 for tail rows
  std::vector<bool> clamped;       // r clamped to min(M, N) in the tail

  std::size_t size() const { return points.size(); }
};

struct RatelessCurves {
  DmtCurve rateless;
  DmtCurve conventional;
};

// f(k): piecewise linear through (k, (M-k)(N-k)), k = 0..min(M,N); zero beyond.
Rational tradeoff_f(const AntennaConfig& cfg, Rational k);

Rational conventional_dmt(const AntennaConfig& cfg, Rational r);

Segment rateless_segment(const RatelessConfig& cfg, Rational r_n);

/// Theorem-style DMT point for per-level gain r_n: r = r_n * L / l and
/// d = f(l r / L) on segment l; (min(M,N) clamp, 0) in the tail.
GainPoint rateless_dmt_point(const RatelessConfig& cfg, Rational r_n);

// Parallel MIMO channel with the same H on every diagonal block.
Rational parallel_identical_dmt(const RatelessConfig& cfg, Rational r);
// Parallel MIMO channel with i.i.d. H_i.
Rational parallel_iid_dmt(const RatelessConfig& cfg, Rational r);

/// Evaluates the rateless curve over a sorted grid of r_n values, and the
/// conventional curve over the grid values that lie in [0, min(M,N)].
RatelessCurves rateless_dmt_curve(const RatelessConfig& cfg, std::span<const Rational> r_n_grid);

/// Default figure grid: `per_segment` evenly spaced r_n values in every
/// segment starting at its left endpoint, a left-limit sample just below
/// each right endpoint, and the tail start r_n = min(M, N).
std::vector<Rational> default_rn_grid(const RatelessConfig& cfg, int per_segment = 512);

/// Upper end of segment l in r_n, i.e. l * min(M,N) / L.
Rational segment_break(const RatelessConfig& cfg, int l);

/// Suggested upper bound for L at a given r_n (L < min(M,N) / r_n); empty
/// when r_n is zero.
std::optional<Rational> suggested_max_blocks(const AntennaConfig& cfg, Rational r_n);

/// Parses "p/q", integers and plain decimals ("0.75", "1e-3" is rejected)
/// into an exact rational.
Rational parse_rational(const std::string& text);

double to_double(Rational q);

}  // namespace rateless
