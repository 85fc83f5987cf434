#include "rateless/dmt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace rateless {

AntennaConfig::AntennaConfig(int m, int n) : M(m), N(n) {
  if (M < 1 || N < 1) throw DomainError("antenna counts must be >= 1");
}

RatelessConfig::RatelessConfig(AntennaConfig a, int blocks, int uses) : antennas(a), L(blocks), T(uses) {
  if (L < 1) throw DomainError("L must be >= 1");
  if (T < 1) throw DomainError("T must be >= 1");
}

RateSpec RateSpec::from_per_level(const RatelessConfig& cfg, Rational r_n, double snr_linear) {
  if (r_n < 0) throw DomainError("r_n must be nonnegative");
  RateSpec spec;
  spec.r_n = r_n;
  spec.r_L = r_n * Rational(cfg.L);
  spec.R = to_double(r_n) * std::log2(snr_linear);
  return spec;
}

namespace {

Rational corner_value(const AntennaConfig& cfg, std::int64_t k) {
  return Rational((cfg.M - k) * (cfg.N - k));
}

void check_range(Rational r, Rational hi, const char* what) {
  if (r < 0 || r > hi) throw DomainError(std::string(what) + " out of range");
}

}  // namespace

Rational tradeoff_f(const AntennaConfig& cfg, Rational k) {
  if (k < 0) throw DomainError("tradeoff_f: k must be nonnegative");
  const std::int64_t m = cfg.min_dim();
  if (k >= m) return Rational(0);
  const std::int64_t lo = k.numerator() / k.denominator();
  const Rational frac = k - lo;
  const Rational f_lo = corner_value(cfg, lo);
  const Rational f_hi = corner_value(cfg, lo + 1);
  return f_lo + frac * (f_hi - f_lo);
}

Rational conventional_dmt(const AntennaConfig& cfg, Rational r) {
  check_range(r, Rational(cfg.min_dim()), "conventional_dmt: r");
  return tradeoff_f(cfg, r);
}

Rational segment_break(const RatelessConfig& cfg, int l) {
  return Rational(static_cast<std::int64_t>(l) * cfg.antennas.min_dim(), cfg.L);
}

Segment rateless_segment(const RatelessConfig& cfg, Rational r_n) {
  if (r_n < 0) throw DomainError("rateless_segment: r_n must be nonnegative");
  if (r_n >= cfg.antennas.min_dim()) return Segment{0, true};
  // Smallest l with r_n < l * m / L, i.e. l = floor(r_n * L / m) + 1.
  const Rational scaled = r_n * Rational(cfg.L, cfg.antennas.min_dim());
  const auto l = static_cast<int>(scaled.numerator() / scaled.denominator()) + 1;
  return Segment{l, false};
}

GainPoint rateless_dmt_point(const RatelessConfig& cfg, Rational r_n) {
  const Segment seg = rateless_segment(cfg, r_n);
  if (seg.tail) return GainPoint{Rational(cfg.antennas.min_dim()), Rational(0)};
  const Rational r = r_n * Rational(cfg.L, seg.l);
  const Rational d = tradeoff_f(cfg.antennas, Rational(seg.l) * r / Rational(cfg.L));
  return GainPoint{r, d};
}

Rational parallel_identical_dmt(const RatelessConfig& cfg, Rational r) {
  check_range(r, Rational(cfg.L) * cfg.antennas.min_dim(), "parallel_identical_dmt: r");
  return tradeoff_f(cfg.antennas, r / Rational(cfg.L));
}

Rational parallel_iid_dmt(const RatelessConfig& cfg, Rational r) {
  check_range(r, Rational(cfg.L) * cfg.antennas.min_dim(), "parallel_iid_dmt: r");
  return Rational(cfg.L) * tradeoff_f(cfg.antennas, r / Rational(cfg.L));
}

RatelessCurves rateless_dmt_curve(const RatelessConfig& cfg, std::span<const Rational> r_n_grid) {
  for (std::size_t i = 1; i < r_n_grid.size(); ++i) {
    if (!(r_n_grid[i - 1] < r_n_grid[i])) {
      throw UsageError("rateless_dmt_curve: grid must be strictly increasing");
    }
  }
  if (!r_n_grid.empty() && r_n_grid.front() < 0) throw UsageError("rateless_dmt_curve: negative grid value");

  RatelessCurves out;
  const Rational m(cfg.antennas.min_dim());
  for (const Rational& r_n : r_n_grid) {
    const Segment seg = rateless_segment(cfg, r_n);
    out.rateless.params.push_back(r_n);
    out.rateless.points.push_back(rateless_dmt_point(cfg, r_n));
    out.rateless.segment_index.push_back(seg.tail ? -1 : seg.l);
    out.rateless.clamped.push_back(seg.tail && r_n > m);

    if (r_n <= m) {
      out.conventional.params.push_back(r_n);
      out.conventional.points.push_back(GainPoint{r_n, conventional_dmt(cfg.antennas, r_n)});
      out.conventional.segment_index.push_back(0);
      out.conventional.clamped.push_back(false);
    }
  }
  return out;
}

std::vector<Rational> default_rn_grid(const RatelessConfig& cfg, int per_segment) {
  if (per_segment < 1) throw UsageError("default_rn_grid: per_segment must be >= 1");
  std::vector<Rational> grid;
  grid.reserve(static_cast<std::size_t>(cfg.L) * (per_segment + 1) + 1);
  const Rational width(cfg.antennas.min_dim(), cfg.L);
  // Left-limit sample sits 1/64 of a grid step below the right endpoint.
  const Rational limit_offset = width / Rational(64LL * per_segment);
  for (int l = 1; l <= cfg.L; ++l) {
    const Rational left = segment_break(cfg, l - 1);
    for (int k = 0; k < per_segment; ++k) grid.push_back(left + width * Rational(k, per_segment));
    grid.push_back(segment_break(cfg, l) - limit_offset);
  }
  grid.push_back(Rational(cfg.antennas.min_dim()));
  return grid;
}

std::optional<Rational> suggested_max_blocks(const AntennaConfig& cfg, Rational r_n) {
  if (r_n <= 0) return std::nullopt;
  return Rational(cfg.min_dim()) / r_n;
}

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  auto fail = [&]() -> Rational { throw UsageError("cannot parse rational: '" + raw + "'"); };
  if (text.empty()) return fail();

  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const Rational p = parse_rational(text.substr(0, slash));
    const Rational q = parse_rational(text.substr(slash + 1));
    if (q.numerator() == 0) return fail();
    return p / q;
  }

  bool negative = false;
  std::size_t pos = 0;
  if (text[pos] == '+' || text[pos] == '-') negative = text[pos++] == '-';
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  constexpr std::int64_t kLimit = std::numeric_limits<std::int64_t>::max() / 10;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return fail();
    if (num > kLimit || den > kLimit) return fail();
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    seen_digit = true;
  }
  if (!seen_digit) return fail();
  return Rational(negative ? -num : num, den);
}

double to_double(Rational q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

}  // namespace rateless
