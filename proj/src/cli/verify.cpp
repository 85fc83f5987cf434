#include "rateless/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <omp.h>

#include "rateless/channel.hpp"
#include "rateless/code_search.hpp"
#include "rateless/code_trials.hpp"
#include "rateless/dmt.hpp"
#include "rateless/experiment.hpp"
#include "rateless/format.hpp"
#include "rateless/outage_kernels.hpp"
#include "rateless/rng.hpp"

namespace rateless::cli {

namespace {

// f(k) from the slope form: on [j, j+1] it falls by M+N-2j-1 per unit.
Rational f_slope_form(int M, int N, Rational k) {
  const std::int64_t m = std::min(M, N);
  if (!(k < Rational(m))) return Rational(0);
  const std::int64_t j = k.numerator() / k.denominator();
  return Rational((M - j) * (N - j)) - (k - Rational(j)) * Rational(M + N - 2 * j - 1);
}

// Pr(log2(1 + eta |h|^2) < threshold), |h|^2 ~ Exp(1).
double siso_outage(double eta, double threshold) { return 1.0 - std::exp(-(std::exp2(threshold) - 1.0) / eta); }

double binomial_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

double z_score(double estimate, double truth, double se) {
  const double diff = std::abs(estimate - truth);
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

class ThreadScope {
 public:
  explicit ThreadScope(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

struct Outcome {
  std::string measured;
  std::string tolerance;
  bool pass = false;
};

struct Context {
  const VerifyOptions& opts;
  std::uint64_t trials(std::uint64_t fallback) const { return opts.trials.value_or(fallback); }
  std::uint64_t seed(int id) const { return opts.seed + static_cast<std::uint64_t>(id); }
};

Outcome check_fig1(const Context&) {
  const RatelessConfig cfg(AntennaConfig(2, 2), 2);
  const auto grid = default_rn_grid(cfg);
  const RatelessCurves curves = rateless_dmt_curve(cfg, grid);
  std::size_t checked = 0, bad = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] < Rational(1))) continue;
    ++checked;
    const GainPoint& p = curves.rateless.points[i];
    if (!(p.r == Rational(2) * grid[i]) || !(p.d == f_slope_form(2, 2, grid[i]))) ++bad;
  }
  const AntennaConfig a(2, 2);
  const bool corners = conventional_dmt(a, Rational(0)) == Rational(4) && conventional_dmt(a, Rational(1)) == Rational(1) &&
                       conventional_dmt(a, Rational(2)) == Rational(0);
  std::size_t conv_bad = 0;
  for (std::size_t i = 0; i < curves.conventional.params.size(); ++i) {
    const auto& p = curves.conventional.points[i];
    if (!(p.d == f_slope_form(2, 2, p.r))) ++conv_bad;
  }
  Outcome o;
  o.measured = std::to_string(bad) + " of " + std::to_string(checked) + " rateless points off; conventional corners " +
               (corners ? "exact" : "WRONG") + ", " + std::to_string(conv_bad) + " conventional points off";
  o.tolerance = "exact rational equality";
  o.pass = bad == 0 && checked > 0 && corners && conv_bad == 0;
  return o;
}

Outcome check_fig2(const Context&) {
  const RatelessConfig cfg(AntennaConfig(3, 3), 4);
  const auto grid = default_rn_grid(cfg);
  const RatelessCurves curves = rateless_dmt_curve(cfg, grid);
  std::set<int> segments;
  std::vector<Rational> breaks;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int l = curves.rateless.segment_index[i];
    const GainPoint& p = curves.rateless.points[i];
    if (l < 0) {
      if (!(p.d == Rational(0))) ++bad;
      continue;
    }
    segments.insert(l);
    if (i > 0 && curves.rateless.segment_index[i - 1] != l) breaks.push_back(grid[i]);
    if (!(p.r == grid[i] * Rational(4, l)) || !(p.d == f_slope_form(3, 3, grid[i]))) ++bad;
  }
  const GainPoint end = rateless_dmt_point(cfg, Rational(3));
  const std::vector<Rational> expected = {Rational(3, 4), Rational(3, 2), Rational(9, 4)};
  std::string br;
  for (const auto& b : breaks) br += (br.empty() ? "" : ",") + format_rational(b);
  Outcome o;
  o.measured = std::to_string(segments.size()) + " segments, breaks {" + br + "}, " + std::to_string(bad) +
               " points off, d(3)=" + format_rational(end.d);
  o.tolerance = "4 segments, breaks {3/4,3/2,9/4}, exact";
  o.pass = segments == std::set<int>{1, 2, 3, 4} && breaks == expected && bad == 0 && end.d == Rational(0);
  return o;
}

Outcome check_siso_oracle(const Context& ctx) {
  const RatelessConfig cfg(AntennaConfig(1, 1), 2);
  const std::uint64_t n = ctx.trials(1'000'000);
  double worst = 0.0;
  std::string at;
  for (double db : {0.0, 10.0, 20.0, 30.0}) {
    const SnrPoint eta = SnrPoint::from_db(db);
    const OutageProfile prof = estimate_outage_profile(cfg, eta, 1.0, n, ctx.seed(3));
    for (int l = 1; l <= 2; ++l) {
      const double p0 = siso_outage(eta.linear(), 2.0 / l);
      const double z = z_score(prof.p_hat[l], p0, binomial_se(p0, static_cast<double>(n)));
      if (z >= worst) {
        worst = z;
        at = g(db) + " dB, l=" + std::to_string(l);
      }
    }
  }
  Outcome o;
  o.measured = "max |z| = " + g(worst) + " (" + at + "), " + std::to_string(n) + " trials";
  o.tolerance = "|z| <= " + g(ctx.opts.sigma);
  o.pass = worst <= ctx.opts.sigma;
  return o;
}

std::vector<double> db_range(double lo, double hi, double step) {
  std::vector<double> out;
  for (double x = lo; x <= hi + 1e-9; x += step) out.push_back(x);
  return out;
}

Outcome check_slopes(const Context&) {
  const double r_n = 0.25;
  std::vector<SlopePoint> last, first;
  for (double db : db_range(40.0, 80.0, 1.0)) {
    const SnrPoint eta = SnrPoint::from_db(db);
    const auto p = siso_outage_profile(eta, r_n * eta.log2(), 2);
    last.push_back({eta, p[2]});
    first.push_back({eta, p[1]});
  }
  const SlopeFit fit_last = diversity_slope(last);
  const SlopeFit fit_first = diversity_slope(first);
  Outcome o;
  o.measured = "slope p(2) = " + g(fit_last.slope) + ", slope p(1) = " + g(fit_first.slope);
  o.tolerance = "[0.70, 0.78] and [0.45, 0.53]";
  o.pass = fit_last.slope >= 0.70 && fit_last.slope <= 0.78 && fit_first.slope >= 0.45 && fit_first.slope <= 0.53 &&
           fit_last.excluded.empty() && fit_first.excluded.empty();
  return o;
}

Outcome check_effective_rate(const Context& ctx) {
  const RatelessConfig cfg(AntennaConfig(1, 1), 2);
  const SnrPoint eta = SnrPoint::from_db(60.0);
  const double R = 0.25 * eta.log2();
  const auto p = siso_outage_profile(eta, R, 2);
  const double r_hat = *effective_rate(R, 2, p, eta).r_hat;
  const double rel = std::abs(r_hat - 0.5) / 0.5;

  const std::uint64_t n = ctx.trials(100'000);
  const std::vector<SnrPoint> grid = {eta};
  const auto rec = run_rateless_experiment(cfg, RateTarget::per_level(0.25), grid, n, ctx.seed(5)).front();
  const double se = rec.r_bar_stderr / eta.log2();
  const double z = z_score(*rec.rate.r_hat, r_hat, se);
  Outcome o;
  o.measured = "closed-form r_hat = " + g(r_hat) + " (" + g(100.0 * rel) + "% off 0.5); Monte Carlo " +
               g(*rec.rate.r_hat) + ", |z| = " + g(z);
  o.tolerance = "within 5% of 0.5; |z| <= " + g(ctx.opts.sigma);
  o.pass = rel <= 0.05 && z <= ctx.opts.sigma;
  return o;
}

Outcome check_rate_collapse(const Context&) {
  const double r_n = 0.75;
  const SnrPoint top = SnrPoint::from_linear(1e8);
  const double R = r_n * top.log2();
  const auto p = siso_outage_profile(top, R, 2);
  const double r_hat = *effective_rate(R, 2, p, top).r_hat;
  const double rel = std::abs(r_hat - 0.75) / 0.75;

  // p(1) sits within rounding of 1, so -log2 p(1) is formed from the
  // complement directly.
  std::vector<double> x, y;
  for (double db : db_range(40.0, 80.0, 1.0)) {
    const SnrPoint eta = SnrPoint::from_db(db);
    const double rate = r_n * eta.log2();
    const double a = std::expm1(2.0 * rate * std::numbers::ln2) / eta.linear();
    const double neg_log2_p = a > 1.0 ? -std::log1p(-std::exp(-a)) / std::numbers::ln2 : -std::log2(-std::expm1(-a));
    x.push_back(eta.log2());
    y.push_back(neg_log2_p);
  }
  const double slope = ols_slope(x, y);
  Outcome o;
  o.measured = "r_hat(1e8) = " + g(r_hat) + " (" + g(100.0 * rel) + "% off 0.75), p(1) = " + g(p[1]) +
               ", slope -log2 p(1) = " + g(slope);
  o.tolerance = "within 10% of 0.75; slope in [-0.05, 0.05]";
  o.pass = rel <= 0.10 && slope >= -0.05 && slope <= 0.05;
  return o;
}

Outcome check_code_trials(const Context& ctx) {
  const SearchResult searched = search_permutation_code(2, 2);
  const PermutationCode identity = PermutationCode::identity(build_qam(2), 2);
  const std::uint64_t n = ctx.trials(1'000'000);
  const double sigma = ctx.opts.sigma;
  std::vector<SnrPoint> etas;
  for (double db : {20.0, 30.0, 40.0}) etas.push_back(SnrPoint::from_db(db));
  const auto results = run_rateless_code_trials(searched.code, etas, n, ctx.seed(7));

  double worst_z = 0.0;
  bool ratio_ok = true;
  std::string ratios;
  bool dominance_ok = true;
  std::string dominance;
  double worst_paired = -std::numeric_limits<double>::infinity();
  bool paired_ok = true;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const auto& r = results[i];
    const double eta = etas[i].linear();
    for (int l = 1; l <= 2; ++l) {
      const double p0 = siso_outage(eta, 2.0 / l);
      worst_z = std::max(worst_z, z_score(r.profile.p_hat[l], p0, binomial_se(p0, static_cast<double>(n))));
    }
    const double pL = siso_outage(eta, 1.0);
    const double db = etas[i].db();
    if (db >= 30.0) {
      const double ratio = r.errors.p_e / pL;
      ratios += (ratios.empty() ? "" : ", ") + g(ratio);
      ratio_ok = ratio_ok && ratio >= 1.0 / 3.0 && ratio <= 3.0;
    }
    if (db >= 40.0) {
      dominance = g(r.errors.early_minus_final) + " (se " + g(r.errors.early_minus_final_stderr) + ")";
      dominance_ok = r.errors.early_minus_final <= sigma * r.errors.early_minus_final_stderr;
    }
    const PairedComparison cmp = paired_code_comparison(searched.code, identity, etas[i], n, ctx.seed(7));
    const double excess = cmp.diff_stderr > 0.0 ? cmp.diff / cmp.diff_stderr : (cmp.diff > 0.0 ? 1e300 : 0.0);
    worst_paired = std::max(worst_paired, excess);
    paired_ok = paired_ok && cmp.diff <= sigma * cmp.diff_stderr;
  }
  Outcome o;
  o.measured = "(a) max |z| = " + g(worst_z) + "; (b) P_e/p(L) at 30,40 dB = " + ratios +
               "; (c) early - final at 40 dB = " + dominance + "; (d) max (searched - identity)/se = " +
               g(worst_paired) + "; " + std::to_string(n) + " trials";
  o.tolerance = "(a) |z| <= " + g(sigma) + "; (b) [1/3, 3]; (c),(d) <= " + g(sigma) + " se";
  o.pass = searched.exhaustive && worst_z <= sigma && ratio_ok && dominance_ok && paired_ok;
  return o;
}

// Independent of the library decoder: accumulate blocks last to first and scan
// messages from the top, keeping ties on the lower index.
std::uint32_t brute_force_decode(const PermutationCode& code, const std::vector<cplx>& y, cplx gain) {
  std::uint32_t best = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  for (std::uint32_t m = code.messages(); m-- > 0;) {
    double metric = 0.0;
    for (std::size_t k = y.size(); k-- > 0;) metric += std::norm(y[k] - gain * code.symbol(m, static_cast<int>(k)));
    if (metric <= best_metric) {
      best_metric = metric;
      best = m;
    }
  }
  return best;
}

Outcome check_decoder(const Context& ctx) {
  std::vector<PermutationCode> codes;
  for (int L = 1; L <= 3; ++L) {
    for (int bits = 1; bits <= 4; ++bits) codes.push_back(search_permutation_code(L, bits).code);
  }
  std::uint64_t noiseless = 0, noiseless_wrong = 0;
  for (const auto& code : codes) {
    const auto dist = prefix_product_distances(code);
    for (int l = 1; l <= code.L(); ++l) {
      if (!(dist[l - 1] > 0.0)) continue;
      for (std::uint32_t m = 0; m < code.messages(); ++m) {
        ReceivedPrefix rx{{}, cplx(1.0, 0.0), SnrPoint::from_linear(1.0)};
        for (int k = 0; k < l; ++k) rx.y.push_back(code.symbol(m, k));
        ++noiseless;
        if (ml_decode_prefix(code, rx).message != m) ++noiseless_wrong;
      }
    }
  }

  constexpr std::uint64_t kInstances = 10'000;
  std::uint64_t disagree = 0;
  for (std::uint64_t i = 0; i < kInstances; ++i) {
    TrialRng rng(ctx.seed(8), StreamTag::kSearch, i);
    const PermutationCode& code = codes[rng.below(codes.size())];
    const int l = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(code.L())));
    const auto m = static_cast<std::uint32_t>(rng.below(code.messages()));
    const cplx h = rng.complex_normal();
    ReceivedPrefix rx{{}, h, SnrPoint::from_db(10.0 * static_cast<double>(rng.below(4)))};
    const cplx gain = std::sqrt(rx.eta.linear()) * rx.h;
    for (int k = 0; k < l; ++k) rx.y.push_back(gain * code.symbol(m, k) + rng.complex_normal());
    if (ml_decode_prefix(code, rx).message != brute_force_decode(code, rx.y, gain)) ++disagree;
  }
  Outcome o;
  o.measured = std::to_string(noiseless_wrong) + " of " + std::to_string(noiseless) + " noiseless decodes wrong; " +
               std::to_string(disagree) + " of " + std::to_string(kInstances) + " noisy decodes disagree";
  o.tolerance = "0 and 0";
  o.pass = noiseless > 0 && noiseless_wrong == 0 && disagree == 0;
  return o;
}

std::string monte_carlo_fingerprint(const Context& ctx) {
  std::ostringstream out;
  const RatelessConfig siso(AntennaConfig(1, 1), 2);
  std::vector<SnrPoint> c3;
  for (double db : {0.0, 10.0, 20.0, 30.0}) c3.push_back(SnrPoint::from_db(db));
  write_results_csv(out, run_rateless_experiment(siso, RateTarget::fixed(1.0), c3, ctx.trials(1'000'000), ctx.seed(3)),
                    ctx.seed(3));
  const std::vector<SnrPoint> c5 = {SnrPoint::from_db(60.0)};
  write_results_csv(out, run_rateless_experiment(siso, RateTarget::per_level(0.25), c5, ctx.trials(100'000), ctx.seed(5)),
                    ctx.seed(5));
  const RatelessConfig mimo(AntennaConfig(2, 2), 2);
  std::vector<SnrPoint> grid;
  for (double db : {10.0, 20.0}) grid.push_back(SnrPoint::from_db(db));
  write_results_csv(out, run_rateless_experiment(mimo, RateTarget::per_level(0.5), grid, ctx.trials(100'000), ctx.seed(9)),
                    ctx.seed(9));

  const SearchResult searched = search_permutation_code(2, 2);
  const PermutationCode identity = PermutationCode::identity(build_qam(2), 2);
  std::vector<SnrPoint> c7;
  for (double db : {20.0, 30.0, 40.0}) c7.push_back(SnrPoint::from_db(db));
  const std::uint64_t n7 = ctx.trials(1'000'000);
  write_code_trials_csv(out, run_rateless_code_trials(searched.code, c7, n7, ctx.seed(7)), ctx.seed(7));
  for (const auto& eta : c7) {
    const PairedComparison cmp = paired_code_comparison(searched.code, identity, eta, n7, ctx.seed(7));
    out << cmp.only_a << ' ' << cmp.only_b << ' ' << cmp.both << ' ' << format_exact(cmp.diff_stderr) << '\n';
  }
  return out.str();
}

Outcome check_determinism(const Context& ctx) {
  std::string one, alt, again;
  {
    ThreadScope scope(1);
    one = monte_carlo_fingerprint(ctx);
  }
  {
    ThreadScope scope(ctx.opts.alt_threads);
    alt = monte_carlo_fingerprint(ctx);
    again = monte_carlo_fingerprint(ctx);
  }
  Outcome o;
  o.measured = std::string("rerun ") + (alt == again ? "identical" : "DIFFERS") + ", 1 vs " +
               std::to_string(ctx.opts.alt_threads) + " threads " + (one == alt ? "identical" : "DIFFERS") + " (" +
               std::to_string(one.size()) + " bytes of output)";
  o.tolerance = "byte-identical";
  o.pass = one == alt && alt == again;
  return o;
}

struct CheckEntry {
  int id;
  const char* name;
  double time_limit;
  Outcome (*run)(const Context&);
};

const CheckEntry kChecks[] = {
    {1, "rateless DMT, M=N=2 L=2", 1.0, check_fig1},
    {2, "rateless DMT sawtooth, M=N=3 L=4", 1.0, check_fig2},
    {3, "SISO outage vs closed form", 60.0, check_siso_oracle},
    {4, "diversity slopes, closed form", 1.0, check_slopes},
    {5, "effective multiplexing gain", 30.0, check_effective_rate},
    {6, "rate collapse past min(M,N)/L", 5.0, check_rate_collapse},
    {7, "permutation-code rateless trials", 600.0, check_code_trials},
    {8, "decoder correctness", 30.0, check_decoder},
    {9, "determinism across reruns and threads", 0.0, check_determinism},
};

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  const Context ctx{opts};
  std::vector<CheckResult> out;
  for (const CheckEntry& entry : kChecks) {
    if (!opts.checks.empty() && std::find(opts.checks.begin(), opts.checks.end(), entry.id) == opts.checks.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run(ctx);
    } catch (const std::exception& e) {
      outcome.measured = std::string("threw: ") + e.what();
      outcome.pass = false;
    }
    CheckResult r;
    r.id = entry.id;
    r.name = entry.name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.time_limit = entry.time_limit;
    r.measured = outcome.measured;
    r.tolerance = outcome.tolerance;
    r.pass = outcome.pass && (entry.time_limit <= 0.0 || r.seconds < entry.time_limit);
    out.push_back(std::move(r));
  }
  return out;
}

void print_report(std::ostream& out, const std::vector<CheckResult>& results) {
  int passed = 0;
  for (const auto& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.name << "\n"
        << "      measured:  " << r.measured << "\n"
        << "      tolerance: " << r.tolerance << "\n"
        << "      runtime:   " << g(r.seconds) << " s";
    if (r.time_limit > 0.0) out << " (limit " << g(r.time_limit) << " s)";
    out << "\n";
    passed += r.pass ? 1 : 0;
  }
  out << passed << "/" << results.size() << " checks passed\n";
}

}  // namespace rateless::cli
