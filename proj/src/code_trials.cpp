#include "rateless/code_trials.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <omp.h>

#include "rateless/format.hpp"

namespace rateless {

namespace {

struct TrialDraw {
  cplx h;
  double gain_sq;
  std::uint32_t message;
  std::vector<cplx> noise;
};

TrialDraw draw_trial(std::uint64_t seed, std::uint64_t t, std::uint32_t messages, int L) {
  TrialRng channel_rng(seed, StreamTag::kChannel, t);
  const ChannelRealization ch = sample_channel(AntennaConfig(1, 1), channel_rng);
  TrialDraw d;
  d.h = ch.H(0, 0);
  d.gain_sq = std::norm(d.h);
  d.message = static_cast<std::uint32_t>(TrialRng(seed, StreamTag::kMessage, t).below(messages));
  TrialRng noise_rng(seed, StreamTag::kNoise, t);
  d.noise.resize(L);
  for (auto& n : d.noise) n = noise_rng.complex_normal(1.0);
  return d;
}

// Stop block (0 = outage) and whether the decoded message is wrong.
struct TrialOutcome {
  int stop;
  bool error;
};

TrialOutcome run_one(const PermutationCode& code, const TrialDraw& d, SnrPoint eta, std::vector<cplx>& y,
                     std::vector<cplx>& gains) {
  const int L = code.L();
  const StopOutcome stop = rateless_stop(siso_mutual_info(d.gain_sq, eta), code.rate(), L);
  if (stop.outage()) return {0, true};
  const cplx g = std::sqrt(eta.linear()) * d.h;
  y.resize(stop.block);
  gains.assign(stop.block, g);
  for (int k = 0; k < stop.block; ++k) y[k] = g * code.symbol(d.message, k) + d.noise[k];
  const Decision dec = ml_decode_parallel(code, y, gains);
  return {stop.block, dec.message != d.message};
}

std::vector<CodeTrialCounts> empty_counts(int L, std::size_t n) {
  return std::vector<CodeTrialCounts>(
      n, CodeTrialCounts{std::vector<std::uint64_t>(L + 1, 0), std::vector<std::uint64_t>(L, 0), 0});
}

void accumulate_trial(const PermutationCode& code, std::span<const SnrPoint> etas, std::uint64_t t,
                      std::uint64_t seed, std::vector<CodeTrialCounts>& counts, std::vector<cplx>& y,
                      std::vector<cplx>& gains) {
  const int L = code.L();
  const TrialDraw d = draw_trial(seed, t, code.messages(), L);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const TrialOutcome o = run_one(code, d, etas[i], y, gains);
    auto& c = counts[i];
    ++c.trials;
    ++c.stop_hist[o.stop == 0 ? L : o.stop - 1];
    if (o.error) ++c.errors[o.stop == 0 ? L - 1 : o.stop - 1];
  }
}

void check(std::span<const SnrPoint> etas, std::uint64_t trials) {
  if (trials < 1) throw UsageError("trials must be >= 1");
  if (etas.empty()) throw UsageError("SNR grid must be nonempty");
}

double binomial_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace

std::vector<CodeTrialCounts> code_trial_counts_serial(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                      std::uint64_t trials, std::uint64_t seed) {
  check(etas, trials);
  auto counts = empty_counts(code.L(), etas.size());
  std::vector<cplx> y;
  std::vector<cplx> gains;
  for (std::uint64_t t = 0; t < trials; ++t) accumulate_trial(code, etas, t, seed, counts, y, gains);
  return counts;
}

std::vector<CodeTrialCounts> code_trial_counts_omp(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                   std::uint64_t trials, std::uint64_t seed) {
  check(etas, trials);
  auto counts = empty_counts(code.L(), etas.size());
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    auto local = empty_counts(code.L(), etas.size());
    std::vector<cplx> y;
    std::vector<cplx> gains;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) accumulate_trial(code, etas, static_cast<std::uint64_t>(t), seed, local, y, gains);
#pragma omp critical(rateless_code_merge)
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i].trials += local[i].trials;
      for (std::size_t k = 0; k < counts[i].stop_hist.size(); ++k) counts[i].stop_hist[k] += local[i].stop_hist[k];
      for (std::size_t k = 0; k < counts[i].errors.size(); ++k) counts[i].errors[k] += local[i].errors[k];
    }
  }
  return counts;
}

ErrorDecomposition decompose(const CodeTrialCounts& counts) {
  const auto L = counts.errors.size();
  const double n = static_cast<double>(counts.trials);
  ErrorDecomposition out;
  out.stop_hist = counts.stop_hist;
  out.joint_err.resize(L);
  out.joint_err_stderr.resize(L);
  std::uint64_t total_errors = 0;
  for (std::size_t l = 0; l < L; ++l) {
    out.joint_err[l] = static_cast<double>(counts.errors[l]) / n;
    out.joint_err_stderr[l] = binomial_se(out.joint_err[l], n);
    total_errors += counts.errors[l];
  }
  out.p_e = static_cast<double>(total_errors) / n;
  out.p_e_stderr = binomial_se(out.p_e, n);

  const std::uint64_t outages = counts.stop_hist[L];
  const std::uint64_t nonoutage = counts.trials - outages;
  if (nonoutage > 0) {
    out.cond_err_nonoutage = static_cast<double>(total_errors - outages) / static_cast<double>(nonoutage);
    out.cond_err_stderr = binomial_se(out.cond_err_nonoutage, static_cast<double>(nonoutage));
  }

  // D = 1[error, stop < L] - 1[error at L]; E[D^2] = early + final.
  const double final_err = out.joint_err[L - 1];
  const double early = out.p_e - final_err;
  out.early_minus_final = early - final_err;
  const double var = early + final_err - out.early_minus_final * out.early_minus_final;
  out.early_minus_final_stderr = std::sqrt(std::max(var, 0.0) / n);
  return out;
}

std::vector<CodeTrialResult> run_rateless_code_trials(const PermutationCode& code, std::span<const SnrPoint> etas,
                                                      std::uint64_t trials, std::uint64_t seed) {
  const auto counts = code_trial_counts_omp(code, etas, trials, seed);
  std::vector<CodeTrialResult> out;
  out.reserve(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const StopHistogram hist{counts[i].stop_hist};
    OutageProfile profile = profile_from_histogram(hist);
    const EffectiveRate rate = effective_rate(code.rate(), code.L(), profile, etas[i]);
    out.push_back(CodeTrialResult{code.rate(), etas[i], counts[i], decompose(counts[i]), std::move(profile), rate});
  }
  return out;
}

CodeTrialResult run_rateless_code_trials(const PermutationCode& code, SnrPoint eta, std::uint64_t trials,
                                         std::uint64_t seed, std::optional<double> R) {
  if (R && std::abs(*R - code.rate()) > 1e-12) {
    throw UsageError("code rate mismatch: code carries bits/L = " + format_g12(code.rate()) + ", requested R = " +
                     format_g12(*R));
  }
  return run_rateless_code_trials(code, std::span<const SnrPoint>(&eta, 1), trials, seed).front();
}

PairedComparison paired_code_comparison(const PermutationCode& a, const PermutationCode& b, SnrPoint eta,
                                        std::uint64_t trials, std::uint64_t seed) {
  if (a.L() != b.L() || a.bits() != b.bits()) throw UsageError("paired comparison needs codes of equal L and bits");
  if (trials < 1) throw UsageError("trials must be >= 1");
  std::uint64_t only_a = 0;
  std::uint64_t only_b = 0;
  std::uint64_t both = 0;
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel reduction(+ : only_a, only_b, both)
  {
    std::vector<cplx> y;
    std::vector<cplx> gains;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      const TrialDraw d = draw_trial(seed, static_cast<std::uint64_t>(t), a.messages(), a.L());
      const bool ea = run_one(a, d, eta, y, gains).error;
      const bool eb = run_one(b, d, eta, y, gains).error;
      only_a += (ea && !eb);
      only_b += (eb && !ea);
      both += (ea && eb);
    }
  }
  PairedComparison out;
  out.only_a = only_a;
  out.only_b = only_b;
  out.both = both;
  out.trials = trials;
  const double nn = static_cast<double>(trials);
  out.p_e_a = static_cast<double>(only_a + both) / nn;
  out.p_e_b = static_cast<double>(only_b + both) / nn;
  out.diff = out.p_e_a - out.p_e_b;
  const double second_moment = static_cast<double>(only_a + only_b) / nn;
  out.diff_stderr = std::sqrt(std::max(second_moment - out.diff * out.diff, 0.0) / nn);
  return out;
}

UniversalityEvidence universality_margin(const PermutationCode& code, std::span<const SnrPoint> eta_grid,
                                         std::uint64_t trials, std::uint64_t seed, std::uint64_t min_samples) {
  const int L = code.L();
  UniversalityEvidence ev = distance_evidence(code);
  const auto counts = code_trial_counts_omp(code, eta_grid, trials, seed);

  ev.cells.assign(L, std::vector<UniversalityEvidence::Cell>(eta_grid.size()));
  std::vector<double> log_eta;
  std::vector<double> log_neg_log_p;
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    const auto& c = counts[i];
    ev.eta_db.push_back(eta_grid[i].db());
    std::uint64_t pooled_samples = 0;
    std::uint64_t pooled_errors = 0;
    for (int l = 1; l <= L; ++l) {
      auto& cell = ev.cells[l - 1][i];
      cell.samples = c.stop_hist[l - 1];
      cell.errors = c.errors[l - 1] - (l == L ? c.stop_hist[L] : 0);
      cell.estimable = cell.samples >= min_samples;
      if (cell.samples > 0) {
        cell.cond_err = static_cast<double>(cell.errors) / static_cast<double>(cell.samples);
        cell.std_error = binomial_se(cell.cond_err, static_cast<double>(cell.samples));
      }
      pooled_samples += cell.samples;
      pooled_errors += cell.errors;
    }
    const double pooled = pooled_samples > 0
                              ? static_cast<double>(pooled_errors) / static_cast<double>(pooled_samples)
                              : std::numeric_limits<double>::quiet_NaN();
    ev.nonoutage_cond_err.push_back(pooled);
    if (pooled_samples >= min_samples && pooled > 0.0 && pooled < 1.0) {
      log_eta.push_back(std::log(eta_grid[i].linear()));
      log_neg_log_p.push_back(std::log(-std::log(pooled)));
    }
  }

  // P ~ exp(-eta^delta)  =>  ln(-ln P) ~ delta ln(eta) + const.
  if (log_eta.size() >= 2) {
    const double n = static_cast<double>(log_eta.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < log_eta.size(); ++k) {
      mx += log_eta[k] / n;
      my += log_neg_log_p[k] / n;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < log_eta.size(); ++k) {
      sxx += (log_eta[k] - mx) * (log_eta[k] - mx);
      sxy += (log_eta[k] - mx) * (log_neg_log_p[k] - my);
    }
    ev.decay_estimate = sxy / sxx;
  }
  return ev;
}

void write_code_trials_csv(std::ostream& out, std::span<const CodeTrialResult> results, std::uint64_t seed,
                           std::span<const std::string> preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "eta_db,l,joint_err,stderr,p_e,cond_err_nonoutage,seed\n";
  for (const auto& r : results) {
    for (std::size_t l = 0; l < r.errors.joint_err.size(); ++l) {
      out << format_g12(r.eta.db()) << ',' << (l + 1) << ',' << format_g12(r.errors.joint_err[l]) << ','
          << format_g12(r.errors.joint_err_stderr[l]) << ',' << format_g12(r.errors.p_e) << ','
          << format_g12(r.errors.cond_err_nonoutage) << ',' << seed << '\n';
    }
  }
}

}  // namespace rateless
