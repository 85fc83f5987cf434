#include "rateless/experiment.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "rateless/format.hpp"

namespace rateless {

double RateTarget::rate_at(SnrPoint eta) const {
  if (R) return *R;
  if (r_n) return *r_n * eta.log2();
  throw UsageError("rate target needs r_n or R");
}

std::vector<ExperimentRecord> run_rateless_experiment(const RatelessConfig& cfg, RateTarget rate,
                                                      std::span<const SnrPoint> eta_grid, std::uint64_t trials,
                                                      std::uint64_t seed) {
  if (eta_grid.empty()) throw UsageError("run_rateless_experiment: SNR grid must be nonempty");
  if (rate.r_n && *rate.r_n < 0.0) throw DomainError("r_n must be nonnegative");
  if (rate.R && *rate.R < 0.0) throw DomainError("R must be nonnegative");

  std::vector<SnrRate> points;
  points.reserve(eta_grid.size());
  for (const SnrPoint& eta : eta_grid) {
    const double R = rate.rate_at(eta);
    // Below 0 dB a per-level target would give a negative rate; no message.
    points.push_back(SnrRate{eta, R < 0.0 ? 0.0 : R});
  }

  const auto hists = stop_histograms_omp(cfg, points, trials, seed);
  std::vector<ExperimentRecord> records;
  records.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    OutageProfile profile = profile_from_histogram(hists[i]);
    const EffectiveRate er = effective_rate(points[i].R, cfg.L, profile, points[i].eta);
    records.push_back(ExperimentRecord{points[i].eta, points[i].R, hists[i], std::move(profile), er,
                                       effective_rate_stderr(points[i].R, hists[i])});
  }
  return records;
}

void write_results_csv(std::ostream& out, std::span<const ExperimentRecord> records, std::uint64_t seed,
                       std::span<const std::string> preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "eta_db,l,p_hat,stderr,trials,r_bar,r_hat,seed\n";
  for (const auto& rec : records) {
    const double r_hat = rec.rate.r_hat.value_or(std::numeric_limits<double>::quiet_NaN());
    for (int l = 0; l <= rec.profile.L(); ++l) {
      out << format_g12(rec.eta.db()) << ',' << l << ',' << format_g12(rec.profile.p_hat[l]) << ','
          << format_g12(rec.profile.std_error[l]) << ',' << rec.profile.trials << ',' << format_g12(rec.rate.r_bar)
          << ',' << format_g12(r_hat) << ',' << seed << '\n';
    }
  }
}

}  // namespace rateless
