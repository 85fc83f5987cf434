#include "rateless/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rateless {

SnrPoint SnrPoint::from_db(double db) {
  if (!std::isfinite(db)) throw DomainError("SNR in dB must be finite");
  return SnrPoint(std::pow(10.0, db / 10.0), db);
}

SnrPoint SnrPoint::from_linear(double linear) {
  if (!(linear > 0.0) || !std::isfinite(linear)) throw DomainError("linear SNR must be positive and finite");
  return SnrPoint(linear, 10.0 * std::log10(linear));
}

double SnrPoint::log2() const { return std::log2(linear_); }

ChannelRealization sample_channel(const AntennaConfig& cfg, TrialRng& rng) {
  ChannelRealization h;
  h.H.resize(cfg.N, cfg.M);
  // Column-major fill order is part of the reproducibility contract.
  for (int j = 0; j < cfg.M; ++j) {
    for (int i = 0; i < cfg.N; ++i) h.H(i, j) = rng.complex_normal(1.0);
  }
  return h;
}

double siso_mutual_info(double gain_sq, SnrPoint eta) {
  if (!std::isfinite(gain_sq) || gain_sq < 0.0) throw NumericError("siso_mutual_info: invalid channel gain");
  return std::log1p(eta.linear() * gain_sq) / std::numbers::ln2;
}

double block_mutual_info(const ChannelRealization& h, SnrPoint eta, int M) {
  const Eigen::MatrixXcd& H = h.H;
  if (H.cols() != M) throw UsageError("block_mutual_info: H must have M columns");
  if (!H.allFinite()) throw NumericError("block_mutual_info: non-finite channel entry");
  if (H.rows() == 1 && H.cols() == 1) return siso_mutual_info(std::norm(H(0, 0)), eta);

  const double scale = eta.linear() / M;
  // det(I_N + c H H^*) = det(I_M + c H^* H); factor the smaller Gram matrix.
  Eigen::MatrixXcd gram = H.rows() <= H.cols() ? Eigen::MatrixXcd(H * H.adjoint()) : Eigen::MatrixXcd(H.adjoint() * H);
  gram *= scale;
  gram.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericError("block_mutual_info: Cholesky factorization failed");
  double bits = 0.0;
  const auto& factor = llt.matrixLLT();
  for (Eigen::Index i = 0; i < factor.rows(); ++i) bits += 2.0 * std::log2(factor(i, i).real());
  return std::max(bits, 0.0);
}

StopOutcome rateless_stop(double info_per_block, double R, int L) {
  if (L < 1) throw DomainError("rateless_stop: L must be >= 1");
  if (!(R >= 0.0)) throw DomainError("rateless_stop: R must be nonnegative");
  if (std::isnan(info_per_block) || info_per_block < 0.0) throw NumericError("rateless_stop: invalid information");
  const double needed = static_cast<double>(L) * R;
  for (int l = 1; l <= L; ++l) {
    if (static_cast<double>(l) * info_per_block >= needed) return StopOutcome{l};
  }
  return StopOutcome{0};
}

std::uint64_t StopHistogram::trials() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

OutageProfile profile_from_histogram(const StopHistogram& hist) {
  const int L = hist.L();
  const std::uint64_t n = hist.trials();
  if (L < 1 || n == 0) throw UsageError("profile_from_histogram: empty histogram");
  OutageProfile profile;
  profile.trials = n;
  profile.p_hat.assign(L + 1, 0.0);
  profile.std_error.assign(L + 1, 0.0);
  profile.p_hat[0] = 1.0;
  // Trials still undecided after block l: those stopping at l+1..L plus outage.
  std::uint64_t undecided = n;
  for (int l = 1; l <= L; ++l) {
    undecided -= hist.counts[l - 1];
    const double p = static_cast<double>(undecided) / static_cast<double>(n);
    profile.p_hat[l] = p;
    profile.std_error[l] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  }
  return profile;
}

double siso_outage_closed_form(SnrPoint eta, double rate_threshold) {
  if (!(rate_threshold >= 0.0)) throw DomainError("siso_outage_closed_form: threshold must be nonnegative");
  const double gain_threshold = std::expm1(rate_threshold * std::numbers::ln2) / eta.linear();
  return -std::expm1(-gain_threshold);
}

std::vector<double> siso_outage_profile(SnrPoint eta, double R, int L) {
  if (L < 1) throw DomainError("siso_outage_profile: L must be >= 1");
  std::vector<double> p(L + 1, 1.0);
  for (int l = 1; l <= L; ++l) p[l] = siso_outage_closed_form(eta, static_cast<double>(L) * R / l);
  return p;
}

EffectiveRate effective_rate(double R, int L, std::span<const double> p, std::optional<SnrPoint> eta) {
  if (L < 1 || p.size() < static_cast<std::size_t>(L)) throw UsageError("effective_rate: need p(0..L-1)");
  const double denom = std::accumulate(p.begin(), p.begin() + L, 0.0);
  EffectiveRate out;
  out.r_bar = R * L / denom;
  if (eta && eta->log2() != 0.0) out.r_hat = out.r_bar / eta->log2();
  return out;
}

EffectiveRate effective_rate(double R, int L, const OutageProfile& profile, std::optional<SnrPoint> eta) {
  return effective_rate(R, L, std::span<const double>(profile.p_hat), eta);
}

double effective_rate_stderr(double R, const StopHistogram& hist) {
  const int L = hist.L();
  const double n = static_cast<double>(hist.trials());
  // X = number of failed prefixes among 1..L-1 = min(stop, L) - 1.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int idx = 0; idx <= L; ++idx) {
    const double x = idx < L ? static_cast<double>(idx) : static_cast<double>(L - 1);
    const double c = static_cast<double>(hist.counts[idx]);
    sum += c * x;
    sum_sq += c * x * x;
  }
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0);
  const double denom = 1.0 + mean;
  return R * L / (denom * denom) * std::sqrt(var / n);
}

SlopeFit diversity_slope(std::span<const SlopePoint> points) {
  SlopeFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double p = points[i].probability;
    if (!(p > 0.0 && p < 1.0)) {
      fit.excluded.push_back(i);
      fit.warnings.push_back("point " + std::to_string(i) + " excluded: probability " + std::to_string(p) +
                             " is unestimable");
      continue;
    }
    xs.push_back(points[i].eta.log2());
    ys.push_back(-std::log2(p));
  }
  if (xs.size() < 2) throw UsageError("diversity_slope: need at least two points with 0 < p < 1");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[i] == xs[j]) throw UsageError("diversity_slope: SNR values must be distinct");
    }
  }

  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.rms_residual = std::sqrt(ss / n);

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  const std::size_t hi = order[order.size() - 1];
  const std::size_t lo = order[order.size() - 2];
  fit.secant = (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]);
  return fit;
}

}  // namespace rateless
