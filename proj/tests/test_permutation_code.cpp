#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <omp.h>

#include "rateless/code_search.hpp"
#include "rateless/code_trials.hpp"
#include "rateless/codebook_io.hpp"
#include "rateless/outage_kernels.hpp"
#include "rateless/permutation_code.hpp"

using namespace rateless;

namespace {

Permutation iota_perm(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

// Brute-force best full-codeword product distance for L = 2, enumerating
// every second-block permutation in floating point.
double brute_force_best_l2(const Constellation& c) {
  Permutation p = iota_perm(c.size());
  double best = 0.0;
  do {
    double worst = INFINITY;
    for (std::size_t a = 0; a < c.size(); ++a) {
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        worst = std::min(worst, std::abs(c[a] - c[b]) * std::abs(c[p[a]] - c[p[b]]));
      }
    }
    best = std::max(best, worst);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Distance scan in reverse block order without early exits.
std::uint32_t brute_force_ml(const PermutationCode& code, const std::vector<cplx>& y, cplx gain) {
  std::vector<double> metric(code.messages(), 0.0);
  for (int k = static_cast<int>(y.size()) - 1; k >= 0; --k) {
    const std::vector<cplx> cw_symbols = [&] {
      std::vector<cplx> s(code.messages());
      for (std::uint32_t m = 0; m < code.messages(); ++m) s[m] = code.constellation()[code.perms()[k][m]];
      return s;
    }();
    for (std::uint32_t m = 0; m < code.messages(); ++m) {
      const cplx diff = y[k] - gain * cw_symbols[m];
      metric[m] += diff.real() * diff.real() + diff.imag() * diff.imag();
    }
  }
  return static_cast<std::uint32_t>(std::min_element(metric.begin(), metric.end()) - metric.begin());
}

class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace

TEST_CASE("build_qam") {
  const Constellation q4 = build_qam(2);
  REQUIRE(q4.size() == 4);
  const double a = 1.0 / std::sqrt(2.0);
  for (const cplx& p : q4.points()) {
    CHECK(std::abs(std::abs(p.real()) - a) < 1e-15);
    CHECK(std::abs(std::abs(p.imag()) - a) < 1e-15);
  }
  const Constellation bpsk = build_qam(1);
  CHECK(bpsk[0] == cplx(-1.0, 0.0));
  CHECK(bpsk[1] == cplx(1.0, 0.0));

  for (int bits = 1; bits <= 8; ++bits) {
    const Constellation c = build_qam(bits);
    CHECK(c.size() == (std::size_t{1} << bits));
    CHECK(std::abs(c.mean_energy() - 1.0) <= 1e-12);
    std::set<std::pair<double, double>> distinct;
    for (const cplx& p : c.points()) distinct.insert({p.real(), p.imag()});
    CHECK(distinct.size() == c.size());
    CHECK(c.lattice().has_value());
  }
  CHECK_THROWS_AS(build_qam(0), DomainError);
  CHECK_THROWS_AS(build_qam(9), DomainError);
}

TEST_CASE("constellation invariants are enforced") {
  CHECK_THROWS_AS(Constellation::from_points(0, {cplx(1.0, 0.0)}), DomainError);
  CHECK_THROWS_AS(Constellation::from_points(1, {cplx(1.0, 0.0), cplx(1.0, 0.0)}), DomainError);
  CHECK_THROWS_AS(Constellation::from_points(1, {cplx(2.0, 0.0), cplx(-2.0, 0.0)}), DomainError);
  const Constellation ok = Constellation::from_points(1, {cplx(0.0, 1.0), cplx(0.0, -1.0)});
  CHECK(!ok.lattice().has_value());
  const Constellation ref = build_qam(2);
  const Constellation qam = Constellation::from_points(2, std::vector<cplx>(ref.points().begin(), ref.points().end()));
  CHECK(qam.lattice().has_value());
}

TEST_CASE("permutation code invariants") {
  const Constellation c = build_qam(2);
  CHECK_THROWS_AS(PermutationCode(c, {{1, 0, 2, 3}}), DomainError);                // first not identity
  CHECK_THROWS_AS(PermutationCode(c, {{0, 1, 2, 3}, {0, 0, 1, 2}}), DomainError);  // not a bijection
  CHECK_THROWS_AS(PermutationCode(c, {{0, 1, 2, 3}, {0, 1, 2}}), DomainError);     // wrong length
  CHECK_THROWS_AS(PermutationCode(c, {}), DomainError);
}

TEST_CASE("search: BPSK with L = 2 ties and keeps the identity") {
  const SearchResult res = search_permutation_code(2, 1);
  CHECK(res.exhaustive);
  CHECK(res.code.perms()[1] == Permutation{0, 1});
  // Both candidates give product distance 2 * 2.
  CHECK(res.evidence.min_product_distance == doctest::Approx(4.0));
}

TEST_CASE("search: exhaustive 4-QAM with L = 2") {
  const SearchResult res = search_permutation_code(2, 2);
  CHECK(res.exhaustive);
  CHECK(res.evaluations == 24);
  const PermutationCode identity = PermutationCode::identity(build_qam(2), 2);
  const double id_dist = prefix_product_distances(identity).back();
  // Four adjacent pairs cannot all land on the two diagonals, so no
  // permutation beats repetition on the minimum itself (both equal 2)...
  const double best = brute_force_best_l2(build_qam(2));
  CHECK(best == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(id_dist == doctest::Approx(best).epsilon(1e-12));
  CHECK(res.evidence.min_product_distance == doctest::Approx(best).epsilon(1e-12));
  // ...but the searched code halves the number of pairs at the minimum.
  const SearchScore searched = search_objective(res.code);
  const SearchScore rep = search_objective(identity);
  CHECK(rep.multiplicity.front() == 4);
  CHECK(searched.multiplicity.front() == 2);
  CHECK(searched.better_than(rep));
  CHECK(!rep.better_than(searched));
  CHECK(res.evidence.prefix_min_product_distance.front() == doctest::Approx(build_qam(2).min_distance()));
}

TEST_CASE("search: exhaustive 8-point codes reach the brute-force optimum") {
  const SearchResult res = search_permutation_code(2, 3);
  CHECK(res.exhaustive);
  CHECK(res.evidence.min_product_distance == doctest::Approx(brute_force_best_l2(build_qam(3))).epsilon(1e-12));
}

TEST_CASE("search: L = 1 is the identity") {
  for (int bits : {1, 2, 4, 6}) {
    const SearchResult res = search_permutation_code(1, bits);
    CHECK(res.code.L() == 1);
    CHECK(res.evidence.min_product_distance == doctest::Approx(build_qam(bits).min_distance()));
  }
}

TEST_CASE("search: randomized mode is deterministic across thread counts") {
  SearchBudget budget;
  budget.max_evaluations = 40000;
  budget.restarts = 8;
  budget.seed = 5;
  std::vector<Permutation> reference;
  for (int threads : {1, 3}) {
    ThreadCount tc(threads);
    const SearchResult res = search_permutation_code(3, 4, budget);
    CHECK(!res.exhaustive);
    CHECK(res.evidence.min_product_distance > 0.0);
    if (reference.empty()) {
      reference = res.code.perms();
    } else {
      CHECK(res.code.perms() == reference);
    }
  }
  // Hill climbing improves on the repetition code.
  const SearchResult res = search_permutation_code(3, 4, budget);
  const PermutationCode identity = PermutationCode::identity(build_qam(4), 3);
  CHECK(search_objective(res.code).better_than(search_objective(identity)));
}

TEST_CASE("search: budget and range errors") {
  SearchBudget none;
  none.max_evaluations = 0;
  CHECK_THROWS_AS(search_permutation_code(2, 2, none), DomainError);
  SearchBudget too_small;
  too_small.max_evaluations = 3;
  too_small.restarts = 8;
  CHECK_THROWS_AS(search_permutation_code(3, 4, too_small), DomainError);
  CHECK_THROWS_AS(search_permutation_code(6, 2), DomainError);
  CHECK_THROWS_AS(search_permutation_code(2, 9), DomainError);
}

TEST_CASE("encode") {
  const PermutationCode rep = PermutationCode::identity(build_qam(2), 2);
  for (std::uint32_t m = 0; m < 4; ++m) {
    const auto cw = encode(rep, m);
    CHECK(cw[0] == rep.constellation()[m]);
    CHECK(cw[1] == rep.constellation()[m]);
  }
  CHECK_THROWS_AS(encode(rep, 4), DomainError);

  const SearchResult res = search_permutation_code(2, 2);
  const auto cw0 = encode(res.code, 0);
  CHECK(cw0[0] == res.code.constellation()[0]);
  CHECK(cw0[1] == res.code.constellation()[res.code.perms()[1][0]]);

  // Distinct messages differ in every block; per-block energy is 1.
  for (int k = 0; k < 2; ++k) {
    double energy = 0.0;
    for (std::uint32_t a = 0; a < 4; ++a) {
      energy += std::norm(encode(res.code, a)[k]);
      for (std::uint32_t b = a + 1; b < 4; ++b) CHECK(encode(res.code, a)[k] != encode(res.code, b)[k]);
    }
    CHECK(std::abs(energy / 4.0 - 1.0) <= 1e-12);
  }
}

TEST_CASE("prefixes with positive product distance are injective") {
  for (int L = 1; L <= 3; ++L) {
    for (int bits = 1; bits <= 4; ++bits) {
      SearchBudget budget;
      budget.max_evaluations = 20000;
      const SearchResult res = search_permutation_code(L, bits, budget);
      const auto& dist = res.evidence.prefix_min_product_distance;
      for (int l = 1; l <= L; ++l) {
        if (dist[l - 1] <= 0.0) continue;
        std::set<std::vector<std::pair<double, double>>> seen;
        for (std::uint32_t m = 0; m < res.code.messages(); ++m) {
          std::vector<std::pair<double, double>> prefix;
          for (int k = 0; k < l; ++k) prefix.push_back({res.code.symbol(m, k).real(), res.code.symbol(m, k).imag()});
          seen.insert(prefix);
        }
        CHECK(seen.size() == res.code.messages());
      }
    }
  }
}

TEST_CASE("ml_decode_prefix") {
  const SearchResult res = search_permutation_code(2, 2);
  const PermutationCode& code = res.code;
  const SnrPoint eta = SnrPoint::from_db(10.0);
  const cplx h(0.3, -0.8);

  SUBCASE("noiseless reception recovers every message on every prefix") {
    for (std::uint32_t m = 0; m < code.messages(); ++m) {
      for (int l = 1; l <= code.L(); ++l) {
        ReceivedPrefix rx{{}, h, eta};
        for (int k = 0; k < l; ++k) rx.y.push_back(std::sqrt(eta.linear()) * h * code.symbol(m, k));
        const Decision d = ml_decode_prefix(code, rx);
        CHECK(d.message == m);
        CHECK(!d.degenerate);
      }
    }
  }
  SUBCASE("zero channel falls back to message 0") {
    const ReceivedPrefix rx{{cplx(0.4, 0.1), cplx(-1.0, 2.0)}, cplx(0.0, 0.0), eta};
    const Decision d = ml_decode_prefix(code, rx);
    CHECK(d.message == 0);
    CHECK(d.degenerate);
  }
  SUBCASE("blanked trailing blocks do not change the decision") {
    TrialRng rng(3, StreamTag::kNoise, 0);
    for (int i = 0; i < 500; ++i) {
      const cplx g = std::sqrt(eta.linear()) * rng.complex_normal();
      const std::uint32_t m = static_cast<std::uint32_t>(rng.below(code.messages()));
      const std::vector<cplx> y{g * code.symbol(m, 0) + rng.complex_normal(), rng.complex_normal()};
      const std::vector<cplx> blanked{g, cplx(0.0, 0.0)};
      const ReceivedPrefix prefix{{y[0]}, g / std::sqrt(eta.linear()), eta};
      CHECK(ml_decode_parallel(code, y, blanked).message == ml_decode_prefix(code, prefix).message);
    }
  }
}

TEST_CASE("ML decoder agrees with the brute-force oracle on random noisy instances") {
  SearchBudget budget;
  budget.max_evaluations = 20000;
  const SearchResult res = search_permutation_code(3, 4, budget);
  const PermutationCode& code = res.code;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    TrialRng rng(77, StreamTag::kNoise, i);
    const SnrPoint eta = SnrPoint::from_db(rng.uniform() * 30.0);
    const cplx h = rng.complex_normal();
    const int l = 1 + static_cast<int>(rng.below(3));
    const std::uint32_t m = static_cast<std::uint32_t>(rng.below(code.messages()));
    ReceivedPrefix rx{{}, h, eta};
    for (int k = 0; k < l; ++k) rx.y.push_back(std::sqrt(eta.linear()) * h * code.symbol(m, k) + rng.complex_normal());
    CHECK(ml_decode_prefix(code, rx).message == brute_force_ml(code, rx.y, std::sqrt(eta.linear()) * h));
  }
}

TEST_CASE("codebook files round-trip and report line numbers") {
  const SearchResult res = search_permutation_code(2, 3);
  const std::string text = codebook_to_string(res.code);
  const PermutationCode loaded = codebook_from_string(text);
  CHECK(codebook_to_string(loaded) == text);
  CHECK(loaded.perms() == res.code.perms());
  CHECK(loaded.constellation().lattice().has_value());

  auto line_of = [](const std::string& bad) {
    try {
      codebook_from_string(bad);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("x\n") == 1);
  CHECK(line_of("2\n2\n0.7,0.7\n") == 4);
  CHECK(line_of("1\n1\n-1,0\n1;0\n0 1\n") == 4);
  CHECK(line_of("2\n1\n-1,0\n1,0\n1 0\n0 1\n") == 5);  // first permutation must be identity
  CHECK(line_of("1\n1\n-1,0\n1,0\n0 1 1\n") == 5);
  CHECK(line_of("1\n1\n-2,0\n2,0\n0 1\n") == 3);      // energy
  CHECK(line_of("1\n1\n-1,0\n1,0\n0 1\nextra\n") == 6);
}

TEST_CASE("rateless code trials") {
  const SearchResult res = search_permutation_code(2, 2);
  const PermutationCode& code = res.code;

  SUBCASE("rate must match bits / L") {
    CHECK_THROWS_AS(run_rateless_code_trials(code, SnrPoint::from_db(10), 10, 1, 0.5), UsageError);
    CHECK_NOTHROW(run_rateless_code_trials(code, SnrPoint::from_db(10), 10, 1, 1.0));
  }
  SUBCASE("very high SNR: no errors, always the first block") {
    const CodeTrialResult r = run_rateless_code_trials(code, SnrPoint::from_db(90), 20000, 2);
    CHECK(r.errors.p_e == 0.0);
    CHECK(r.errors.stop_hist[0] == 20000);
  }
  SUBCASE("decomposition sums and serial/OpenMP agreement") {
    const std::vector<SnrPoint> etas{SnrPoint::from_db(5), SnrPoint::from_db(15)};
    const auto serial = code_trial_counts_serial(code, etas, 20000, 9);
    for (int threads : {1, 4}) {
      ThreadCount tc(threads);
      CHECK(code_trial_counts_omp(code, etas, 20000, 9) == serial);
    }
    for (const auto& c : serial) {
      const ErrorDecomposition d = decompose(c);
      const double sum = std::accumulate(d.joint_err.begin(), d.joint_err.end(), 0.0);
      CHECK(d.p_e == doctest::Approx(sum).epsilon(1e-15));
      for (double v : d.joint_err) CHECK((v >= 0.0 && v <= 1.0));
      // Outage trials are errors attributed to the last block.
      CHECK(c.errors.back() >= c.stop_hist.back());
    }
  }
  SUBCASE("stop statistics match the channel simulator exactly") {
    const SnrPoint eta = SnrPoint::from_db(12);
    const CodeTrialResult r = run_rateless_code_trials(code, eta, 30000, 21);
    const OutageProfile p = estimate_outage_profile(RatelessConfig({1, 1}, 2), eta, 1.0, 30000, 21);
    CHECK(r.profile.p_hat == p.p_hat);
  }
  SUBCASE("searched code is no worse than repetition under common random numbers") {
    const PermutationCode rep = PermutationCode::identity(build_qam(2), 2);
    const PairedComparison cmp = paired_code_comparison(code, rep, SnrPoint::from_db(20), 200000, 4);
    CHECK(cmp.diff <= 3.0 * cmp.diff_stderr);
    CHECK(cmp.only_b > cmp.only_a);
  }
}

TEST_CASE("universality_margin") {
  const SearchResult res = search_permutation_code(2, 2);
  const std::vector<SnrPoint> grid{SnrPoint::from_db(10), SnrPoint::from_db(20), SnrPoint::from_db(30),
                                   SnrPoint::from_db(40)};
  const UniversalityEvidence ev = universality_margin(res.code, grid, 400000, 8);
  REQUIRE(ev.nonoutage_cond_err.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(ev.nonoutage_cond_err[i] < ev.nonoutage_cond_err[i - 1]);
  REQUIRE(ev.cells.size() == 2);
  CHECK(ev.cells[0][0].estimable);
  CHECK(std::isfinite(ev.decay_estimate));

  SUBCASE("L = 1 reduces to uncoded QAM over the stopping set") {
    const PermutationCode single = PermutationCode::identity(build_qam(2), 1);
    const UniversalityEvidence e1 = universality_margin(single, grid, 50000, 8);
    CHECK(e1.cells.size() == 1);
    CHECK(e1.min_product_distance == doctest::Approx(build_qam(2).min_distance()));
    const auto counts = code_trial_counts_omp(single, grid, 50000, 8);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(e1.cells[0][i].samples == counts[i].stop_hist[0]);
    }
  }
}
