#include "rateless/code_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <omp.h>

namespace rateless {

namespace {

constexpr int kMaxSearchBlocks = 5;
// Per prefix, longest first: (min squared product, ~multiplicity). Larger is
// better under plain lexicographic comparison.
using Objective = std::array<std::uint64_t, 2 * kMaxSearchBlocks>;

// Squared lattice distances are at most 2 * 30^2 = 1800, so a product over
// five blocks stays below 2^64.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const Constellation& c, int L) : n_(c.size()), L_(L), dsq_(n_ * n_) {
    const auto& lattice = *c.lattice();
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::int64_t dx = lattice[i][0] - lattice[j][0];
        const std::int64_t dy = lattice[i][1] - lattice[j][1];
        dsq_[i * n_ + j] = static_cast<std::uint64_t>(dx * dx + dy * dy);
      }
    }
  }

  Objective operator()(const std::vector<Permutation>& perms) const {
    std::array<std::uint64_t, kMaxSearchBlocks> mins;
    std::array<std::uint64_t, kMaxSearchBlocks> count{};
    mins.fill(std::numeric_limits<std::uint64_t>::max());
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) {
        std::uint64_t prod = 1;
        for (int k = 0; k < L_; ++k) {
          prod *= dsq_[perms[k][a] * n_ + perms[k][b]];
          if (prod < mins[k]) {
            mins[k] = prod;
            count[k] = 1;
          } else if (prod == mins[k]) {
            ++count[k];
          }
        }
      }
    }
    Objective obj{};
    for (int k = 0; k < L_; ++k) {
      obj[2 * (L_ - 1 - k)] = mins[k];
      obj[2 * (L_ - 1 - k) + 1] = ~count[k];
    }
    return obj;
  }

 private:
  std::size_t n_;
  int L_;
  std::vector<std::uint64_t> dsq_;
};

Permutation identity_perm(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

std::optional<std::uint64_t> checked_pow_factorial(std::size_t n, int exponent) {
  std::uint64_t fact = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (fact > std::numeric_limits<std::uint64_t>::max() / i) return std::nullopt;
    fact *= i;
  }
  std::uint64_t total = 1;
  for (int e = 0; e < exponent; ++e) {
    if (total > std::numeric_limits<std::uint64_t>::max() / fact) return std::nullopt;
    total *= fact;
  }
  return total;
}

// Lexicographic-order permutation with the given rank.
void unrank(std::uint64_t rank, std::size_t n, Permutation& out) {
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  std::uint64_t fact = 1;
  for (std::size_t i = 2; i < n; ++i) fact *= i;
  out.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t remaining = n - pos;
    const std::uint64_t digit = rank / fact;
    rank %= fact;
    out[pos] = pool[digit];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
    if (remaining > 1) fact /= (remaining - 1);
  }
}

void decode_candidate(std::uint64_t index, std::uint64_t per_block, std::size_t n, std::vector<Permutation>& perms) {
  // Block 1 (perms[1]) is the most significant digit.
  for (std::size_t k = perms.size() - 1; k >= 1; --k) {
    unrank(index % per_block, n, perms[k]);
    index /= per_block;
  }
}

struct Candidate {
  Objective obj{};
  std::vector<Permutation> perms;
  std::uint64_t evaluations = 0;
};

bool better(const Objective& a, const std::vector<Permutation>& pa, const Objective& b,
            const std::vector<Permutation>& pb) {
  if (a != b) return a > b;
  return pa < pb;
}

Candidate exhaustive_search(const ObjectiveEvaluator& eval, std::size_t n, int L, std::uint64_t total) {
  const std::uint64_t per_block = *checked_pow_factorial(n, 1);
  Candidate best;
  best.perms.assign(L, identity_perm(n));
  best.obj = eval(best.perms);
  std::uint64_t best_index = 0;
  const auto count = static_cast<std::int64_t>(total);

#pragma omp parallel
  {
    std::vector<Permutation> perms(L, identity_perm(n));
    Objective local_obj = best.obj;
    std::uint64_t local_index = 0;
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < count; ++c) {
      decode_candidate(static_cast<std::uint64_t>(c), per_block, n, perms);
      const Objective obj = eval(perms);
      if (obj > local_obj) {
        local_obj = obj;
        local_index = static_cast<std::uint64_t>(c);
      }
    }
#pragma omp critical(rateless_search_merge)
    if (local_obj > best.obj || (local_obj == best.obj && local_index < best_index)) {
      best.obj = local_obj;
      best_index = local_index;
    }
  }
  decode_candidate(best_index, per_block, n, best.perms);
  best.evaluations = total;
  return best;
}

Candidate climb(const ObjectiveEvaluator& eval, std::size_t n, int L, std::uint64_t cap, std::uint64_t seed,
                int restart) {
  TrialRng rng(seed, StreamTag::kSearch, static_cast<std::uint64_t>(restart));
  Candidate cur;
  cur.perms.assign(L, identity_perm(n));
  for (int k = 1; k < L; ++k) {
    auto& p = cur.perms[k];
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
  }
  cur.obj = eval(cur.perms);
  cur.evaluations = 1;

  bool improved = true;
  while (improved && cur.evaluations < cap) {
    improved = false;
    for (int k = 1; k < L && cur.evaluations < cap; ++k) {
      auto& p = cur.perms[k];
      for (std::size_t i = 0; i < n && cur.evaluations < cap; ++i) {
        for (std::size_t j = i + 1; j < n && cur.evaluations < cap; ++j) {
          std::swap(p[i], p[j]);
          const Objective obj = eval(cur.perms);
          ++cur.evaluations;
          if (obj > cur.obj) {
            cur.obj = obj;
            improved = true;
          } else {
            std::swap(p[i], p[j]);
          }
        }
      }
    }
  }
  return cur;
}

Candidate randomized_search(const ObjectiveEvaluator& eval, std::size_t n, int L, const SearchBudget& budget) {
  const std::uint64_t cap = budget.max_evaluations / static_cast<std::uint64_t>(budget.restarts);
  std::vector<Candidate> results(budget.restarts);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < budget.restarts; ++r) results[r] = climb(eval, n, L, cap, budget.seed, r);

  Candidate best = results.front();
  std::uint64_t total = 0;
  for (const auto& c : results) {
    total += c.evaluations;
    if (better(c.obj, c.perms, best.obj, best.perms)) best = c;
  }
  best.evaluations = total;
  return best;
}

}  // namespace

SearchScore search_objective(const PermutationCode& code) {
  if (!code.constellation().lattice()) throw UsageError("search_objective: constellation has no QAM lattice");
  if (code.L() > kMaxSearchBlocks) throw DomainError("search_objective: L must be <= 5");
  const ObjectiveEvaluator eval(code.constellation(), code.L());
  const Objective obj = eval(code.perms());
  SearchScore score;
  for (int i = 0; i < code.L(); ++i) {
    score.min_sq_product.push_back(obj[2 * i]);
    score.multiplicity.push_back(~obj[2 * i + 1]);
  }
  return score;
}

bool SearchScore::better_than(const SearchScore& other) const {
  for (std::size_t i = 0; i < min_sq_product.size() && i < other.min_sq_product.size(); ++i) {
    if (min_sq_product[i] != other.min_sq_product[i]) return min_sq_product[i] > other.min_sq_product[i];
    if (multiplicity[i] != other.multiplicity[i]) return multiplicity[i] < other.multiplicity[i];
  }
  return false;
}

UniversalityEvidence distance_evidence(const PermutationCode& code) {
  UniversalityEvidence ev;
  ev.prefix_min_product_distance = prefix_product_distances(code);
  ev.min_product_distance = ev.prefix_min_product_distance.back();
  const auto worst = std::min_element(ev.prefix_min_product_distance.begin(), ev.prefix_min_product_distance.end());
  ev.worst_prefix = static_cast<int>(worst - ev.prefix_min_product_distance.begin()) + 1;
  ev.decay_estimate = std::numeric_limits<double>::quiet_NaN();
  return ev;
}

SearchResult search_permutation_code(int L, int bits, const SearchBudget& budget) {
  if (L < 1 || L > kMaxSearchBlocks) throw DomainError("search_permutation_code: L must be in 1..5");
  Constellation constellation = build_qam(bits);
  if (budget.max_evaluations == 0 || budget.restarts < 1) throw DomainError("search_permutation_code: infeasible budget");
  const std::size_t n = constellation.size();
  const ObjectiveEvaluator eval(constellation, L);

  const auto total = checked_pow_factorial(n, L - 1);
  Candidate best;
  bool exhaustive = false;
  if (total && *total <= budget.max_evaluations) {
    best = exhaustive_search(eval, n, L, *total);
    exhaustive = true;
  } else {
    if (budget.max_evaluations / static_cast<std::uint64_t>(budget.restarts) < 1) {
      throw DomainError("search_permutation_code: infeasible budget");
    }
    best = randomized_search(eval, n, L, budget);
  }

  PermutationCode code(std::move(constellation), std::move(best.perms));
  UniversalityEvidence evidence = distance_evidence(code);
  return SearchResult{std::move(code), std::move(evidence), exhaustive, best.evaluations};
}

}  // namespace rateless
