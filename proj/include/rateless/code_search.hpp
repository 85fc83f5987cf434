#pragma once

#include <cstdint>
#include <vector>

#include "rateless/permutation_code.hpp"

namespace rateless {

struct SearchBudget {
  std::uint64_t max_evaluations = 2'000'000;  // objective evaluations
  int restarts = 16;                         // randomized mode only
  std::uint64_t seed = 1;
};

/// Evidence for the code's robustness over the rateless channel. Distances
/// come from the search; the decay fields are filled by universality_margin.
struct UniversalityEvidence {
  std::vector<double> prefix_min_product_distance;  // index l-1 for prefix {1..l}
  double min_product_distance = 0.0;                // over the full codeword
  int worst_prefix = 1;                             // prefix with the smallest distance

  struct Cell {
    std::uint64_t samples = 0;  // trials that stopped at l without outage
    std::uint64_t errors = 0;
    double cond_err = 0.0;
    double std_error = 0.0;
    bool estimable = false;
  };
  std::vector<double> eta_db;
  std::vector<std::vector<Cell>> cells;          // [l-1][eta index]
  std::vector<double> nonoutage_cond_err;        // per eta, all prefixes pooled
  double decay_estimate = 0.0;                   // slope of ln(-ln P) vs ln eta; NaN if unestimable
};

struct SearchResult {
  PermutationCode code;
  UniversalityEvidence evidence;
  bool exhaustive = false;
  std::uint64_t evaluations = 0;
};

/// Max-min product distance, compared lexicographically over prefixes
/// L, L-1, ..., 1; within a prefix, equal minima are ranked by how many
/// message pairs attain the minimum (fewer wins). Exhaustive when ((2^bits)!)^(L-1) <= max_evaluations,
/// otherwise seeded random restarts with pairwise-swap hill climbing. Ties
/// go to the lexicographically smallest permutation tuple. 1 <= L <= 5.
SearchResult search_permutation_code(int L, int bits, const SearchBudget& budget = {});

/// The search objective in lattice units, prefixes longest first.
struct SearchScore {
  std::vector<std::uint64_t> min_sq_product;  // min over pairs of prod |d_k|^2
  std::vector<std::uint64_t> multiplicity;    // pairs attaining that minimum

  bool better_than(const SearchScore& other) const;
};

/// Requires a constellation with a QAM lattice and L <= 5.
SearchScore search_objective(const PermutationCode& code);

UniversalityEvidence distance_evidence(const PermutationCode& code);

}  // namespace rateless
