#include "rateless/permutation_code.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rateless {

PermutationCode::PermutationCode(Constellation constellation, std::vector<Permutation> perms)
    : constellation_(std::move(constellation)), perms_(std::move(perms)) {
  const std::size_t n = constellation_.size();
  if (perms_.empty()) throw DomainError("permutation code needs L >= 1 permutations");
  for (std::size_t k = 0; k < perms_.size(); ++k) {
    const Permutation& p = perms_[k];
    if (p.size() != n) throw DomainError("permutation " + std::to_string(k) + " has the wrong length");
    std::vector<bool> seen(n, false);
    for (const std::uint32_t v : p) {
      if (v >= n || seen[v]) throw DomainError("permutation " + std::to_string(k) + " is not a bijection");
      seen[v] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (perms_[0][i] != i) throw DomainError("the first permutation must be the identity");
  }
  table_.resize(n * perms_.size());
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < perms_.size(); ++k) table_[m * perms_.size() + k] = constellation_[perms_[k][m]];
  }
}

PermutationCode PermutationCode::identity(Constellation constellation, int L) {
  if (L < 1) throw DomainError("L must be >= 1");
  Permutation id(constellation.size());
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<std::uint32_t>(i);
  return PermutationCode(std::move(constellation), std::vector<Permutation>(L, id));
}

std::vector<cplx> encode(const PermutationCode& code, std::uint32_t message) {
  if (message >= code.messages()) throw DomainError("message out of range");
  std::vector<cplx> out(code.L());
  for (int k = 0; k < code.L(); ++k) out[k] = code.symbol(message, k);
  return out;
}

std::vector<double> prefix_product_distances(const PermutationCode& code) {
  const int L = code.L();
  std::vector<double> best(L, std::numeric_limits<double>::infinity());
  for (std::uint32_t a = 0; a < code.messages(); ++a) {
    for (std::uint32_t b = a + 1; b < code.messages(); ++b) {
      double prod = 1.0;
      for (int k = 0; k < L; ++k) {
        prod *= std::abs(code.symbol(a, k) - code.symbol(b, k));
        best[k] = std::min(best[k], prod);
      }
    }
  }
  return best;
}

Decision ml_decode_parallel(const PermutationCode& code, std::span<const cplx> y, std::span<const cplx> gains) {
  const std::size_t l = y.size();
  if (l < 1 || l > static_cast<std::size_t>(code.L()) || gains.size() != l) {
    throw UsageError("ml_decode: need 1..L observations with matching gains");
  }
  Decision out;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t m = 0; m < code.messages(); ++m) {
    double metric = 0.0;
    for (std::size_t k = 0; k < l; ++k) metric += std::norm(y[k] - gains[k] * code.symbol(m, static_cast<int>(k)));
    if (metric < best) {
      best = metric;
      out.message = m;
      out.degenerate = false;
    } else if (metric == best) {
      out.degenerate = true;
    }
  }
  return out;
}

Decision ml_decode_prefix(const PermutationCode& code, const ReceivedPrefix& rx) {
  const std::vector<cplx> gains(rx.y.size(), std::sqrt(rx.eta.linear()) * rx.h);
  return ml_decode_parallel(code, rx.y, gains);
}

}  // namespace rateless
