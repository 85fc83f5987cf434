#pragma once

// SISO permutation codes: one 2^bits-point QAM alphabet per block, each
// block a relabelling of the same points. Used over the rateless channel by
// decoding codeword prefixes.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rateless/channel.hpp"

namespace rateless {

using cplx = std::complex<double>;

class Constellation {
 public:
  /// Square QAM for even `bits`, rectangular (bits = 3) or cross QAM for odd
  /// bits, BPSK for bits = 1. Unit average energy. 1 <= bits <= 8.
  static Constellation qam(int bits);
  /// Arbitrary points; checks size, distinctness and unit energy. Recovers
  /// the integer lattice when the points are exactly qam(bits).
  static Constellation from_points(int bits, std::vector<cplx> points);

  int bits() const { return bits_; }
  std::size_t size() const { return points_.size(); }
  std::span<const cplx> points() const { return points_; }
  const cplx& operator[](std::size_t i) const { return points_[i]; }

  /// Odd-integer coordinates of the unnormalised QAM, when known. Squared
  /// distances on the lattice are exact integers.
  const std::optional<std::vector<std::array<int, 2>>>& lattice() const { return lattice_; }

  double min_distance() const;
  double mean_energy() const;

 private:
  Constellation(int bits, std::vector<cplx> points, std::optional<std::vector<std::array<int, 2>>> lattice);
  int bits_;
  std::vector<cplx> points_;
  std::optional<std::vector<std::array<int, 2>>> lattice_;
};

Constellation build_qam(int bits);

using Permutation = std::vector<std::uint32_t>;

class PermutationCode {
 public:
  /// perms.size() == L; perms[0] must be the identity and every entry a
  /// bijection on {0 .. 2^bits - 1}.
  PermutationCode(Constellation constellation, std::vector<Permutation> perms);

  static PermutationCode identity(Constellation constellation, int L);

  int L() const { return static_cast<int>(perms_.size()); }
  int bits() const { return constellation_.bits(); }
  std::uint32_t messages() const { return static_cast<std::uint32_t>(constellation_.size()); }
  double rate() const { return static_cast<double>(bits()) / L(); }
  const Constellation& constellation() const { return constellation_; }
  const std::vector<Permutation>& perms() const { return perms_; }

  /// Symbol sent in block k (0-based) for message m.
  const cplx& symbol(std::uint32_t m, int k) const { return table_[static_cast<std::size_t>(m) * perms_.size() + k]; }

 private:
  Constellation constellation_;
  std::vector<Permutation> perms_;
  std::vector<cplx> table_;  // message-major codeword table
};

/// One symbol per block (unit-length blocks).
std::vector<cplx> encode(const PermutationCode& code, std::uint32_t message);

/// min over message pairs of prod_{k < l} |x_k - x'_k|, for l = 1..L.
std::vector<double> prefix_product_distances(const PermutationCode& code);

struct ReceivedPrefix {
  std::vector<cplx> y;  // y[k] = sqrt(eta) h x_k + n_k, k < l
  cplx h;
  SnrPoint eta;

  int l() const { return static_cast<int>(y.size()); }
};

struct Decision {
  std::uint32_t message = 0;
  bool degenerate = false;  // best metric tied by another hypothesis
};

/// argmin_m sum_k |y_k - g_k x_k(m)|^2 over the first y.size() blocks;
/// ties go to the smallest message index.
Decision ml_decode_parallel(const PermutationCode& code, std::span<const cplx> y, std::span<const cplx> gains);

Decision ml_decode_prefix(const PermutationCode& code, const ReceivedPrefix& rx);

}  // namespace rateless
