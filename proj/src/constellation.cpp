#include <cmath>
#include <numeric>
#include <string>

#include "rateless/permutation_code.hpp"

namespace rateless {

namespace {

using Lattice = std::vector<std::array<int, 2>>;

// Row-major grid of odd coordinates, width x height, minus `corner` x
// `corner` squares at each corner (cross constellations).
Lattice odd_grid(int width, int height, int corner) {
  Lattice pts;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const bool in_corner_col = col < corner || col >= width - corner;
      const bool in_corner_row = row < corner || row >= height - corner;
      if (corner > 0 && in_corner_col && in_corner_row) continue;
      pts.push_back({2 * col - (width - 1), 2 * row - (height - 1)});
    }
  }
  return pts;
}

Lattice qam_lattice(int bits) {
  switch (bits) {
    case 1: return {{-1, 0}, {1, 0}};
    case 3: return odd_grid(4, 2, 0);
    case 5: return odd_grid(6, 6, 1);
    case 7: return odd_grid(12, 12, 2);
    default: {
      const int side = 1 << (bits / 2);
      return odd_grid(side, side, 0);
    }
  }
}

}  // namespace

Constellation::Constellation(int bits, std::vector<cplx> points, std::optional<Lattice> lattice)
    : bits_(bits), points_(std::move(points)), lattice_(std::move(lattice)) {}

Constellation Constellation::qam(int bits) {
  if (bits < 1 || bits > 8) throw DomainError("QAM bits must be in 1..8, got " + std::to_string(bits));
  Lattice lattice = qam_lattice(bits);
  double energy = 0.0;
  for (const auto& p : lattice) energy += p[0] * p[0] + p[1] * p[1];
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(lattice.size()));
  std::vector<cplx> points;
  points.reserve(lattice.size());
  for (const auto& p : lattice) points.emplace_back(p[0] * scale, p[1] * scale);
  return Constellation(bits, std::move(points), std::move(lattice));
}

Constellation Constellation::from_points(int bits, std::vector<cplx> points) {
  if (bits < 1 || bits > 8) throw DomainError("constellation bits must be in 1..8");
  if (points.size() != (std::size_t{1} << bits)) {
    throw DomainError("constellation needs 2^bits points, got " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].real()) || !std::isfinite(points[i].imag())) {
      throw DomainError("constellation point " + std::to_string(i) + " is not finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) throw DomainError("constellation points must be distinct");
    }
  }
  Constellation c(bits, std::move(points), std::nullopt);
  if (std::abs(c.mean_energy() - 1.0) > 1e-12) throw DomainError("constellation must have unit average energy");
  const Constellation reference = qam(bits);
  if (std::equal(c.points_.begin(), c.points_.end(), reference.points_.begin())) c.lattice_ = reference.lattice_;
  return c;
}

Constellation build_qam(int bits) { return Constellation::qam(bits); }

double Constellation::min_distance() const {
  double best = INFINITY;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) best = std::min(best, std::abs(points_[i] - points_[j]));
  }
  return best;
}

double Constellation::mean_energy() const {
  const double total =
      std::accumulate(points_.begin(), points_.end(), 0.0, [](double acc, const cplx& p) { return acc + std::norm(p); });
  return total / static_cast<double>(points_.size());
}

}  // namespace rateless
