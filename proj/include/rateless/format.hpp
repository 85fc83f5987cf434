#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "rateless/dmt.hpp"

namespace rateless {

/// 12 significant digits, the precision used in every emitted CSV.
std::string format_g12(double x);
/// Shortest form that reads back to the same double.
std::string format_exact(double x);
std::string format_rational(Rational q);

/// Writes `r_n,l,r,d,scheme[,r_exact,d_exact]` rows for the rateless,
/// conventional and both parallel-channel curves over one r_n grid.
void write_dmt_csv(std::ostream& out, const RatelessConfig& cfg, std::span<const Rational> r_n_grid,
                   bool exact_columns, std::span<const std::string> preamble = {});

}  // namespace rateless
