#include "rateless/format.hpp"

#include <cstdio>
#include <ostream>

namespace rateless {

std::string format_g12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_rational(Rational q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

void write_dmt_csv(std::ostream& out, const RatelessConfig& cfg, std::span<const Rational> r_n_grid,
                   bool exact_columns, std::span<const std::string> preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "r_n,l,r,d,scheme" << (exact_columns ? ",r_exact,d_exact" : "") << '\n';

  auto row = [&](Rational r_n, int l, Rational r, Rational d, const char* scheme) {
    out << format_g12(to_double(r_n)) << ',' << l << ',' << format_g12(to_double(r)) << ','
        << format_g12(to_double(d)) << ',' << scheme;
    if (exact_columns) out << ',' << format_rational(r) << ',' << format_rational(d);
    out << '\n';
  };

  const RatelessCurves curves = rateless_dmt_curve(cfg, r_n_grid);
  const auto& rl = curves.rateless;
  for (std::size_t i = 0; i < rl.size(); ++i) {
    row(rl.params[i], rl.segment_index[i], rl.points[i].r, rl.points[i].d, "rateless");
  }
  const auto& conv = curves.conventional;
  for (std::size_t i = 0; i < conv.size(); ++i) row(conv.params[i], 0, conv.points[i].r, conv.points[i].d, "conventional");

  // Parallel baselines share the grid through r = L * r_n.
  const Rational L(cfg.L);
  for (const Rational& r_n : conv.params) row(r_n, 0, L * r_n, parallel_identical_dmt(cfg, L * r_n), "parallel_identical");
  for (const Rational& r_n : conv.params) row(r_n, 0, L * r_n, parallel_iid_dmt(cfg, L * r_n), "parallel_iid");
}

}  // namespace rateless
