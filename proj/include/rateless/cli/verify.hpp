#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rateless::cli {

struct VerifyOptions {
  std::uint64_t seed = 20090601;
  std::optional<std::uint64_t> trials;  // replaces every Monte Carlo trial count
  double sigma = 3.0;                   // standard-error multiplier
  std::vector<int> checks;              // empty: all nine
  int alt_threads = 4;                  // thread count compared against 1 in check 9
};

struct CheckResult {
  int id = 0;
  std::string name;
  std::string measured;
  std::string tolerance;
  bool pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts);
void print_report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace rateless::cli
