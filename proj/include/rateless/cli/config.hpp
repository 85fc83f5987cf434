#pragma once

// Flat key-value configuration shared by every subcommand. A config file
// holds `key = value` lines ('#' starts a comment); command-line flags
// override file values key by key.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rateless/code_search.hpp"
#include "rateless/dmt.hpp"

namespace rateless::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Rejected configuration. key() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::string& path);
/// Values in `overrides` replace those in `base`.
KeyValues merge(KeyValues base, const KeyValues& overrides);

enum class Mode { kDmt, kSimulate, kCodes, kVerify };
const char* mode_name(Mode mode);

struct ExperimentConfig {
  Mode mode = Mode::kDmt;
  int M = 1;
  int N = 1;
  int L = 2;
  int T = 1;
  std::optional<Rational> r_n;
  std::optional<double> R;
  std::vector<double> eta_db;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool trials_given = false;
  std::string out_dir = ".";
  std::optional<int> threads;

  // dmt
  int per_segment = 512;
  bool exact = false;
  std::optional<Rational> r_n_max;
  std::vector<int> L_sweep;  // empty: just L

  // codes
  int bits = 0;
  SearchBudget budget;
  bool require_exhaustive = false;
  std::optional<std::string> codebook;

  // verify
  double sigma = 3.0;
  std::vector<int> checks;  // empty: all
};

/// Validates every key against `mode` before anything runs. Unknown keys are
/// errors.
ExperimentConfig resolve_config(Mode mode, const KeyValues& values);

/// `key=value` lines describing the resolved configuration, for file headers.
std::vector<std::string> config_echo(const ExperimentConfig& cfg);

}  // namespace rateless::cli
