#include "rateless/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rateless/format.hpp"

namespace rateless::cli {

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}

namespace {

const std::set<std::string> kKnownKeys = {
    "M",      "N",     "L",        "T",       "r_n",       "R",     "eta_db_list", "trials", "seed",   "out",
    "threads", "per_segment", "exact", "r_n_max", "L_sweep", "bits", "budget",      "restarts", "codebook",
    "sigma",  "checks"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text, Int lo, Int hi) {
  Int value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  if (value < lo || value > hi) {
    throw ConfigError(key, "value " + t + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return value;
}

Rational parse_rational_key(const std::string& key, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const UsageError&) {
    throw ConfigError(key, "expected a rational like 3/4 or 0.75, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

class Reader {
 public:
  explicit Reader(const KeyValues& values) : values_(values) {}

  const std::string* get(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }
  const std::string& require(const std::string& key, Mode mode) const {
    const std::string* v = get(key);
    if (!v) throw ConfigError(key, std::string("required by ") + mode_name(mode));
    return *v;
  }

 private:
  const KeyValues& values_;
};

std::vector<double> parse_eta_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double("eta_db_list", item));
  if (out.empty()) throw ConfigError("eta_db_list", "empty list");
  return out;
}

std::uint64_t exhaustive_count(int bits, int L) {
  const std::uint64_t n = std::uint64_t{1} << bits;
  long double total = 1.0L;
  long double fact = 1.0L;
  for (std::uint64_t i = 2; i <= n; ++i) fact *= static_cast<long double>(i);
  for (int k = 1; k < L; ++k) total *= fact;
  return total > 1e18L ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(total);
}

}  // namespace

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kDmt: return "dmt";
    case Mode::kSimulate: return "simulate";
    case Mode::kCodes: return "codes";
    case Mode::kVerify: return "verify";
  }
  return "?";
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown key (line " + std::to_string(line_no) + ")");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

KeyValues merge(KeyValues base, const KeyValues& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

ExperimentConfig resolve_config(Mode mode, const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown key");
  }
  const Reader in(values);
  ExperimentConfig cfg;
  cfg.mode = mode;
  constexpr int kMaxAntennas = 64;
  constexpr int kMaxBlocks = 1024;

  if (const auto* v = in.get("seed")) {
    cfg.seed = parse_int<std::uint64_t>("seed", *v, 0, std::numeric_limits<std::uint64_t>::max());
    cfg.seed_given = true;
  }
  if (const auto* v = in.get("trials")) {
    cfg.trials = parse_int<std::uint64_t>("trials", *v, 1, std::uint64_t{1} << 40);
    cfg.trials_given = true;
  }
  if (const auto* v = in.get("out")) {
    if (v->empty()) throw ConfigError("out", "empty path");
    cfg.out_dir = *v;
  }
  if (const auto* v = in.get("threads")) cfg.threads = parse_int<int>("threads", *v, 1, 1024);
  if (const auto* v = in.get("T")) cfg.T = parse_int<int>("T", *v, 1, 1 << 20);

  switch (mode) {
    case Mode::kDmt: {
      cfg.M = parse_int<int>("M", in.require("M", mode), 1, kMaxAntennas);
      cfg.N = parse_int<int>("N", in.require("N", mode), 1, kMaxAntennas);
      cfg.L = parse_int<int>("L", in.require("L", mode), 1, kMaxBlocks);
      if (const auto* v = in.get("per_segment")) cfg.per_segment = parse_int<int>("per_segment", *v, 1, 1 << 16);
      if (const auto* v = in.get("exact")) cfg.exact = parse_bool("exact", *v);
      if (const auto* v = in.get("r_n")) {
        cfg.r_n = parse_rational_key("r_n", *v);
        if (*cfg.r_n < Rational(0)) throw ConfigError("r_n", "must be nonnegative");
      }
      if (const auto* v = in.get("r_n_max")) {
        cfg.r_n_max = parse_rational_key("r_n_max", *v);
        if (!(Rational(0) < *cfg.r_n_max)) throw ConfigError("r_n_max", "must be positive");
      }
      if (const auto* v = in.get("L_sweep")) {
        for (const auto& item : split_list(*v)) cfg.L_sweep.push_back(parse_int<int>("L_sweep", item, 1, kMaxBlocks));
        if (cfg.L_sweep.empty()) throw ConfigError("L_sweep", "empty list");
      }
      break;
    }
    case Mode::kSimulate: {
      cfg.M = parse_int<int>("M", in.require("M", mode), 1, kMaxAntennas);
      cfg.N = parse_int<int>("N", in.require("N", mode), 1, kMaxAntennas);
      cfg.L = parse_int<int>("L", in.require("L", mode), 1, kMaxBlocks);
      const auto* rn = in.get("r_n");
      const auto* R = in.get("R");
      if (rn && R) throw ConfigError("R", "give either r_n or R, not both");
      if (!rn && !R) throw ConfigError("r_n", "required by simulate (or give R)");
      if (rn) {
        cfg.r_n = parse_rational_key("r_n", *rn);
        if (*cfg.r_n < Rational(0)) throw ConfigError("r_n", "must be nonnegative");
      } else {
        cfg.R = parse_double("R", *R);
        if (*cfg.R < 0.0) throw ConfigError("R", "must be nonnegative");
      }
      cfg.eta_db = parse_eta_list(in.get("eta_db_list") ? *in.get("eta_db_list") : "10,20,30,40,50,60,70,80");
      break;
    }
    case Mode::kCodes: {
      if (const auto* v = in.get("M"); v && parse_int<int>("M", *v, 1, kMaxAntennas) != 1) {
        throw ConfigError("M", "codes supports single-antenna channels only");
      }
      if (const auto* v = in.get("N"); v && parse_int<int>("N", *v, 1, kMaxAntennas) != 1) {
        throw ConfigError("N", "codes supports single-antenna channels only");
      }
      if (const auto* v = in.get("codebook")) {
        if (v->empty()) throw ConfigError("codebook", "empty path");
        cfg.codebook = *v;
        cfg.L = 0;  // taken from the file unless given
        if (const auto* l = in.get("L")) cfg.L = parse_int<int>("L", *l, 1, kMaxBlocks);
        if (const auto* b = in.get("bits")) cfg.bits = parse_int<int>("bits", *b, 1, 8);
      } else {
        cfg.L = parse_int<int>("L", in.require("L", mode), 1, 5);
        cfg.bits = parse_int<int>("bits", in.require("bits", mode), 1, 8);
      }
      if (const auto* v = in.get("restarts")) cfg.budget.restarts = parse_int<int>("restarts", *v, 1, 1 << 16);
      if (const auto* v = in.get("budget")) {
        if (trim(*v) == "exhaustive") {
          cfg.require_exhaustive = true;
          if (!cfg.codebook) {
            const std::uint64_t count = exhaustive_count(cfg.bits, cfg.L);
            constexpr std::uint64_t kExhaustiveCap = 1'000'000'000;
            if (count > kExhaustiveCap) {
              throw ConfigError("budget", "exhaustive search over " + std::to_string(cfg.bits) + " bits and L=" +
                                              std::to_string(cfg.L) + " exceeds 1e9 candidates");
            }
            cfg.budget.max_evaluations = std::max<std::uint64_t>(count, 1);
          }
        } else {
          cfg.budget.max_evaluations = parse_int<std::uint64_t>("budget", *v, 1, std::uint64_t{1} << 40);
        }
      }
      cfg.budget.seed = cfg.seed;
      if (const auto* v = in.get("R")) {
        cfg.R = parse_double("R", *v);
        if (!cfg.codebook && std::abs(*cfg.R - static_cast<double>(cfg.bits) / cfg.L) > 1e-12) {
          throw ConfigError("R", "must equal bits / L for a permutation code");
        }
      }
      cfg.eta_db = parse_eta_list(in.get("eta_db_list") ? *in.get("eta_db_list") : "20,30,40");
      break;
    }
    case Mode::kVerify: {
      if (const auto* v = in.get("sigma")) {
        cfg.sigma = parse_double("sigma", *v);
        if (cfg.sigma <= 0.0) throw ConfigError("sigma", "must be positive");
      }
      if (const auto* v = in.get("checks")) {
        for (const auto& item : split_list(*v)) cfg.checks.push_back(parse_int<int>("checks", item, 1, 9));
        if (cfg.checks.empty()) throw ConfigError("checks", "empty list");
        std::sort(cfg.checks.begin(), cfg.checks.end());
        cfg.checks.erase(std::unique(cfg.checks.begin(), cfg.checks.end()), cfg.checks.end());
      }
      break;
    }
  }
  return cfg;
}

std::vector<std::string> config_echo(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  out.push_back(std::string("tool=rateless_dmt ") + kToolVersion);
  out.push_back(std::string("mode=") + mode_name(cfg.mode));
  auto eta_list = [&] {
    std::vector<std::string> parts;
    for (double e : cfg.eta_db) parts.push_back(format_g12(e));
    return join(parts);
  };
  switch (cfg.mode) {
    case Mode::kDmt:
      out.push_back("M=" + std::to_string(cfg.M));
      out.push_back("N=" + std::to_string(cfg.N));
      out.push_back("L=" + std::to_string(cfg.L));
      out.push_back("T=" + std::to_string(cfg.T));
      out.push_back("per_segment=" + std::to_string(cfg.per_segment));
      if (cfg.r_n_max) out.push_back("r_n_max=" + format_rational(*cfg.r_n_max));
      out.push_back(std::string("exact=") + (cfg.exact ? "true" : "false"));
      break;
    case Mode::kSimulate:
      out.push_back("M=" + std::to_string(cfg.M));
      out.push_back("N=" + std::to_string(cfg.N));
      out.push_back("L=" + std::to_string(cfg.L));
      out.push_back("T=" + std::to_string(cfg.T));
      if (cfg.r_n) out.push_back("r_n=" + format_rational(*cfg.r_n));
      if (cfg.R) out.push_back("R=" + format_g12(*cfg.R));
      out.push_back("eta_db_list=" + eta_list());
      out.push_back("trials=" + std::to_string(cfg.trials));
      out.push_back("seed=" + std::to_string(cfg.seed));
      break;
    case Mode::kCodes:
      out.push_back("M=1");
      out.push_back("N=1");
      out.push_back("L=" + std::to_string(cfg.L));
      out.push_back("T=1");
      out.push_back("bits=" + std::to_string(cfg.bits));
      if (cfg.codebook) {
        out.push_back("codebook=" + *cfg.codebook);
      } else {
        out.push_back("budget=" + (cfg.require_exhaustive ? std::string("exhaustive")
                                                          : std::to_string(cfg.budget.max_evaluations)));
        out.push_back("restarts=" + std::to_string(cfg.budget.restarts));
      }
      out.push_back("eta_db_list=" + eta_list());
      out.push_back("trials=" + std::to_string(cfg.trials));
      out.push_back("seed=" + std::to_string(cfg.seed));
      break;
    case Mode::kVerify:
      out.push_back("sigma=" + format_g12(cfg.sigma));
      if (cfg.seed_given) out.push_back("seed=" + std::to_string(cfg.seed));
      if (cfg.trials_given) out.push_back("trials=" + std::to_string(cfg.trials));
      break;
  }
  return out;
}

}  // namespace rateless::cli
