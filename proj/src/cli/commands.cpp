#include "rateless/cli/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "rateless/channel.hpp"
#include "rateless/cli/verify.hpp"
#include "rateless/code_search.hpp"
#include "rateless/code_trials.hpp"
#include "rateless/codebook_io.hpp"
#include "rateless/experiment.hpp"
#include "rateless/format.hpp"

namespace rateless::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SnrPoint> to_snr(const std::vector<double>& eta_db) {
  std::vector<SnrPoint> out;
  for (double db : eta_db) out.push_back(SnrPoint::from_db(db));
  return out;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void apply_threads(const ExperimentConfig& cfg) {
  if (cfg.threads) omp_set_num_threads(*cfg.threads);
}

}  // namespace

int cmd_dmt(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const AntennaConfig antennas(cfg.M, cfg.N);
  const std::vector<int> sweep = cfg.L_sweep.empty() ? std::vector<int>{cfg.L} : cfg.L_sweep;
  const Rational m(antennas.min_dim());

  if (cfg.r_n && Rational(0) < *cfg.r_n) {
    const Rational bound = *suggested_max_blocks(antennas, *cfg.r_n);
    for (int L : sweep) {
      if (!(Rational(L) < bound)) {
        err << "hint: L=" << L << " is not below min(M,N)/r_n = " << format_rational(bound)
            << "; at this r_n the first block cannot carry the message\n";
      }
    }
  }

  for (int L : sweep) {
    const RatelessConfig rc(antennas, L, cfg.T);
    std::vector<Rational> grid = default_rn_grid(rc, cfg.per_segment);
    if (cfg.r_n_max) std::erase_if(grid, [&](const Rational& q) { return *cfg.r_n_max < q; });

    ExperimentConfig echo_cfg = cfg;
    echo_cfg.L = L;
    std::vector<std::string> preamble = config_echo(echo_cfg);
    preamble.push_back("rows with l=-1 lie at or beyond r_n=min(M,N); r is clamped to " + format_rational(m) +
                       " and d=0");
    std::ostringstream csv;
    write_dmt_csv(csv, rc, grid, cfg.exact, preamble);
    const fs::path path = fs::path(cfg.out_dir) / ("dmt_L" + std::to_string(L) + ".csv");
    write_file(path, csv.str());
    out << "wrote " << path.string() << " (" << grid.size() << " r_n values)\n";

    if (cfg.r_n) {
      const GainPoint p = rateless_dmt_point(rc, *cfg.r_n);
      const Segment seg = rateless_segment(rc, *cfg.r_n);
      out << "  L=" << L << " r_n=" << format_rational(*cfg.r_n) << ": "
          << (seg.tail ? std::string("tail") : "segment " + std::to_string(seg.l)) << ", r=" << format_rational(p.r)
          << ", d=" << format_rational(p.d) << "\n";
    }
  }
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_threads(cfg);
  const RatelessConfig rc(AntennaConfig(cfg.M, cfg.N), cfg.L, cfg.T);
  const RateTarget rate = cfg.r_n ? RateTarget::per_level(to_double(*cfg.r_n)) : RateTarget::fixed(*cfg.R);
  const std::vector<SnrPoint> etas = to_snr(cfg.eta_db);

  if (cfg.r_n && Rational(0) < *cfg.r_n && !(Rational(cfg.L) < *suggested_max_blocks(rc.antennas, *cfg.r_n))) {
    err << "hint: L=" << cfg.L << " is not below min(M,N)/r_n = "
        << format_rational(*suggested_max_blocks(rc.antennas, *cfg.r_n)) << "\n";
  }

  const Stopwatch clock;
  const auto records = run_rateless_experiment(rc, rate, etas, cfg.trials, cfg.seed);
  std::ostringstream csv;
  const auto preamble = config_echo(cfg);
  write_results_csv(csv, records, cfg.seed, preamble);
  const fs::path path = fs::path(cfg.out_dir) / "simulate.csv";
  write_file(path, csv.str());

  for (const auto& rec : records) {
    out << "eta=" << format_g12(rec.eta.db()) << " dB  R=" << format_g12(rec.R) << "  p(L)=" << format_g12(rec.profile.p_hat.back())
        << "  r_bar=" << format_g12(rec.rate.r_bar) << "\n";
  }
  out << "wrote " << path.string() << "\n";
  err << "simulate: " << cfg.trials << " trials x " << etas.size() << " SNR points in " << clock.seconds() << " s\n";
  return kExitOk;
}

int cmd_codes(const ExperimentConfig& cfg_in, std::ostream& out, std::ostream& err) {
  apply_threads(cfg_in);
  ExperimentConfig cfg = cfg_in;
  const Stopwatch clock;

  std::optional<PermutationCode> code;
  std::vector<std::string> preamble;
  if (cfg.codebook) {
    std::ifstream in(*cfg.codebook, std::ios::binary);
    if (!in) throw ConfigError("codebook", "cannot open '" + *cfg.codebook + "'");
    try {
      code = load_codebook(in);
    } catch (const ParseError& e) {
      err << "error: " << *cfg.codebook << ":" << e.line() << ": " << e.what() << "\n";
      return kExitUsage;
    }
    if (cfg.bits != 0 && cfg.bits != code->bits()) throw ConfigError("bits", "does not match the codebook");
    if (cfg.L != 0 && cfg.L != code->L()) throw ConfigError("L", "does not match the codebook");
    cfg.L = code->L();
    cfg.bits = code->bits();
    if (cfg.R && std::abs(*cfg.R - code->rate()) > 1e-12) throw ConfigError("R", "must equal bits / L of the codebook");
    preamble = config_echo(cfg);
  } else {
    const SearchResult res = search_permutation_code(cfg.L, cfg.bits, cfg.budget);
    if (cfg.require_exhaustive && !res.exhaustive) throw ConfigError("budget", "exhaustive search not possible");
    code = res.code;
    preamble = config_echo(cfg);
    preamble.push_back(std::string("search=") + (res.exhaustive ? "exhaustive" : "hill_climb") +
                       " evaluations=" + std::to_string(res.evaluations));
    err << "search: " << res.evaluations << " evaluations, " << (res.exhaustive ? "exhaustive" : "hill climbing") << "\n";
  }

  const UniversalityEvidence ev = distance_evidence(*code);
  std::string prefix_line = "prefix_min_product_distance=";
  for (std::size_t i = 0; i < ev.prefix_min_product_distance.size(); ++i) {
    prefix_line += (i ? "," : "") + format_g12(ev.prefix_min_product_distance[i]);
  }
  preamble.push_back(prefix_line);

  const fs::path book = fs::path(cfg.out_dir) / "codebook.txt";
  write_file(book, codebook_to_string(*code));

  const std::vector<SnrPoint> etas = to_snr(cfg.eta_db);
  const auto results = run_rateless_code_trials(*code, etas, cfg.trials, cfg.seed);
  std::ostringstream csv;
  write_code_trials_csv(csv, results, cfg.seed, preamble);
  const fs::path trials_path = fs::path(cfg.out_dir) / "code_trials.csv";
  write_file(trials_path, csv.str());

  out << "L=" << code->L() << " bits=" << code->bits() << " min product distance "
      << format_g12(ev.min_product_distance) << "\n";
  for (const auto& r : results) {
    out << "eta=" << format_g12(r.eta.db()) << " dB  P_e=" << format_g12(r.errors.p_e) << "  p(L)="
        << format_g12(r.profile.p_hat.back()) << "\n";
  }
  out << "wrote " << book.string() << " and " << trials_path.string() << "\n";
  err << "codes: " << clock.seconds() << " s\n";
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_threads(cfg);
  VerifyOptions opts;
  if (cfg.seed_given) opts.seed = cfg.seed;
  if (cfg.trials_given) opts.trials = cfg.trials;
  opts.sigma = cfg.sigma;
  opts.checks = cfg.checks;
  const auto results = run_verification(opts);
  print_report(out, results);
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) {
      err << "FAILED: check " << r.id << " (" << r.name << ")\n";
      ++failures;
    }
  }
  return failures == 0 ? kExitOk : kExitVerifyFailed;
}

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rateless-code diversity-multiplexing tradeoff tools", "rateless_dmt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  struct Binding {
    CLI::App* sub;
    CLI::Option* option;
    std::string key;
    std::string value;
  };
  std::vector<std::unique_ptr<Binding>> bindings;
  std::map<CLI::App*, std::string> config_paths;
  std::map<CLI::App*, Mode> modes;

  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    auto b = std::make_unique<Binding>();
    b->sub = sub;
    b->key = key;
    b->option = sub->add_option(flag, b->value, help);
    bindings.push_back(std::move(b));
  };
  auto common = [&](CLI::App* sub, Mode mode) {
    modes[sub] = mode;
    sub->add_option("--config", config_paths[sub], "key = value config file; flags override it");
    bind(sub, "--out", "out", "output directory");
    bind(sub, "--seed", "seed", "base seed");
    bind(sub, "--trials", "trials", "Monte Carlo trials per SNR point");
    bind(sub, "--eta-db", "eta_db_list", "comma-separated SNR list in dB");
    bind(sub, "--threads", "threads", "OpenMP threads");
  };

  CLI::App* dmt = app.add_subcommand("dmt", "analytic DMT curves");
  common(dmt, Mode::kDmt);
  bind(dmt, "-M", "M", "transmit antennas");
  bind(dmt, "-N", "N", "receive antennas");
  bind(dmt, "-L,--blocks", "L", "maximum number of blocks");
  bind(dmt, "-T", "T", "channel uses per block (metadata)");
  bind(dmt, "--r-n", "r_n", "report the point at this r_n");
  bind(dmt, "--r-n-max", "r_n_max", "truncate the grid");
  bind(dmt, "--per-segment", "per_segment", "grid points per segment");
  bind(dmt, "--L-sweep", "L_sweep", "comma-separated L values, one file each");
  bool exact_flag = false;
  auto* exact_opt = dmt->add_flag("--exact", exact_flag, "add exact rational columns");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo outage profile and effective rate");
  common(sim, Mode::kSimulate);
  bind(sim, "-M", "M", "transmit antennas");
  bind(sim, "-N", "N", "receive antennas");
  bind(sim, "-L,--blocks", "L", "maximum number of blocks");
  bind(sim, "-T", "T", "channel uses per block (metadata)");
  bind(sim, "--r-n", "r_n", "per-level multiplexing gain");
  bind(sim, "-R,--rate", "R", "fixed rate in bits per channel use");

  CLI::App* codes = app.add_subcommand("codes", "permutation-code search and rateless trials");
  common(codes, Mode::kCodes);
  bind(codes, "-L,--blocks", "L", "number of blocks (<= 5 for search)");
  bind(codes, "--bits", "bits", "bits per QAM symbol, 1..8");
  bind(codes, "--budget", "budget", "objective evaluations, or 'exhaustive'");
  bind(codes, "--restarts", "restarts", "hill-climbing restarts");
  bind(codes, "--codebook", "codebook", "load this codebook instead of searching");
  bind(codes, "-R,--rate", "R", "rate check, must equal bits / L");

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance checks");
  common(verify, Mode::kVerify);
  bind(verify, "--sigma", "sigma", "standard-error multiplier for statistical checks");
  bind(verify, "--checks", "checks", "comma-separated check numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    KeyValues flags;
    for (const auto& b : bindings) {
      if (b->sub == chosen && b->option->count() > 0) flags[b->key] = b->value;
    }
    if (chosen == dmt && exact_opt->count() > 0) flags["exact"] = exact_flag ? "true" : "false";
    KeyValues file;
    if (!config_paths[chosen].empty()) file = read_config_file(config_paths[chosen]);
    const ExperimentConfig cfg = resolve_config(modes[chosen], merge(file, flags));
    switch (cfg.mode) {
      case Mode::kDmt: return cmd_dmt(cfg, out, err);
      case Mode::kSimulate: return cmd_simulate(cfg, out, err);
      case Mode::kCodes: return cmd_codes(cfg, out, err);
      case Mode::kVerify: return cmd_verify(cfg, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace rateless::cli
