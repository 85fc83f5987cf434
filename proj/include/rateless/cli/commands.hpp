#pragma once

#include <iosfwd>

#include "rateless/cli/config.hpp"

namespace rateless::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

// Each command writes its data files under cfg.out_dir, reports progress on
// `out` and diagnostics on `err`, and returns a process exit code.
int cmd_dmt(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_codes(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line: subcommand, flags, config file, dispatch.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rateless::cli
