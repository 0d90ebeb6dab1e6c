#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "udw/config.hpp"

namespace udw {

enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides solver.seed
  int threads = 1;
  std::ostream* out = nullptr;  // defaults to std::cout
  std::ostream* err = nullptr;  // defaults to std::cerr
};

// Each returns an exit code; files are written only once their data is complete.
int run_simulate(const DeviceConfig& config, const RunOptions& options);
int run_bands(const DeviceConfig& config, const RunOptions& options);
int run_channel(const ChannelConfig& config, const RunOptions& options);
int run_oracle(const ChannelConfig& config, const RunOptions& options);
int run_constraints(const RunOptions& options);

// Loads `config_path` (unused for "constraints") and dispatches. Never throws.
int run_command(std::string_view subcommand, const std::filesystem::path& config_path,
                const RunOptions& options);

}  // namespace udw
