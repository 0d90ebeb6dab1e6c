#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "udw/channel.hpp"
#include "udw/lattice.hpp"
#include "udw/spectra.hpp"

namespace udw {

struct BandsConfig {
  int width = 0;  // 0: use geometry.ny
  int k_count = 65;
  double k_min = -0.1;
  double k_max = 0.1;
  Boundary transverse = Boundary::open;

  bool operator==(const BandsConfig&) const = default;
};

struct DeviceConfig {
  std::string name = "device";
  BhzParams params;
  // Present when the document gave the continuum triple; params is then derived.
  std::optional<ContinuumParams> continuum;
  DeviceGeometry geometry;
  std::vector<GateRegion> gates;
  std::vector<LocalField> fields;
  SpectralWindow window;
  SolverOptions solver;  // threads comes from the command line, not the file
  std::size_t max_dimension = 4'000'000;
  BandsConfig bands;

  bool operator==(const DeviceConfig&) const = default;
};

struct OracleConfig {
  bool enabled = false;
  std::vector<double> k;
  std::vector<double> weight;  // empty: uniform_modes(k)
  int n_max = 8;
  double j = 0.5;
  double sigma = 1.0;

  DiscreteModes modes() const;
  bool operator==(const OracleConfig&) const = default;
};

struct ChannelConfig {
  std::string name = "channel";
  ChannelTemplate channel;
  std::vector<double> j_values;
  std::vector<double> sigma_values;
  bool oracle_only = false;
  OracleConfig oracle;

  bool operator==(const ChannelConfig&) const = default;
};

using Config = std::variant<DeviceConfig, ChannelConfig>;

// Throws ConfigError listing every problem found, each with its line.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

std::string serialize(const DeviceConfig& c);
std::string serialize(const ChannelConfig& c);
std::string serialize(const Config& c);

}  // namespace udw
