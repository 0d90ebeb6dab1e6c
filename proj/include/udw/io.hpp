#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udw/channel.hpp"
#include "udw/edge_maps.hpp"
#include "udw/spectra.hpp"

namespace udw {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Grid CSV: a header line "nx,ny,e_min,e_max,state_count", its values, then
// one line per row y with nx comma-separated cells.
std::string grid_csv(int nx, int ny, std::span<const double> cells, const SpectralWindow& w,
                     int state_count);
std::string grid_csv(const DensityMap& m);
std::string grid_csv(const SpinMap& m);

// Binary greymap, 16-bit big-endian. Unsigned maps scale the largest cell to
// 65535; signed maps put 0 at 32768 and the largest |cell| at the ends.
std::string grid_p5(int nx, int ny, std::span<const double> cells, bool is_signed);

std::string eigenvalues_csv(std::span<const EigenPair> pairs);
std::string bands_csv(const RibbonBands& b);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string report_json(const SolverReport& r, std::span<const EigenPair> pairs);

}  // namespace udw
