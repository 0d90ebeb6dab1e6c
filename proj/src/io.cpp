#include "udw/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "udw/errors.hpp"

namespace udw {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string grid_csv(int nx, int ny, std::span<const double> cells, const SpectralWindow& w,
                     int state_count) {
  if (cells.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw PreconditionError("grid size does not match nx * ny");
  std::string s = "nx,ny,e_min,e_max,state_count\n";
  s += std::to_string(nx) + "," + std::to_string(ny) + "," + format_double(w.e_min) + "," +
       format_double(w.e_max) + "," + std::to_string(state_count) + "\n";
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (x) s += ',';
      s += format_double(cells[static_cast<std::size_t>(y) * nx + x]);
    }
    s += '\n';
  }
  return s;
}

std::string grid_csv(const DensityMap& m) {
  return grid_csv(m.nx, m.ny, m.cells, m.window, m.state_count);
}

std::string grid_csv(const SpinMap& m) {
  return grid_csv(m.nx, m.ny, m.cells, m.window, m.state_count);
}

std::string grid_p5(int nx, int ny, std::span<const double> cells, bool is_signed) {
  if (cells.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw PreconditionError("grid size does not match nx * ny");
  double peak = 0.0;
  for (double c : cells) peak = std::max(peak, std::abs(c));
  std::string s = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
  s.reserve(s.size() + 2 * cells.size());
  for (double c : cells) {
    double level;
    if (is_signed)
      level = peak > 0.0 ? 32767.5 + 32767.5 * c / peak : 32768.0;
    else
      level = peak > 0.0 ? 65535.0 * std::max(c, 0.0) / peak : 0.0;
    const auto u = static_cast<unsigned>(std::lround(std::clamp(level, 0.0, 65535.0)));
    s += static_cast<char>((u >> 8) & 0xff);
    s += static_cast<char>(u & 0xff);
  }
  return s;
}

std::string eigenvalues_csv(std::span<const EigenPair> pairs) {
  std::string s = "index,energy_ev,residual_ev\n";
  for (std::size_t i = 0; i < pairs.size(); ++i)
    s += std::to_string(i) + "," + format_double(pairs[i].energy) + "," +
         format_double(pairs[i].residual) + "\n";
  return s;
}

std::string bands_csv(const RibbonBands& b) {
  std::string s = "k";
  const std::size_t n = b.energies.empty() ? 0 : b.energies.front().size();
  for (std::size_t j = 0; j < n; ++j) s += ",E" + std::to_string(j + 1);
  s += '\n';
  for (std::size_t i = 0; i < b.k.size(); ++i) {
    s += format_double(b.k[i]);
    for (double e : b.energies[i]) s += "," + format_double(e);
    s += '\n';
  }
  return s;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string s = "J,sigma,I_c,branch_count\n";
  for (const auto& r : rows)
    s += format_double(r.j) + "," + format_double(r.sigma) + "," +
         format_double(r.coherent_info) + "," + std::to_string(r.branch_count) + "\n";
  return s;
}

std::string report_json(const SolverReport& r, std::span<const EigenPair> pairs) {
  nlohmann::ordered_json j;
  j["strategy"] = r.strategy;
  j["converged"] = r.converged;
  j["restarts"] = r.restarts;
  j["operator_applications"] = r.operator_applications;
  j["spectral_radius_ev"] = r.spectral_radius;
  j["tolerance_ev"] = r.tolerance;
  j["max_residual_ev"] = r.max_residual;
  j["pairs"] = pairs.size();
  if (r.window_count >= 0)
    j["window_count"] = r.window_count;
  else
    j["window_count"] = nullptr;
  j["residual_history"] = r.residual_history;
  j["message"] = r.message;
  return j.dump(2) + "\n";
}

}  // namespace udw
