#pragma once

#include <span>
#include <vector>

#include "udw/lattice.hpp"
#include "udw/spectra.hpp"
#include "udw/units.hpp"

namespace udw {

// Site-resolved grid, row-major with index y*nx + x. Row y = 0 is the top edge.
struct DensityMap {
  int nx = 0;
  int ny = 0;
  std::vector<double> cells;
  SpectralWindow window;
  int state_count = 0;

  double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * nx + x]; }
  double total() const;
};

struct SpinMap {
  int nx = 0;
  int ny = 0;
  std::vector<double> cells;
  SpectralWindow window;
  int state_count = 0;

  double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * nx + x]; }
};

DensityMap density_map(std::span<const EigenPair> pairs, const DeviceGeometry& geometry,
                       const SpectralWindow& window);
SpinMap spin_map(std::span<const EigenPair> pairs, const DeviceGeometry& geometry,
                 const SpectralWindow& window);

// Ribbon periodic along x with `width` sites along y.
struct RibbonBands {
  BhzParams params;
  int width = 0;
  Boundary transverse = Boundary::open;
  std::vector<double> k;                        // rad
  std::vector<std::vector<double>> energies;    // [k][band], ascending, eV
  std::vector<std::vector<double>> spin_z;      // <sigma_z> per state
  std::vector<std::vector<double>> top_weight;  // weight in rows y < width/2
  bool hybridization_warning = false;
};

struct RibbonOptions {
  double k_min = -kPi;
  double k_max = kPi;
  Boundary transverse = Boundary::open;
};

RibbonBands ribbon_bands(const BhzParams& params, int width, int k_count,
                         const RibbonOptions& options = {});

// Transverse decay length expected from the continuum gap, in sites.
double expected_decay_sites(const BhzParams& params);

// Eigenstates of the ribbon at a single k with their transverse density profile.
struct RibbonState {
  double energy = 0.0;
  double spin_z = 0.0;
  std::vector<double> profile;  // density per row, sums to 1
};
std::vector<RibbonState> ribbon_states(const BhzParams& params, int width, double k,
                                       Boundary transverse = Boundary::open);

enum class Edge { top, bottom };

// Mid-gap states localized on one edge, grouped by spin.
struct EdgeBranch {
  int spin = 0;  // +1 or -1
  Edge edge = Edge::top;
  std::vector<double> k;
  std::vector<double> energy;
};

std::vector<EdgeBranch> edge_branches(const RibbonBands& bands, Edge edge,
                                      double localization = 0.9);

struct BranchVelocity {
  int spin = 0;
  Edge edge = Edge::top;
  double k_cross = 0.0;
  double velocity = 0.0;  // signed, nm/ns
};

std::vector<BranchVelocity> branch_velocities(const RibbonBands& bands, Edge edge = Edge::top);
// Mean |v| over the zero-crossing branches of the top edge, nm/ns.
double edge_velocity(const RibbonBands& bands);

double decay_length(std::span<const double> profile, double lattice_constant);
double decay_length(const EigenPair& pair, const DeviceGeometry& geometry,
                    double lattice_constant);

// Row profile summed over x for a device eigenvector.
std::vector<double> transverse_profile(const EigenPair& pair, const DeviceGeometry& geometry);

class NotEdgeStateError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace udw
