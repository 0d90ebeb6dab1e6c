#include "udw/edge_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace udw {

namespace {

void check_pairs(std::span<const EigenPair> pairs, const DeviceGeometry& g,
                 const SpectralWindow& w) {
  g.validate();
  w.validate();
  for (const auto& p : pairs) {
    if (!w.contains(p.energy))
      throw PreconditionError("eigenpair at " + std::to_string(p.energy) +
                              " eV lies outside the map window");
    if (static_cast<std::size_t>(p.vector.size()) != g.dimension())
      throw PreconditionError("eigenvector length does not match the device");
  }
}

// Bloch Hamiltonian of a ribbon at momentum k along x, one spin sector.
// With no in-plane fields sigma_z is conserved, so the 4W problem splits into
// two 2W blocks; spin = 0 selects up, 1 selects down.
Eigen::MatrixXcd ribbon_block(const BhzParams& p, int width, double k, Boundary transverse,
                              int spin) {
  const cplx phase = std::polar(1.0, k);
  const Matrix4c tx = hopping_x(p);
  const Matrix4c onsite = onsite_block(p, 0.0, {0.0, 0.0, 0.0}) + tx * phase +
                          tx.adjoint() * std::conj(phase);
  const Matrix4c ty = hopping_y(p);
  const int o = 2 * spin;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * width, 2 * width);
  for (int y = 0; y < width; ++y) {
    h.block(2 * y, 2 * y, 2, 2) = onsite.block(o, o, 2, 2);
    if (y + 1 < width || transverse == Boundary::periodic) {
      const int n = (y + 1) % width;
      h.block(2 * y, 2 * n, 2, 2) += ty.block(o, o, 2, 2);
      h.block(2 * n, 2 * y, 2, 2) += ty.block(o, o, 2, 2).adjoint();
    }
  }
  return h;
}

double bulk_gap(const BhzParams& p) {
  double gap = std::numeric_limits<double>::max();
  const int n = 256;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gap = std::min(gap, analytic_dispersion(p, kPi * (2.0 * i / n - 1.0),
                                              kPi * (2.0 * j / n - 1.0)));
  return gap;
}

struct SectorSolve {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

SectorSolve solve_sector(const BhzParams& p, int width, double k, Boundary tr, int spin) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ribbon_block(p, width, k, tr, spin));
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<double> row_profile(const Eigen::VectorXcd& v, int width) {
  std::vector<double> prof(static_cast<std::size_t>(width), 0.0);
  for (int y = 0; y < width; ++y) prof[y] = std::norm(v[2 * y]) + std::norm(v[2 * y + 1]);
  return prof;
}

}  // namespace

double DensityMap::total() const { return std::accumulate(cells.begin(), cells.end(), 0.0); }

DensityMap density_map(std::span<const EigenPair> pairs, const DeviceGeometry& g,
                       const SpectralWindow& w) {
  check_pairs(pairs, g, w);
  DensityMap m{g.nx, g.ny, std::vector<double>(g.sites(), 0.0), w,
               static_cast<int>(pairs.size())};
  for (const auto& p : pairs)
    for (std::size_t s = 0; s < g.sites(); ++s) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += std::norm(p.vector[static_cast<Eigen::Index>(4 * s + c)]);
      m.cells[s] += acc;
    }
  return m;
}

SpinMap spin_map(std::span<const EigenPair> pairs, const DeviceGeometry& g,
                 const SpectralWindow& w) {
  check_pairs(pairs, g, w);
  SpinMap m{g.nx, g.ny, std::vector<double>(g.sites(), 0.0), w, static_cast<int>(pairs.size())};
  for (const auto& p : pairs)
    for (std::size_t s = 0; s < g.sites(); ++s) {
      const auto* v = p.vector.data() + 4 * s;
      m.cells[s] += std::norm(v[0]) + std::norm(v[1]) - std::norm(v[2]) - std::norm(v[3]);
    }
  return m;
}

double expected_decay_sites(const BhzParams& p) {
  const double gap = std::abs(p.mass - 2.0 * p.epsilon);
  if (gap == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(p.lambda) / gap;
}

RibbonBands ribbon_bands(const BhzParams& params, int width, int k_count,
                         const RibbonOptions& opt) {
  params.validate();
  if (width < 2) throw PreconditionError("ribbon width must be at least 2 sites");
  if (k_count < 16) throw PreconditionError("ribbon needs at least 16 k samples");
  if (!(opt.k_min < opt.k_max) || opt.k_min < -kPi - 1e-12 || opt.k_max > kPi + 1e-12)
    throw PreconditionError("ribbon k range must be an interval inside [-pi, pi]");

  RibbonBands b;
  b.params = params;
  b.width = width;
  b.transverse = opt.transverse;
  b.hybridization_warning =
      opt.transverse == Boundary::open && width < 2.0 * expected_decay_sites(params);

  const int half = width / 2;
  for (int i = 0; i < k_count; ++i) {
    const double k = opt.k_min + (opt.k_max - opt.k_min) * i / (k_count - 1);
    std::vector<std::array<double, 3>> states;  // energy, spin, top weight
    for (int spin = 0; spin < 2; ++spin) {
      const auto s = solve_sector(params, width, k, opt.transverse, spin);
      for (Eigen::Index j = 0; j < s.values.size(); ++j) {
        const auto prof = row_profile(s.vectors.col(j), width);
        const double top = std::accumulate(prof.begin(), prof.begin() + half, 0.0);
        states.push_back({s.values[j], spin == 0 ? 1.0 : -1.0, top});
      }
    }
    std::stable_sort(states.begin(), states.end(),
                     [](const auto& a, const auto& c) { return a[0] < c[0]; });
    b.k.push_back(k);
    auto& e = b.energies.emplace_back();
    auto& sz = b.spin_z.emplace_back();
    auto& tw = b.top_weight.emplace_back();
    for (const auto& st : states) {
      e.push_back(st[0]);
      sz.push_back(st[1]);
      tw.push_back(st[2]);
    }
  }
  return b;
}

std::vector<RibbonState> ribbon_states(const BhzParams& params, int width, double k,
                                       Boundary transverse) {
  params.validate();
  if (width < 2) throw PreconditionError("ribbon width must be at least 2 sites");
  std::vector<RibbonState> out;
  for (int spin = 0; spin < 2; ++spin) {
    const auto s = solve_sector(params, width, k, transverse, spin);
    for (Eigen::Index j = 0; j < s.values.size(); ++j)
      out.push_back({s.values[j], spin == 0 ? 1.0 : -1.0, row_profile(s.vectors.col(j), width)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RibbonState& a, const RibbonState& c) { return a.energy < c.energy; });
  return out;
}

std::vector<EdgeBranch> edge_branches(const RibbonBands& b, Edge edge, double localization) {
  const double gap = bulk_gap(b.params);
  std::map<int, EdgeBranch> by_spin;
  for (std::size_t i = 0; i < b.k.size(); ++i) {
    // per spin, keep the edge state closest to zero energy at this k
    std::map<int, std::size_t> pick;
    for (std::size_t j = 0; j < b.energies[i].size(); ++j) {
      const double e = b.energies[i][j];
      const double w = edge == Edge::top ? b.top_weight[i][j] : 1.0 - b.top_weight[i][j];
      if (std::abs(e) >= gap || w < localization) continue;
      const int spin = b.spin_z[i][j] > 0 ? 1 : -1;
      auto it = pick.find(spin);
      if (it == pick.end() || std::abs(e) < std::abs(b.energies[i][it->second])) pick[spin] = j;
    }
    for (const auto& [spin, j] : pick) {
      auto& br = by_spin[spin];
      br.spin = spin;
      br.edge = edge;
      br.k.push_back(b.k[i]);
      br.energy.push_back(b.energies[i][j]);
    }
  }
  std::vector<EdgeBranch> out;
  for (auto& [spin, br] : by_spin) out.push_back(std::move(br));
  return out;
}

// Smallest |E| among in-gap states of one spin: the hybridization splitting
// between the two edges of a finite ribbon.
double hybridization_gap(const RibbonBands& b, int spin, double gap) {
  double d = gap;
  for (std::size_t i = 0; i < b.k.size(); ++i)
    for (std::size_t j = 0; j < b.energies[i].size(); ++j)
      if ((b.spin_z[i][j] > 0) == (spin > 0)) d = std::min(d, std::abs(b.energies[i][j]));
  return d < gap ? d : 0.0;
}

std::vector<BranchVelocity> branch_velocities(const RibbonBands& b, Edge edge) {
  std::vector<BranchVelocity> out;
  const double a = b.params.lattice_constant;
  const double gap = bulk_gap(b.params);
  for (const auto& br : edge_branches(b, edge)) {
    // bracketing samples of the sign change nearest to E = 0
    std::size_t best = br.k.size();
    double best_gap = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i + 1 < br.k.size(); ++i) {
      const double e0 = br.energy[i], e1 = br.energy[i + 1];
      if (!(e0 * e1 <= 0.0) || e0 == e1) continue;
      const double g = std::abs(e0) + std::abs(e1);
      if (g < best_gap) {
        best_gap = g;
        best = i;
      }
    }
    if (best == br.k.size()) continue;
    // E = +-sqrt((v k)^2 + delta^2) near an avoided crossing; undo the
    // splitting before differencing
    const double delta = hybridization_gap(b, br.spin, gap);
    auto unsplit = [delta](double e) {
      return std::copysign(std::sqrt(std::max(0.0, e * e - delta * delta)), e);
    };
    const double k0 = br.k[best], k1 = br.k[best + 1];
    const double e0 = unsplit(br.energy[best]), e1 = unsplit(br.energy[best + 1]);
    const double slope = (e1 - e0) / (k1 - k0);  // eV per rad
    BranchVelocity v;
    v.spin = br.spin;
    v.edge = edge;
    v.k_cross = k0 - e0 / slope;
    v.velocity = slope * a / kHbarEvNs;
    out.push_back(v);
  }
  return out;
}

double edge_velocity(const RibbonBands& b) {
  const auto vs = branch_velocities(b, Edge::top);
  if (vs.empty()) throw PreconditionError("no edge branch crosses E = 0 in the sampled k range");
  double acc = 0.0;
  for (const auto& v : vs) acc += std::abs(v.velocity);
  return acc / static_cast<double>(vs.size());
}

double decay_length(std::span<const double> profile, double lattice_constant) {
  const auto w = static_cast<int>(profile.size());
  if (w < 4) throw NotEdgeStateError("profile too short for an edge fit");
  const double total = std::accumulate(profile.begin(), profile.end(), 0.0);
  if (!(total > 0.0)) throw NotEdgeStateError("empty profile");
  const int q = std::max(1, w / 4);
  const double top = std::accumulate(profile.begin(), profile.begin() + q, 0.0) / total;
  const double bottom = std::accumulate(profile.end() - q, profile.end(), 0.0) / total;
  if (top + bottom < 0.6)
    throw NotEdgeStateError("state holds " + std::to_string(top + bottom) +
                            " of its weight in the outer quarters, need 0.6");

  // distance-ordered profile from the dominant edge
  std::vector<double> d(static_cast<std::size_t>(w / 2));
  for (int i = 0; i < w / 2; ++i) d[i] = top >= bottom ? profile[i] : profile[w - 1 - i];
  const auto peak = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  const double floor = 1e-14 * d[peak];
  std::size_t end = peak + 1;
  while (end < d.size() && d[end] < d[end - 1] && d[end] > floor) ++end;
  const std::size_t n = end - peak;
  if (n < 3) throw NotEdgeStateError("monotone tail too short for a fit");

  // log-linear least squares, density ~ exp(-2 y / xi)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = peak; i < end; ++i) {
    const double x = static_cast<double>(i), y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(n);
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  if (!(slope < 0.0)) throw NotEdgeStateError("profile does not decay away from the edge");
  return -2.0 / slope * lattice_constant;
}

std::vector<double> transverse_profile(const EigenPair& pair, const DeviceGeometry& g) {
  if (static_cast<std::size_t>(pair.vector.size()) != g.dimension())
    throw PreconditionError("eigenvector length does not match the device");
  std::vector<double> prof(static_cast<std::size_t>(g.ny), 0.0);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x)
      for (int c = 0; c < 4; ++c)
        prof[y] += std::norm(pair.vector[static_cast<Eigen::Index>(basis_index(g, x, y, c))]);
  return prof;
}

double decay_length(const EigenPair& pair, const DeviceGeometry& g, double lattice_constant) {
  const auto prof = transverse_profile(pair, g);
  return decay_length(prof, lattice_constant);
}

}  // namespace udw
