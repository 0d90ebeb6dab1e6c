#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace udw {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

// Square-lattice BHZ parameters. `mass` is the lattice mass term, not the
// continuum band-inversion mass (see ContinuumParams::M_cont).
struct BhzParams {
  double epsilon = 0.0;           // eV
  double mass = 0.0;              // eV
  double lambda = 0.0;            // eV
  double lattice_constant = 1.0;  // nm

  void validate() const;
  bool operator==(const BhzParams&) const = default;
};

struct ContinuumParams {
  double A = 0.0;       // eV (times lattice constant)
  double B = 0.0;       // eV
  double M_cont = 0.0;  // eV
  double lattice_constant = 1.0;

  bool operator==(const ContinuumParams&) const = default;
};

// HgTe/CdTe well used throughout the device studies, a = 0.65 nm.
BhzParams hgte_params();

BhzParams continuum_map(double A, double B, double M_cont, double lattice_constant);
ContinuumParams to_continuum(const BhzParams& params);

enum class Boundary { periodic, open };

struct DeviceGeometry {
  int nx = 2;
  int ny = 2;
  Boundary boundary_x = Boundary::open;
  Boundary boundary_y = Boundary::open;

  void validate() const;
  std::size_t sites() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t dimension() const { return 4 * sites(); }
  std::size_t site(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
  bool operator==(const DeviceGeometry&) const = default;
};

inline std::size_t basis_index(const DeviceGeometry& g, int x, int y, int component) {
  return 4 * g.site(x, y) + static_cast<std::size_t>(component);
}

enum class RegionShape { rectangle, disk, half_disk };

// Positions in nm; site (x, y) sits at (x*a, y*a).
struct GateRegion {
  RegionShape shape = RegionShape::rectangle;
  double cx = 0.0;
  double cy = 0.0;
  double rx = 0.0;         // rectangle half width, or disk radius
  double ry = 0.0;         // rectangle half height
  double direction = 0.0;  // half_disk: direction of the curved side, rad from +x
  double potential = 0.0;  // eV

  bool operator==(const GateRegion&) const = default;
};

enum class FieldProfile { disk, gaussian };

struct LocalField {
  double cx = 0.0;
  double cy = 0.0;
  FieldProfile profile = FieldProfile::disk;
  double width = 0.0;  // disk radius or gaussian sigma, nm
  std::array<double, 3> b{0.0, 0.0, 0.0};  // Zeeman energy, eV

  bool operator==(const LocalField&) const = default;
};

// Displacement of site (ix, iy) from (cx, cy), minimum image along periodic axes.
std::array<double, 2> site_offset(const DeviceGeometry& g, double a, int ix, int iy, double cx, double cy);
bool region_contains(const GateRegion& r, const DeviceGeometry& g, double a, int ix, int iy);
std::array<double, 3> field_at(const LocalField& f, const DeviceGeometry& g, double a, int ix, int iy);

// Dirac matrices in the spin (x) orbital basis.
Matrix4c gamma5();
Matrix4c gamma_x();
Matrix4c gamma_y();
Matrix4c spin_matrix(int axis);  // sigma_axis (x) I2, axis in {0,1,2}

Matrix4c bloch_hamiltonian(const BhzParams& p, double kx, double ky);
// Positive branch E(k); the spectrum at k is {+E, +E, -E, -E}.
double analytic_dispersion(const BhzParams& p, double kx, double ky);

Matrix4c hopping_x(const BhzParams& p);  // block H[r, r + x]
Matrix4c hopping_y(const BhzParams& p);  // block H[r, r + y]
Matrix4c onsite_block(const BhzParams& p, double potential, const std::array<double, 3>& b);

class SparseHamiltonian {
 public:
  using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::int64_t>;

  SparseHamiltonian(DeviceGeometry geometry, double lattice_constant, Storage matrix);

  const DeviceGeometry& geometry() const { return geometry_; }
  double lattice_constant() const { return a_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Storage& matrix() const { return matrix_; }

  Matrix4c block(std::size_t row_site, std::size_t col_site) const;
  // Row-sum bound on the spectral radius.
  double gershgorin_bound() const;

 private:
  DeviceGeometry geometry_;
  double a_;
  Storage matrix_;
};

struct AssemblyOptions {
  std::size_t max_dimension = 4'000'000;
};

SparseHamiltonian assemble(const BhzParams& params, const DeviceGeometry& geometry,
                           std::span<const GateRegion> gates = {},
                           std::span<const LocalField> fields = {},
                           const AssemblyOptions& options = {});

}  // namespace udw
