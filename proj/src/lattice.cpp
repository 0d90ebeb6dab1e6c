#include "udw/lattice.hpp"

#include <cmath>
#include <string>

#include "udw/errors.hpp"

namespace udw {

namespace {

const cplx I(0.0, 1.0);

Matrix4c kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eigen::Matrix2cd pauli(int axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, -I, I, 0; break;
    case 2: m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw PreconditionError(std::string(what) + " must be finite");
}

double wrap(double d, double period) {
  return d - period * std::round(d / period);
}

}  // namespace

void BhzParams::validate() const {
  require_finite(epsilon, "epsilon");
  require_finite(mass, "mass");
  require_finite(lambda, "lambda");
  if (!(lattice_constant > 0.0) || !std::isfinite(lattice_constant))
    throw PreconditionError("lattice_constant must be positive");
}

BhzParams hgte_params() { return {3.74, 7.4654, 0.55, 0.65}; }

BhzParams continuum_map(double A, double B, double M_cont, double lattice_constant) {
  if (B == 0.0) throw PreconditionError("continuum B = 0 gives a degenerate lattice model");
  BhzParams p{-2.0 * B, -4.0 * B + M_cont, A, lattice_constant};
  p.validate();
  return p;
}

ContinuumParams to_continuum(const BhzParams& p) {
  if (p.epsilon == 0.0) throw PreconditionError("epsilon = 0 has no continuum counterpart");
  const double B = -0.5 * p.epsilon;
  return {p.lambda, B, p.mass + 4.0 * B, p.lattice_constant};
}

void DeviceGeometry::validate() const {
  if (nx < 2 || ny < 2)
    throw PreconditionError("device needs at least 2 sites per direction, got " +
                            std::to_string(nx) + "x" + std::to_string(ny));
}

std::array<double, 2> site_offset(const DeviceGeometry& g, double a, int ix, int iy, double cx,
                                  double cy) {
  double dx = ix * a - cx;
  double dy = iy * a - cy;
  if (g.boundary_x == Boundary::periodic) dx = wrap(dx, g.nx * a);
  if (g.boundary_y == Boundary::periodic) dy = wrap(dy, g.ny * a);
  return {dx, dy};
}

bool region_contains(const GateRegion& r, const DeviceGeometry& g, double a, int ix, int iy) {
  const auto [dx, dy] = site_offset(g, a, ix, iy, r.cx, r.cy);
  // small slack so sites exactly on the boundary are inside despite rounding
  const double slack = 1e-9 * a;
  switch (r.shape) {
    case RegionShape::rectangle:
      return std::abs(dx) <= r.rx + slack && std::abs(dy) <= r.ry + slack;
    case RegionShape::disk:
      return std::hypot(dx, dy) <= r.rx + slack;
    case RegionShape::half_disk:
      return std::hypot(dx, dy) <= r.rx + slack &&
             dx * std::cos(r.direction) + dy * std::sin(r.direction) >= -slack;
  }
  return false;
}

std::array<double, 3> field_at(const LocalField& f, const DeviceGeometry& g, double a, int ix,
                               int iy) {
  const auto [dx, dy] = site_offset(g, a, ix, iy, f.cx, f.cy);
  const double r = std::hypot(dx, dy);
  double w = 0.0;
  if (f.profile == FieldProfile::disk)
    w = r <= f.width + 1e-9 * a ? 1.0 : 0.0;
  else
    w = std::exp(-0.5 * r * r / (f.width * f.width));
  return {w * f.b[0], w * f.b[1], w * f.b[2]};
}

Matrix4c gamma5() { return kron2(pauli(3), pauli(2)); }
Matrix4c gamma_x() { return kron2(pauli(2), pauli(0)); }
Matrix4c gamma_y() { return -kron2(pauli(3), pauli(1)); }
Matrix4c spin_matrix(int axis) { return kron2(pauli(axis), pauli(3)); }

Matrix4c bloch_hamiltonian(const BhzParams& p, double kx, double ky) {
  const double d5 = p.mass - p.epsilon * (std::cos(kx) + std::cos(ky));
  return d5 * gamma5() + p.lambda * std::sin(kx) * gamma_x() - p.lambda * std::sin(ky) * gamma_y();
}

double analytic_dispersion(const BhzParams& p, double kx, double ky) {
  const double d5 = p.mass - p.epsilon * (std::cos(kx) + std::cos(ky));
  const double sx = std::sin(kx), sy = std::sin(ky);
  return std::sqrt(d5 * d5 + p.lambda * p.lambda * (sx * sx + sy * sy));
}

Matrix4c hopping_x(const BhzParams& p) {
  return -0.5 * p.epsilon * gamma5() - 0.5 * I * p.lambda * gamma_x();
}

Matrix4c hopping_y(const BhzParams& p) {
  return -0.5 * p.epsilon * gamma5() + 0.5 * I * p.lambda * gamma_y();
}

Matrix4c onsite_block(const BhzParams& p, double potential, const std::array<double, 3>& b) {
  Matrix4c h = p.mass * gamma5() + potential * Matrix4c::Identity();
  for (int k = 0; k < 3; ++k)
    if (b[k] != 0.0) h += b[k] * spin_matrix(k);
  return h;
}

SparseHamiltonian::SparseHamiltonian(DeviceGeometry geometry, double lattice_constant, Storage m)
    : geometry_(geometry), a_(lattice_constant), matrix_(std::move(m)) {}

Matrix4c SparseHamiltonian::block(std::size_t row_site, std::size_t col_site) const {
  if (row_site >= geometry_.sites() || col_site >= geometry_.sites())
    throw PreconditionError("site index out of range");
  Matrix4c out = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    const auto row = static_cast<std::int64_t>(4 * row_site + i);
    for (Storage::InnerIterator it(matrix_, row); it; ++it) {
      const auto c = static_cast<std::size_t>(it.col());
      if (c / 4 == col_site) out(i, static_cast<int>(c % 4)) = it.value();
    }
  }
  return out;
}

double SparseHamiltonian::gershgorin_bound() const {
  double best = 0.0;
  for (std::int64_t r = 0; r < matrix_.outerSize(); ++r) {
    double s = 0.0;
    for (Storage::InnerIterator it(matrix_, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

SparseHamiltonian assemble(const BhzParams& params, const DeviceGeometry& g,
                           std::span<const GateRegion> gates, std::span<const LocalField> fields,
                           const AssemblyOptions& options) {
  params.validate();
  g.validate();
  const double a = params.lattice_constant;
  if (g.dimension() > options.max_dimension)
    throw PreconditionError("dimension " + std::to_string(g.dimension()) +
                            " exceeds the configured cap " + std::to_string(options.max_dimension));

  std::vector<double> potential(g.sites(), 0.0);
  std::vector<std::array<double, 3>> zeeman(g.sites(), {0.0, 0.0, 0.0});

  for (const auto& r : gates) {
    require_finite(r.potential, "gate potential");
    if (r.rx < 0.0 || (r.shape == RegionShape::rectangle && r.ry < 0.0))
      throw PreconditionError("gate extents must be non-negative");
    std::size_t hits = 0;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x)
        if (region_contains(r, g, a, x, y)) {
          potential[g.site(x, y)] += r.potential;
          ++hits;
        }
    if (hits == 0) throw PreconditionError("gate region covers no site of the device");
  }

  for (const auto& f : fields) {
    for (double c : f.b) require_finite(c, "field vector");
    if (!(f.width > 0.0)) throw PreconditionError("field profile width must be positive");
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        const auto b = field_at(f, g, a, x, y);
        auto& z = zeeman[g.site(x, y)];
        for (int k = 0; k < 3; ++k) z[k] += b[k];
      }
  }

  using Triplet = Eigen::Triplet<cplx, std::int64_t>;
  std::vector<Triplet> trips;
  trips.reserve(g.sites() * 4 * 12);

  auto put = [&](std::size_t rs, std::size_t cs, const Matrix4c& blk) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (blk(i, j) != cplx(0.0))
          trips.emplace_back(static_cast<std::int64_t>(4 * rs + i),
                             static_cast<std::int64_t>(4 * cs + j), blk(i, j));
  };

  const Matrix4c tx = hopping_x(params), ty = hopping_y(params);
  const Matrix4c txh = tx.adjoint(), tyh = ty.adjoint();

  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) {
      const std::size_t s = g.site(x, y);
      put(s, s, onsite_block(params, potential[s], zeeman[s]));
      if (x + 1 < g.nx || g.boundary_x == Boundary::periodic) {
        const std::size_t n = g.site((x + 1) % g.nx, y);
        put(s, n, tx);
        put(n, s, txh);
      }
      if (y + 1 < g.ny || g.boundary_y == Boundary::periodic) {
        const std::size_t n = g.site(x, (y + 1) % g.ny);
        put(s, n, ty);
        put(n, s, tyh);
      }
    }

  const auto dim = static_cast<std::int64_t>(g.dimension());
  SparseHamiltonian::Storage m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune([](std::int64_t, std::int64_t, const cplx& v) { return v != cplx(0.0); });
  m.makeCompressed();
  return SparseHamiltonian(g, a, std::move(m));
}

}  // namespace udw
