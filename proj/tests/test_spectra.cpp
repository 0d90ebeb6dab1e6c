#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "udw/lattice.hpp"
#include "udw/spectra.hpp"
#include "udw/units.hpp"

using namespace udw;

namespace {

DeviceGeometry torus(int nx, int ny) { return {nx, ny, Boundary::periodic, Boundary::periodic}; }

Eigen::VectorXcd random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = cplx(d(rng), d(rng));
  return v;
}

SparseHamiltonian perturbed(const DeviceGeometry& g) {
  const auto p = hgte_params();
  const double a = p.lattice_constant;
  const double cx = 0.5 * (g.nx - 1) * a, cy = 0.5 * (g.ny - 1) * a;
  const GateRegion gate{RegionShape::disk, cx, cy, 1.5 * a, 0, 0, 0.4};
  const LocalField field{5 * a, 1 * a, FieldProfile::gaussian, 1.0 * a, {0.03, -0.01, 0.02}};
  return assemble(p, g, std::vector{gate}, std::vector{field});
}

std::vector<double> dense_in_window(const SparseHamiltonian& h, const SpectralWindow& w) {
  std::vector<double> out;
  const auto e = dense_eigenvalues(h);
  for (double x : e)
    if (w.contains(x)) out.push_back(x);
  return out;
}

void check_orthonormal(const std::vector<EigenPair>& pairs) {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const cplx ip = pairs[i].vector.dot(pairs[j].vector);
      CHECK(std::abs(ip - cplx(i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

void check_residuals(const SparseHamiltonian& h, const SpectrumResult& r) {
  for (const auto& p : r.pairs) {
    const double res = (matvec(h, p.vector) - p.energy * p.vector).norm();
    CHECK(res <= r.report.tolerance);
    CHECK(std::abs(res - p.residual) <= 1e-3 * r.report.tolerance);
    CHECK(std::abs(p.vector.norm() - 1.0) < 1e-12);
  }
}

}  // namespace

TEST_CASE("matvec of a diagonal operator") {
  const DeviceGeometry g{2, 2};
  SparseHamiltonian::Storage m(16, 16);
  for (int i = 0; i < 16; ++i) m.insert(i, i) = 0.5 * i - 3.0;
  const SparseHamiltonian h(g, 1.0, m);
  for (int i = 0; i < 16; ++i) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(16);
    e[i] = 1.0;
    const auto y = matvec(h, e);
    CHECK((y - (0.5 * i - 3.0) * e).norm() == 0.0);
  }
  CHECK(matvec(h, Eigen::VectorXcd::Zero(16)).norm() == 0.0);
  CHECK_THROWS_AS(matvec(h, Eigen::VectorXcd::Zero(15)), PreconditionError);
}

TEST_CASE("matvec matches a dense product, serial and threaded") {
  const auto h = perturbed(DeviceGeometry{8, 8});
  const Eigen::MatrixXcd d = Eigen::MatrixXcd(h.matrix());
  const auto v = random_vector(h.dimension(), 3);
  const Eigen::VectorXcd want = d * v;
  CHECK((matvec(h, v) - want).norm() <= 1e-13 * want.norm());

  const auto big = perturbed(DeviceGeometry{40, 40});
  const auto w = random_vector(big.dimension(), 4);
  const auto serial = matvec(big, w, 1);
  CHECK((matvec(big, w, 4) - serial).norm() == 0.0);
  CHECK((matvec(big, 2.0 * w + w) - 3.0 * serial).norm() <= 1e-13 * serial.norm());
}

TEST_CASE("extremal eigenvalues of the periodic lattice") {
  const auto p = hgte_params();
  const auto h = assemble(p, torus(8, 8));
  double emax = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      emax = std::max(emax, analytic_dispersion(p, 2 * kPi * i / 8, 2 * kPi * j / 8));
  const auto r = extremal_eigs(h, 3);
  REQUIRE(r.pairs.size() == 6);
  CHECK(std::abs(r.pairs.front().energy + emax) < 1e-8);
  CHECK(std::abs(r.pairs.back().energy - emax) < 1e-8);
  const auto dense = dense_eigenvalues(h);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(r.pairs[static_cast<std::size_t>(i)].energy - dense[i]) < 1e-8);
    CHECK(std::abs(r.pairs[static_cast<std::size_t>(5 - i)].energy - dense[dense.size() - 1 - i]) <
          1e-8);
  }
  check_residuals(h, r);
}

TEST_CASE("extremal eigenvalues without hopping are +-M") {
  const BhzParams p{0.0, 0.8, 0.0, 1.0};
  const auto r = extremal_eigs(assemble(p, DeviceGeometry{4, 4}), 2);
  for (const auto& e : r.pairs) CHECK(std::abs(std::abs(e.energy) - 0.8) < 1e-10);
}

TEST_CASE("smallest toy lattice against the dense solve") {
  const auto h = perturbed(DeviceGeometry{2, 2});
  const auto dense = dense_eigenvalues(h);
  const auto r = extremal_eigs(h, 4);
  REQUIRE(r.pairs.size() == 8);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(r.pairs[static_cast<std::size_t>(i)].energy - dense[i]) < 1e-8);
    CHECK(std::abs(r.pairs[static_cast<std::size_t>(7 - i)].energy - dense[15 - i]) < 1e-8);
  }
}

TEST_CASE("gapped torus has no states in the +-10 meV window") {
  const auto h = assemble(hgte_params(), torus(8, 8));
  const SpectralWindow w{-0.01, 0.01, 16};
  for (auto s : {InteriorStrategy::folded_spectrum, InteriorStrategy::shift_invert}) {
    SolverOptions o;
    o.strategy = s;
    const auto r = interior_eigs(h, w, o);
    CHECK(r.pairs.empty());
    CHECK(r.report.converged);
  }
}

TEST_CASE("open ribbon has edge states in the gap, matching the dense solve") {
  const DeviceGeometry g{12, 60, Boundary::periodic, Boundary::open};
  const auto h = assemble(hgte_params(), g);
  const SpectralWindow w{-0.012, 0.012, 16};
  const auto want = dense_in_window(h, w);
  REQUIRE_FALSE(want.empty());
  const auto r = interior_eigs(h, w);
  CHECK(r.report.window_count == static_cast<std::int64_t>(want.size()));
  REQUIRE(r.pairs.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(r.pairs[i].energy - want[i]) < 1e-8);
  check_orthonormal(r.pairs);
  check_residuals(h, r);
  // more weight near the edges than in the middle
  for (const auto& p : r.pairs) {
    std::vector<double> rows(60, 0.0);
    for (int y = 0; y < 60; ++y)
      for (int x = 0; x < 12; ++x)
        for (int c = 0; c < 4; ++c)
          rows[static_cast<std::size_t>(y)] +=
              std::norm(p.vector[static_cast<Eigen::Index>(basis_index(g, x, y, c))]);
    double outer = 0.0;
    for (int y = 0; y < 60; ++y)
      if (y < 15 || y >= 45) outer += rows[static_cast<std::size_t>(y)];
    CHECK(outer > 0.5);
    const double peak = *std::max_element(rows.begin(), rows.begin() + 15);
    CHECK(peak > 1.5 * rows[30]);
    CHECK(std::abs(rows[9] - rows[50]) < 1e-6);
  }
}

TEST_CASE("folded spectrum on a narrow open ribbon") {
  const DeviceGeometry g{6, 16, Boundary::periodic, Boundary::open};
  const auto h = assemble(hgte_params(), g);
  const SpectralWindow w{-0.3, 0.3, 24};
  const auto want = dense_in_window(h, w);
  REQUIRE_FALSE(want.empty());
  SolverOptions o;
  o.strategy = InteriorStrategy::folded_spectrum;
  const auto r = interior_eigs(h, w, o);
  CHECK(r.report.strategy == "folded_spectrum");
  CHECK(r.report.window_count == -1);
  REQUIRE(r.pairs.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(r.pairs[i].energy - want[i]) < 1e-8);
  check_orthonormal(r.pairs);
  check_residuals(h, r);
}

TEST_CASE("completeness against the dense oracle on perturbed lattices") {
  struct Case {
    DeviceGeometry g;
    SpectralWindow w;
  };
  const Case cases[] = {
      {DeviceGeometry{12, 12}, {-0.05, 0.05, 40}},
      {DeviceGeometry{10, 12, Boundary::periodic, Boundary::open}, {-0.08, 0.02, 40}},
      {torus(9, 7), {0.5, 1.5, 60}},
  };
  for (const auto& c : cases) {
    const auto h = perturbed(c.g);
    const auto want = dense_in_window(h, c.w);
    REQUIRE(want.size() <= static_cast<std::size_t>(c.w.max_pairs));
    for (auto s : {InteriorStrategy::folded_spectrum, InteriorStrategy::shift_invert}) {
      SolverOptions o;
      o.strategy = s;
      const auto r = interior_eigs(h, c.w, o);
      REQUIRE(r.pairs.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(std::abs(r.pairs[i].energy - want[i]) < 1e-8);
      check_orthonormal(r.pairs);
      check_residuals(h, r);
    }
  }
}

TEST_CASE("degenerate clusters come back orthonormal") {
  // Kramers pairs on a gated torus are exactly twofold degenerate
  const auto p = hgte_params();
  const GateRegion gate{RegionShape::disk, 1.3, 1.3, 1.0, 0.0, 0.0, 0.7};
  const auto h = assemble(p, torus(6, 6), std::vector{gate});
  const SpectralWindow w{0.1, 0.6, 40};
  const auto want = dense_in_window(h, w);
  const auto r = interior_eigs(h, w);
  REQUIRE(r.pairs.size() == want.size());
  check_orthonormal(r.pairs);
}

TEST_CASE("a window wider than the spectrum returns everything up to max_pairs") {
  const auto h = perturbed(DeviceGeometry{2, 2});
  const auto dense = dense_eigenvalues(h);
  const auto r = interior_eigs(h, {-100.0, 100.0, 64});
  REQUIRE(r.pairs.size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(r.pairs[static_cast<std::size_t>(i)].energy - dense[i]) < 1e-8);
  const auto capped = interior_eigs(h, {-100.0, 100.0, 5});
  CHECK(capped.pairs.size() == 5);
}

TEST_CASE("window outside the spectral bounds is rejected") {
  const auto h = assemble(hgte_params(), torus(4, 4));
  CHECK_THROWS_AS(interior_eigs(h, {100.0, 101.0, 4}), PreconditionError);
  CHECK_THROWS_AS(interior_eigs(h, {0.1, -0.1, 4}), PreconditionError);
}

TEST_CASE("fixed seeds give bit-identical results") {
  const auto h = perturbed(DeviceGeometry{10, 10});
  const SpectralWindow w{-0.1, 0.1, 24};
  SolverOptions o;
  o.seed = 42;
  const auto a = interior_eigs(h, w, o);
  const auto b = interior_eigs(h, w, o);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].energy == b.pairs[i].energy);
    CHECK((a.pairs[i].vector - b.pairs[i].vector).norm() == 0.0);
  }
  CHECK(a.report.residual_history == b.report.residual_history);
}

TEST_CASE("solver report and non-convergence") {
  const auto h = perturbed(DeviceGeometry{12, 12});
  SolverOptions o;
  o.max_restarts = 1;
  o.krylov_dim = 6;
  o.tolerance = 1e-14;
  try {
    (void)interior_eigs(h, {-0.5, 0.5, 40}, o);
    FAIL("expected a convergence failure");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.partial().report.converged);
    CHECK_FALSE(e.partial().report.message.empty());
  }
  const auto r = interior_eigs(h, {0.5, 1.0, 40});
  CHECK(r.report.converged);
  CHECK(r.report.operator_applications > 0);
  CHECK(r.report.strategy == "shift_invert");
  CHECK(r.report.window_count == static_cast<std::int64_t>(r.pairs.size()));
  CHECK(r.report.max_residual <= r.report.tolerance);
}
