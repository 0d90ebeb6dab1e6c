#include "udw/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "lanczos.hpp"

namespace udw {

namespace {

using detail::LanczosOutcome;
using detail::LanczosProblem;
using detail::Target;

int default_krylov(const SolverOptions& o, std::size_t wanted) {
  if (o.krylov_dim > 0) return o.krylov_dim;
  return static_cast<int>(std::max<std::size_t>(24, 4 * wanted));
}

double residual_of(const SparseHamiltonian& h, const Eigen::VectorXcd& v, double e, int threads) {
  Eigen::VectorXcd hv(v.size());
  matvec_into(h, v, hv, threads);
  return (hv - e * v).norm();
}

// Rayleigh-Ritz of H on span(V); V must have orthonormal columns.
void rayleigh_ritz(const SparseHamiltonian& h, const Eigen::MatrixXcd& V, int threads,
                   Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) {
  Eigen::MatrixXcd HV(V.rows(), V.cols());
  Eigen::VectorXcd tmp(V.rows());
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    matvec_into(h, V.col(c), tmp, threads);
    HV.col(c) = tmp;
  }
  Eigen::MatrixXcd small = V.adjoint() * HV;
  small = 0.5 * (small + small.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(small);
  values = es.eigenvalues();
  vectors = V * es.eigenvectors();
}

// Eigenvalues closer than 1e-10 eV form a cluster; orthonormalize inside it.
void orthonormalize_clusters(std::vector<EigenPair>& pairs) {
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i + 1;
    while (j < pairs.size() && pairs[j].energy - pairs[j - 1].energy < 1e-10) ++j;
    if (j - i > 1) {
      Eigen::MatrixXcd block(pairs[i].vector.size(), static_cast<Eigen::Index>(j - i));
      for (std::size_t c = i; c < j; ++c) block.col(static_cast<Eigen::Index>(c - i)) = pairs[c].vector;
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(block);
      Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(block.rows(), block.cols());
      for (std::size_t c = i; c < j; ++c) pairs[c].vector = q.col(static_cast<Eigen::Index>(c - i));
    }
    i = j;
  }
}

std::vector<EigenPair> finalize(const SparseHamiltonian& h, const Eigen::MatrixXcd& V,
                                const SpectralWindow* window, int threads) {
  std::vector<EigenPair> pairs;
  if (V.cols() == 0) return pairs;
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  rayleigh_ritz(h, V, threads, values, vectors);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (window && !window->contains(values[i])) continue;
    pairs.push_back({values[i], vectors.col(i).normalized(), 0.0});
  }
  if (window && static_cast<int>(pairs.size()) > window->max_pairs) {
    const double c = window->center();
    std::stable_sort(pairs.begin(), pairs.end(), [c](const EigenPair& a, const EigenPair& b) {
      return std::abs(a.energy - c) < std::abs(b.energy - c);
    });
    pairs.resize(static_cast<std::size_t>(window->max_pairs));
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.energy < b.energy; });
  orthonormalize_clusters(pairs);
  for (auto& p : pairs) p.residual = residual_of(h, p.vector, p.energy, threads);
  return pairs;
}

using ColMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

ColMat shifted(const SparseHamiltonian& h, double shift) {
  ColMat a = h.matrix();
  ColMat id(a.rows(), a.cols());
  id.setIdentity();
  a = a - shift * id;
  a.makeCompressed();
  return a;
}

// Eigenvalues of H below e from the inertia of an LDL^H factorization of H - e
// (Sylvester). Unpivoted, so a failed or singular factorization gives nothing.
std::optional<std::size_t> count_below(const SparseHamiltonian& h, double e) {
  Eigen::SimplicialLDLT<ColMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(shifted(h, e));
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const auto& d = ldlt.vectorD();
  std::size_t neg = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double x = d[i].real();
    if (!std::isfinite(x) || x == 0.0) return std::nullopt;
    if (x < 0.0) ++neg;
  }
  return neg;
}

void fill_report(SolverReport& r, const LanczosOutcome& o) {
  r.restarts += o.restarts;
  r.operator_applications += o.applications;
  r.residual_history.insert(r.residual_history.end(), o.history.begin(), o.history.end());
  if (!r.message.empty()) r.message += "; ";
  r.message += o.message;
}

void check_residuals(SpectrumResult& res) {
  double worst = 0.0;
  for (const auto& p : res.pairs) worst = std::max(worst, p.residual);
  res.report.max_residual = worst;
  if (worst > res.report.tolerance) {
    res.report.converged = false;
    std::ostringstream os;
    os << "residual " << worst << " eV exceeds tolerance " << res.report.tolerance << " eV";
    res.report.message += "; " + os.str();
  }
}

}  // namespace

void SpectralWindow::validate() const {
  if (!std::isfinite(e_min) || !std::isfinite(e_max) || !(e_min < e_max))
    throw PreconditionError("spectral window needs e_min < e_max");
  if (max_pairs < 1) throw PreconditionError("spectral window needs max_pairs >= 1");
}

void matvec_into(const SparseHamiltonian& h, const Eigen::VectorXcd& v, Eigen::VectorXcd& out,
                 int threads) {
  const auto& m = h.matrix();
  if (static_cast<std::size_t>(v.size()) != h.dimension())
    throw PreconditionError("vector length " + std::to_string(v.size()) +
                            " does not match dimension " + std::to_string(h.dimension()));
  out.resize(v.size());
  const std::int64_t rows = m.rows();
  auto run = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      cplx acc(0.0);
      for (SparseHamiltonian::Storage::InnerIterator it(m, r); it; ++it)
        acc += it.value() * v[it.col()];
      out[r] = acc;
    }
  };
  if (threads <= 1 || rows < 4096) {
    run(0, rows);
    return;
  }
  std::vector<std::jthread> pool;
  const std::int64_t chunk = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk, hi = std::min(rows, lo + chunk);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
}

Eigen::VectorXcd matvec(const SparseHamiltonian& h, const Eigen::VectorXcd& v, int threads) {
  Eigen::VectorXcd out;
  matvec_into(h, v, out, threads);
  return out;
}

Eigen::VectorXd dense_eigenvalues(const SparseHamiltonian& h) {
  if (h.dimension() > 8192) throw PreconditionError("dense oracle limited to dimension 8192");
  Eigen::MatrixXcd d = Eigen::MatrixXcd(h.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

SpectrumResult extremal_eigs(const SparseHamiltonian& h, int count, const SolverOptions& o) {
  if (count < 1) throw PreconditionError("extremal_eigs needs count >= 1");
  SpectrumResult res;
  auto& rep = res.report;
  rep.strategy = "lanczos";
  rep.spectral_radius = h.gershgorin_bound();
  rep.tolerance = o.tolerance * rep.spectral_radius;
  const double tol = rep.tolerance;

  LanczosProblem p;
  p.n = h.dimension();
  p.op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { matvec_into(h, x, y, o.threads); };
  p.max_wanted = static_cast<std::size_t>(count);
  p.converged = [tol](double, double r) { return r <= 0.1 * tol; };
  p.krylov_dim = default_krylov(o, static_cast<std::size_t>(count));
  p.max_restarts = o.max_restarts;

  bool ok = true;
  for (Target t : {Target::smallest, Target::largest}) {
    p.target = t;
    p.seed = o.seed + (t == Target::largest ? 1 : 0);
    const LanczosOutcome out = deflated_lanczos(p);
    fill_report(rep, out);
    ok = ok && out.converged;
    // Ritz values from the Krylov recurrence, refined on H itself
    auto part = finalize(h, out.vectors, nullptr, o.threads);
    if (t == Target::largest && part.size() > static_cast<std::size_t>(count))
      part.erase(part.begin(), part.end() - count);
    if (t == Target::smallest && part.size() > static_cast<std::size_t>(count))
      part.resize(static_cast<std::size_t>(count));
    res.pairs.insert(res.pairs.end(), part.begin(), part.end());
  }
  rep.converged = ok;
  check_residuals(res);
  if (!rep.converged) throw ConvergenceError("extremal_eigs: " + rep.message, res);
  return res;
}

SpectrumResult interior_eigs(const SparseHamiltonian& h, const SpectralWindow& window,
                             const SolverOptions& o) {
  window.validate();
  SpectrumResult res;
  auto& rep = res.report;
  rep.spectral_radius = h.gershgorin_bound();
  rep.tolerance = o.tolerance * rep.spectral_radius;
  const double rho = rep.spectral_radius;
  const double tol = rep.tolerance;
  if (window.e_min > rho || window.e_max < -rho)
    throw PreconditionError("spectral window lies outside the spectral bounds +-" +
                            std::to_string(rho) + " eV");

  const double c = window.center();
  const double hw = window.half_width();
  const auto wanted = static_cast<std::size_t>(window.max_pairs);

  LanczosProblem p;
  p.n = h.dimension();
  p.max_wanted = wanted;
  p.krylov_dim = default_krylov(o, wanted);
  p.max_restarts = o.max_restarts;
  p.seed = o.seed;

  LanczosOutcome out;
  if (o.strategy == InteriorStrategy::folded_spectrum) {
    rep.strategy = "folded_spectrum";
    Eigen::VectorXcd tmp(static_cast<Eigen::Index>(p.n));
    p.op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      matvec_into(h, x, tmp, o.threads);
      tmp -= c * x;
      matvec_into(h, tmp, y, o.threads);
      y -= c * tmp;
    };
    p.target = Target::smallest;
    // an out-of-window error component at distance d' > hw contributes
    // r_H <= r_B / hw, so the folded residual is scaled by the half width
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * rho * rho;
    const double tol_b = std::max(0.1 * tol * std::min(hw, rho), floor);
    p.converged = [tol_b](double, double r) { return r <= tol_b; };
    p.outside = [hw](double theta) { return theta > hw * hw; };
    out = deflated_lanczos(p);
  } else {
    rep.strategy = "shift_invert";
    // keep the shift off any exactly representable eigenvalue
    const double shift = c + 1e-3 * hw * 0.6180339887498949;
    const ColMat a = shifted(h, shift);
    Eigen::SparseLU<ColMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
      throw NumericalError("shift-invert factorization failed: " + lu.lastErrorMessage());
    p.op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = lu.solve(x); };
    p.target = Target::largest_magnitude;
    // a component at distance d' contributes r_H <= |d d'| r_A <= 2 rho r_A / |theta|
    p.converged = [tol, rho](double theta, double r) {
      return r <= 0.1 * tol * std::abs(theta) / (2.0 * rho);
    };
    p.outside = [shift, c, hw](double theta) {
      return std::abs(shift + 1.0 / theta - c) > hw;
    };
    const auto below_max = count_below(h, window.e_max);
    const auto below_min = count_below(h, window.e_min);
    if (below_max && below_min && *below_max >= *below_min) {
      p.exact_count = *below_max - *below_min;
      rep.window_count = static_cast<std::int64_t>(*p.exact_count);
    }
    out = deflated_lanczos(p);
  }

  fill_report(rep, out);
  res.pairs = finalize(h, out.vectors, &window, o.threads);
  rep.converged = out.converged;
  check_residuals(res);
  if (!rep.converged) throw ConvergenceError("interior_eigs: " + rep.message, res);
  return res;
}

}  // namespace udw
