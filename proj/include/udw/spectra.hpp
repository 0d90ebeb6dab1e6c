#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "udw/errors.hpp"
#include "udw/lattice.hpp"

namespace udw {

struct EigenPair {
  double energy = 0.0;  // eV
  Eigen::VectorXcd vector;
  double residual = 0.0;  // ||Hv - Ev||, eV
};

struct SpectralWindow {
  double e_min = -0.01;
  double e_max = 0.01;
  int max_pairs = 64;

  void validate() const;
  double center() const { return 0.5 * (e_min + e_max); }
  double half_width() const { return 0.5 * (e_max - e_min); }
  bool contains(double e) const { return e >= e_min && e <= e_max; }
  bool operator==(const SpectralWindow&) const = default;
};

enum class InteriorStrategy { folded_spectrum, shift_invert };

struct SolverOptions {
  double tolerance = 1e-8;  // residual bound relative to the spectral radius estimate
  int krylov_dim = 0;       // 0: 4 * wanted pairs, at least 24
  int max_restarts = 40;
  std::uint64_t seed = 1;
  InteriorStrategy strategy = InteriorStrategy::shift_invert;
  int threads = 1;

  bool operator==(const SolverOptions&) const = default;
};

struct SolverReport {
  std::string strategy;
  bool converged = false;
  int restarts = 0;
  std::int64_t operator_applications = 0;
  double spectral_radius = 0.0;
  double tolerance = 0.0;  // absolute residual bound in eV
  double max_residual = 0.0;
  std::int64_t window_count = -1;  // eigenvalues in the window by inertia, -1 if not counted
  std::vector<double> residual_history;  // best unconverged Ritz residual per restart
  std::string message;
};

struct SpectrumResult {
  std::vector<EigenPair> pairs;  // ascending energy
  SolverReport report;
};

// Carries whatever converged before the solver gave up.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, SpectrumResult partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const SpectrumResult& partial() const { return partial_; }

 private:
  SpectrumResult partial_;
};

Eigen::VectorXcd matvec(const SparseHamiltonian& h, const Eigen::VectorXcd& v, int threads = 1);
void matvec_into(const SparseHamiltonian& h, const Eigen::VectorXcd& v, Eigen::VectorXcd& out,
                 int threads = 1);

// `count` algebraically smallest followed by `count` largest eigenpairs, ascending.
SpectrumResult extremal_eigs(const SparseHamiltonian& h, int count,
                             const SolverOptions& options = {});

SpectrumResult interior_eigs(const SparseHamiltonian& h, const SpectralWindow& window,
                             const SolverOptions& options = {});

// Dense reference, for oracle sizes only.
Eigen::VectorXd dense_eigenvalues(const SparseHamiltonian& h);

}  // namespace udw
