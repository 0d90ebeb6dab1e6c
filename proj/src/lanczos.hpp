#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace udw::detail {

using LinearOp = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

enum class Target { largest, smallest, largest_magnitude };

// Hermitian Krylov eigensolver with thick restarts and explicit locking.
// After a lock a random direction is mixed into the continuation vector so
// that further members of degenerate clusters are picked up. Without an exact
// count the search is complete when the leading converged Ritz value of such a
// refreshed subspace is rejected by `outside`.
struct LanczosProblem {
  LinearOp op;
  std::size_t n = 0;
  Target target = Target::largest;
  std::size_t max_wanted = 1;
  std::function<bool(double theta, double residual)> converged;
  std::function<bool(double theta)> outside;  // may be empty
  // number of wanted eigenpairs when known in advance, e.g. from an inertia count
  std::optional<std::size_t> exact_count;
  int krylov_dim = 24;
  int max_restarts = 40;
  std::uint64_t seed = 1;
};

struct LanczosOutcome {
  Eigen::MatrixXcd vectors;  // n x locked, orthonormal
  std::vector<double> values;
  bool converged = false;
  int restarts = 0;
  std::int64_t applications = 0;
  std::vector<double> history;
  std::string message;
};

LanczosOutcome deflated_lanczos(const LanczosProblem& problem);

}  // namespace udw::detail
