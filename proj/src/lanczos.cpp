#include "lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace udw::detail {

namespace {

void project_out(const Eigen::MatrixXcd& basis, Eigen::Index cols, Eigen::VectorXcd& w) {
  if (cols == 0) return;
  const auto b = basis.leftCols(cols);
  // two passes of classical Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= b * (b.adjoint() * w);
}

class StartVectors {
 public:
  explicit StartVectors(std::uint64_t seed) : rng_(seed) {}

  Eigen::VectorXcd random(std::size_t n) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = {nd(rng_), nd(rng_)};
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

// Block residual expansion with thick restarts. A(V) is kept next to V, so the
// Ritz residuals are exact. In a pure Krylov basis the residuals of all Ritz
// pairs are parallel and this reduces to Lanczos; expanding by residuals
// instead keeps the method sound after random directions are mixed in.
LanczosOutcome deflated_lanczos(const LanczosProblem& p) {
  LanczosOutcome out;
  const auto n = static_cast<Eigen::Index>(p.n);
  const auto cap = static_cast<Eigen::Index>(std::min(p.max_wanted, p.n));
  const Eigen::Index m = std::min<Eigen::Index>(std::max(p.krylov_dim, 8), n);
  const Eigen::Index block = std::clamp<Eigen::Index>(m / 8, 1, 8);

  Eigen::MatrixXcd locked(n, std::min<Eigen::Index>(n, cap + 8));
  Eigen::Index nlocked = 0;

  auto better = [&](double a, double b) {
    switch (p.target) {
      case Target::largest: return a > b;
      case Target::smallest: return a < b;
      case Target::largest_magnitude: return std::abs(a) > std::abs(b);
    }
    return false;
  };
  // worst value among the `cap` best locked ones
  auto cap_threshold = [&]() {
    std::vector<double> v = out.values;
    std::sort(v.begin(), v.end(), better);
    return v[static_cast<std::size_t>(cap - 1)];
  };
  auto lock = [&](const Eigen::VectorXcd& y, double th) {
    if (nlocked == locked.cols())
      locked.conservativeResize(n, std::min<Eigen::Index>(n, 2 * locked.cols() + 1));
    locked.col(nlocked++) = y;
    out.values.push_back(th);
  };
  auto finish = [&](bool ok, std::string msg) {
    out.vectors = locked.leftCols(nlocked);
    out.converged = ok;
    out.message = std::move(msg);
    return out;
  };

  if (cap == 0) return finish(true, "nothing requested");
  if (p.exact_count && *p.exact_count == 0) return finish(true, "window holds no eigenvalues");
  const bool counted = p.exact_count && *p.exact_count <= static_cast<std::size_t>(cap);
  const Eigen::Index target_count = counted ? static_cast<Eigen::Index>(*p.exact_count) : cap;

  StartVectors starts(p.seed);
  Eigen::MatrixXcd V(n, m), AV(n, m);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m, m);
  Eigen::Index cols = 0;
  Eigen::VectorXcd w(n);

  // Append a direction to the basis; false when it lies in the current span.
  auto append = [&](Eigen::VectorXcd v) {
    const double scale = v.norm();
    project_out(locked, nlocked, v);
    project_out(V, cols, v);
    const double nrm = v.norm();
    if (!(nrm > 1e-12 * scale) || nrm == 0.0) return false;
    v /= nrm;
    project_out(locked, nlocked, v);
    project_out(V, cols, v);
    V.col(cols) = v.normalized();
    p.op(V.col(cols), w);
    ++out.applications;
    AV.col(cols) = w;
    T.col(cols).head(cols + 1) = V.leftCols(cols + 1).adjoint() * w;
    T.row(cols).head(cols) = T.col(cols).head(cols).adjoint();
    T(cols, cols) = T(cols, cols).real();
    ++cols;
    return true;
  };
  auto append_random = [&]() {
    if (cols >= m || cols + nlocked >= n) return false;
    for (int tries = 0; tries < 4; ++tries)
      if (append(starts.random(p.n))) return true;
    return false;
  };
  // Replace the basis by the Ritz vectors listed in `keep`.
  auto compress = [&](const Eigen::MatrixXcd& S, const Eigen::VectorXd& theta,
                      const std::vector<Eigen::Index>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXcd Sk(cols, k);
    for (Eigen::Index j = 0; j < k; ++j) Sk.col(j) = S.col(keep[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXcd Vk = V.leftCols(cols) * Sk;
    const Eigen::MatrixXcd AVk = AV.leftCols(cols) * Sk;
    V.leftCols(k) = Vk;
    AV.leftCols(k) = AVk;
    T.setZero();
    for (Eigen::Index j = 0; j < k; ++j) T(j, j) = theta[keep[static_cast<std::size_t>(j)]];
    cols = k;
  };

  append_random();
  // Expansion steps since a random direction last entered the basis. A
  // rejected leading pair is trusted only after a few.
  int fresh_age = 0;
  int restarts = 0;
  int stalls = 0;

  while (true) {
    if (cols == 0 && !append_random()) return finish(true, "full space resolved");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T.topLeftCorner(cols, cols));
    const Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXcd S = es.eigenvectors();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return better(theta[a], theta[b]); });

    const bool fresh = fresh_age >= 3;
    bool locked_now = false;
    bool rejected = false;
    std::vector<char> used(static_cast<std::size_t>(cols), 0);
    std::vector<Eigen::VectorXcd> residuals;
    double worst = 0.0;
    bool prefix = true;
    for (Eigen::Index idx : order) {
      if (static_cast<Eigen::Index>(residuals.size()) >= block) break;
      const double th = theta[idx];
      const Eigen::VectorXcd y = V.leftCols(cols) * S.col(idx);
      Eigen::VectorXcd r = AV.leftCols(cols) * S.col(idx) - th * y;
      // residual of the operator deflated by the locked set
      project_out(locked, nlocked, r);
      const double rn = r.norm();
      const bool ok = p.converged(th, rn);
      if (prefix && ok) {
        if (p.outside && p.outside(th)) {
          if (fresh && !locked_now) return finish(true, "window exhausted");
          rejected = true;
          break;
        }
        if (nlocked >= cap && !better(th, cap_threshold())) {
          if (fresh && !locked_now) return finish(true, "requested count reached");
          rejected = true;
          break;
        }
        lock(y, th);
        used[static_cast<std::size_t>(idx)] = 1;
        locked_now = true;
        if (counted && nlocked >= target_count)
          return finish(true, "all " + std::to_string(target_count) + " eigenvalues in the window");
        if (nlocked == n) return finish(true, "full space resolved");
        continue;
      }
      if (prefix) worst = rn;
      prefix = false;
      if (!ok) residuals.push_back(std::move(r));
    }
    out.history.push_back(worst);

    const bool full = cols + block + 1 > m;
    if (locked_now || full) {
      std::vector<Eigen::Index> keep;
      const Eigen::Index keep_max = full ? std::max<Eigen::Index>(1, m / 2) : cols;
      for (Eigen::Index idx : order) {
        if (used[static_cast<std::size_t>(idx)]) continue;
        if (static_cast<Eigen::Index>(keep.size()) >= keep_max) break;
        keep.push_back(idx);
      }
      compress(S, theta, keep);
      if (full) {
        out.restarts = ++restarts;
        if (restarts > p.max_restarts) break;
      }
    }

    bool grew = false;
    if (locked_now) {
      // refresh so that missed members of degenerate clusters get a component
      grew = append_random();
      fresh_age = 0;
    } else {
      ++fresh_age;
    }
    for (auto& r : residuals) {
      if (cols >= m) break;
      grew = append(std::move(r)) || grew;
    }
    if (!grew && !append_random()) {
      // nothing left to expand with: the basis is invariant
      if (residuals.empty() && !locked_now && !rejected) return finish(true, "full space resolved");
      fresh_age = 3;
      if (++stalls > 4) break;
    } else {
      stalls = 0;
    }
  }

  return finish(false, "no convergence after " + std::to_string(p.max_restarts) + " restarts");
}

}  // namespace udw::detail
