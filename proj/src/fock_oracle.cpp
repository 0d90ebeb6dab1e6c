#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "udw/channel.hpp"

namespace udw {

namespace {

using Dense = Eigen::MatrixXcd;

struct FockSpace {
  int modes = 0;
  int levels = 0;  // n_max + 1
  Eigen::Index dim = 1;
  std::vector<Dense> lower;  // annihilation operator per mode

  FockSpace(int m, int n_max) : modes(m), levels(n_max + 1) {
    for (int i = 0; i < m; ++i) dim *= levels;
    Dense b = Dense::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
    for (int j = 0; j < m; ++j) {
      // mode 0 is the most significant digit
      Dense op = Dense::Identity(1, 1);
      for (int i = 0; i < m; ++i) {
        const Dense f = i == j ? b : Dense::Identity(levels, levels);
        Dense next(op.rows() * f.rows(), op.cols() * f.cols());
        for (Eigen::Index r = 0; r < op.rows(); ++r)
          for (Eigen::Index c = 0; c < op.cols(); ++c)
            next.block(r * f.rows(), c * f.cols(), f.rows(), f.cols()) = op(r, c) * f;
        op = std::move(next);
      }
      lower.push_back(std::move(op));
    }
  }

  // Basis states with some mode at its top level.
  std::vector<Eigen::Index> top_states() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index s = 0; s < dim; ++s) {
      Eigen::Index r = s;
      for (int i = 0; i < modes; ++i, r /= levels)
        if (r % levels == levels - 1) {
          out.push_back(s);
          break;
        }
    }
    return out;
  }
};

cplx phi_amplitude(const FieldObservable& o, double k) {
  return std::polar(1.0 / std::sqrt(2.0 * std::abs(k)),
                    k * o.smearing.center - o.velocity * std::abs(k) * o.event_time);
}

Dense linear_combination(const FockSpace& fs, const std::vector<cplx>& c) {
  Dense o = Dense::Zero(fs.dim, fs.dim);
  for (int j = 0; j < fs.modes; ++j) o += c[j] * fs.lower[j];
  return o + o.adjoint().eval();
}

Dense function_of(const Dense& h, double (*fn)(double)) {
  Eigen::SelfAdjointEigenSolver<Dense> es(h);
  Eigen::VectorXcd d = es.eigenvalues().unaryExpr([fn](double x) { return cplx(fn(x)); });
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Dense observable_matrix(const FockSpace& fs, const FieldObservable& o, const DiscreteModes& m) {
  const auto nm = static_cast<std::size_t>(fs.modes);
  if (is_linear(o.kind)) {
    std::vector<cplx> c(nm);
    for (std::size_t j = 0; j < nm; ++j) c[j] = std::sqrt(m.weight[j]) * mode_amplitude(o, m.k[j]);
    return linear_combination(fs, c);
  }
  if (o.kind == ObservableKind::cosine_phi) {
    std::vector<cplx> c(nm);
    for (std::size_t j = 0; j < nm; ++j) c[j] = std::sqrt(m.weight[j]) * phi_amplitude(o, m.k[j]);
    Dense phi = linear_combination(fs, c) * o.cosine_scale;
    return function_of(phi, [](double x) { return std::cos(x); }) *
           (o.klein_sign / (2.0 * kPi));
  }
  // normal-ordered smeared Pi^2 + (dPhi)^2
  Dense out = Dense::Zero(fs.dim, fs.dim);
  for (auto kind : {ObservableKind::pi, ObservableKind::dphi}) {
    FieldObservable point = o;
    point.kind = kind;
    point.smearing.center = 0.0;
    point.smearing.sigma = 1.0;
    std::vector<cplx> u(nm);
    for (std::size_t j = 0; j < nm; ++j) {
      // amplitude of the unsmeared density at x = 0
      u[j] = std::sqrt(m.weight[j]) * mode_amplitude(point, m.k[j]) /
             std::conj(fourier_profile(point.smearing, m.k[j]));
    }
    for (std::size_t j = 0; j < nm; ++j)
      for (std::size_t l = 0; l < nm; ++l) {
        // int p(x) e^{iqx} dx = conj(f(q))
        const cplx pjl = u[j] * u[l] * std::conj(fourier_profile(o.smearing, m.k[j] + m.k[l]));
        const cplx qjl =
            std::conj(u[j]) * u[l] * std::conj(fourier_profile(o.smearing, m.k[l] - m.k[j]));
        out += pjl * fs.lower[j] * fs.lower[l];
        out += std::conj(pjl) * fs.lower[l].adjoint() * fs.lower[j].adjoint();
        out += 2.0 * qjl * fs.lower[j].adjoint() * fs.lower[l];
      }
  }
  return 0.5 * (out + out.adjoint().eval());
}

struct FactorUnitary {
  Eigen::Matrix2cd plus, minus;  // detector eigenprojectors
  Dense field_plus, field_minus;  // exp(+-iJ O)
};

FactorUnitary factor_unitary(const FockSpace& fs, const GateFactor& f, const DiscreteModes& m) {
  const Dense o = observable_matrix(fs, f.observable, m);
  Eigen::SelfAdjointEigenSolver<Dense> es(o);
  const Dense& v = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  FactorUnitary u;
  const Eigen::Matrix2cd mu = f.detector.matrix(f.observable.event_time);
  u.plus = 0.5 * (Eigen::Matrix2cd::Identity() + mu);
  u.minus = 0.5 * (Eigen::Matrix2cd::Identity() - mu);
  Eigen::VectorXcd ep(lam.size()), em(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    ep[i] = std::polar(1.0, f.coupling * lam[i]);
    em[i] = std::conj(ep[i]);
  }
  u.field_plus = v * ep.asDiagonal() * v.adjoint();
  u.field_minus = v * em.asDiagonal() * v.adjoint();
  return u;
}

// psi rows: qubits |c a b>, c most significant; columns: Fock basis.
void apply(Dense& psi, const FactorUnitary& u, int qubit) {
  const int shift = 2 - qubit;  // bit position of the qubit in the row index
  auto embed = [&](const Eigen::Matrix2cd& p) {
    Dense big = Dense::Zero(8, 8);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        if ((r & ~(1 << shift)) != (c & ~(1 << shift))) continue;
        big(r, c) = p((r >> shift) & 1, (c >> shift) & 1);
      }
    return big;
  };
  psi = embed(u.plus) * psi * u.field_plus.transpose() +
        embed(u.minus) * psi * u.field_minus.transpose();
}

}  // namespace

OracleResult fock_oracle(const ChannelSetup& setup, const DiscreteModes& modes, int n_max) {
  setup.validate();
  modes.validate();
  if (modes.size() > 3) throw PreconditionError("Fock oracle supports at most 3 modes");
  if (n_max < 1 || n_max > 12) throw PreconditionError("Fock oracle needs 1 <= n_max <= 12");
  for (const auto* g : {&setup.encoder, &setup.decoder})
    for (const auto& f : g->factors)
      if (f.observable.sector != FieldSector::single)
        throw UnsupportedError("Fock oracle models a single boson field");

  const FockSpace fs(static_cast<int>(modes.size()), n_max);
  Dense psi = Dense::Zero(8, fs.dim);
  psi(0, 0) = psi(6, 0) = 1.0 / std::sqrt(2.0);  // |0 0 0> and |1 1 0>

  for (auto it = setup.encoder.factors.rbegin(); it != setup.encoder.factors.rend(); ++it)
    apply(psi, factor_unitary(fs, *it, modes), 1);
  for (auto it = setup.decoder.factors.rbegin(); it != setup.decoder.factors.rend(); ++it)
    apply(psi, factor_unitary(fs, *it, modes), 2);

  OracleResult res;
  res.fock_dimension = static_cast<std::size_t>(fs.dim);
  res.rho_cb.setZero();
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int cp = 0; cp < 2; ++cp)
        for (int bp = 0; bp < 2; ++bp)
          for (int a = 0; a < 2; ++a)
            res.rho_cb(2 * c + b, 2 * cp + bp) +=
                psi.row(4 * c + 2 * a + b).dot(psi.row(4 * cp + 2 * a + bp));
  // dot() conjugates its first argument
  res.rho_cb = res.rho_cb.transpose().eval();
  res.rho_cb = 0.5 * (res.rho_cb + res.rho_cb.adjoint()).eval();

  for (Eigen::Index s : fs.top_states()) res.top_population += psi.col(s).squaredNorm();
  res.reliable = res.top_population <= 1e-8;
  res.coherent_info = coherent_information(res.rho_cb);
  return res;
}

}  // namespace udw
