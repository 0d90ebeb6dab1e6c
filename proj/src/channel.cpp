#include "udw/channel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

namespace udw {

namespace {

using Matrix2c = Eigen::Matrix2cd;

Matrix2c projector(const GateFactor& f, int sign) {
  return 0.5 * (Matrix2c::Identity() + sign * f.detector.matrix(f.observable.event_time));
}

// Products of eigenprojectors for every sign string, in written order.
// Bit i of the string index set means sign -1 on factor i.
std::vector<Matrix2c> projector_strings(const GateSpec& g) {
  const std::size_t n = g.factors.size();
  std::vector<Matrix2c> out(std::size_t{1} << n);
  for (std::size_t s = 0; s < out.size(); ++s) {
    Matrix2c q = Matrix2c::Identity();
    for (std::size_t i = 0; i < n; ++i) q = q * projector(g.factors[i], (s >> i) & 1 ? -1 : 1);
    out[s] = q;
  }
  return out;
}

int sign_of(std::size_t s, std::size_t i) { return (s >> i) & 1 ? -1 : 1; }

}  // namespace

void ChannelSetup::validate() const {
  encoder.validate();
  decoder.validate();
  if (t_b < t_a) throw PreconditionError("decoder time precedes encoder time");
  if (!(velocity > 0.0)) throw PreconditionError("field velocity must be positive");
  for (const auto* g : {&encoder, &decoder})
    for (const auto& f : g->factors)
      if (f.observable.velocity != velocity)
        throw PreconditionError("factor observable velocity differs from the channel velocity");
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()[i];
    if (p > 1e-12) s -= p * std::log2(p);
  }
  return s;
}

Eigen::Matrix2cd trace_out_reference(const Eigen::Matrix4cd& r) {
  Eigen::Matrix2cd b = r.block<2, 2>(0, 0) + r.block<2, 2>(2, 2);
  return b;
}

double coherent_information(const Eigen::Matrix4cd& rho_cb) {
  return von_neumann_entropy(trace_out_reference(rho_cb)) - von_neumann_entropy(rho_cb);
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw PreconditionError("trace distance needs equal shapes");
  Eigen::MatrixXcd d = a - b;
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

ChannelResult evaluate_channel(const ChannelSetup& setup, const DiscreteModes* modes) {
  setup.validate();
  for (const auto* g : {&setup.encoder, &setup.decoder})
    if (classify(*g) != GateClass::gaussian_computable)
      throw UnsupportedError("channel engine needs GaussianComputable gates, got " +
                             std::string(to_string(classify(*g))));

  const std::size_t n = setup.encoder.factors.size();
  const std::size_t m = setup.decoder.factors.size();
  if (2 * (n + m) > 20)
    throw UnsupportedError("branch expansion would exceed 2^20 branch pairs");

  std::vector<FieldObservable> obs;
  for (const auto& f : setup.encoder.factors) obs.push_back(f.observable);
  for (const auto& f : setup.decoder.factors) obs.push_back(f.observable);
  const CorrelatorMatrix w = modes ? correlator_matrix(obs, *modes) : correlator_matrix(obs);

  const auto qa = projector_strings(setup.encoder);
  const auto qb = projector_strings(setup.decoder);

  // Tr_A[(I x Qa) Phi+ (I x Qa')^dag] = Qa^T conj(Qa') / 2
  std::vector<Matrix2c> rc(qa.size() * qa.size());
  for (std::size_t a = 0; a < qa.size(); ++a)
    for (std::size_t ap = 0; ap < qa.size(); ++ap)
      rc[a * qa.size() + ap] = 0.5 * qa[a].transpose() * qa[ap].conjugate();
  std::vector<Matrix2c> rb(qb.size() * qb.size());
  for (std::size_t b = 0; b < qb.size(); ++b)
    for (std::size_t bp = 0; bp < qb.size(); ++bp)
      rb[b * qb.size() + bp] = qb[b].col(0) * qb[bp].col(0).adjoint();

  ChannelResult res;
  res.rho_cb.setZero();
  std::vector<WeylTerm> terms(2 * (n + m));
  for (std::size_t a = 0; a < qa.size(); ++a)
    for (std::size_t ap = 0; ap < qa.size(); ++ap) {
      const Matrix2c& c_part = rc[a * qa.size() + ap];
      if (c_part.isZero(0.0)) continue;
      for (std::size_t b = 0; b < qb.size(); ++b)
        for (std::size_t bp = 0; bp < qb.size(); ++bp) {
          const Matrix2c& b_part = rb[b * qb.size() + bp];
          if (b_part.isZero(0.0)) continue;
          // field part <0| W_A(a')^dag W_B(b')^dag W_B(b) W_A(a) |0>
          std::size_t t = 0;
          for (std::size_t i = n; i-- > 0;)
            terms[t++] = {-sign_of(ap, i) * setup.encoder.factors[i].coupling, i};
          for (std::size_t i = m; i-- > 0;)
            terms[t++] = {-sign_of(bp, i) * setup.decoder.factors[i].coupling, n + i};
          for (std::size_t i = 0; i < m; ++i)
            terms[t++] = {sign_of(b, i) * setup.decoder.factors[i].coupling, n + i};
          for (std::size_t i = 0; i < n; ++i)
            terms[t++] = {sign_of(a, i) * setup.encoder.factors[i].coupling, i};
          const cplx field = gaussian_weyl_expectation(terms, w);
          for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
              res.rho_cb.block<2, 2>(2 * r, 2 * c) += field * c_part(r, c) * b_part;
          ++res.branch_count;
        }
    }
  res.rho_cb = 0.5 * (res.rho_cb + res.rho_cb.adjoint()).eval();
  res.coherent_info = coherent_information(res.rho_cb);
  return res;
}

Eigen::Matrix4cd output_state(const ChannelSetup& setup, const DiscreteModes* modes) {
  return evaluate_channel(setup, modes).rho_cb;
}

namespace {

GateSpec instantiate_gate(const GateTemplate& g, double j, double sigma, double v) {
  if (g.factors.empty()) throw PreconditionError("gate template needs at least one factor");
  GateSpec out;
  for (const auto& f : g.factors) {
    GateFactor gf;
    gf.detector = f.detector;
    gf.observable.kind = f.kind;
    gf.observable.sector = f.sector;
    gf.observable.velocity = v;
    gf.observable.smearing = {g.x + f.dx + f.dx_sigma * sigma, sigma};
    gf.observable.event_time = g.t + f.dt + f.dt_sigma * sigma / v;
    gf.coupling = f.rule == CouplingRule::fixed ? f.value
                  : f.rule == CouplingRule::sweep ? f.value * j
                                                  : 0.0;
    out.factors.push_back(gf);
  }
  for (std::size_t i = 0; i < g.factors.size(); ++i) {
    if (g.factors[i].rule != CouplingRule::conjugate) continue;
    if (g.factors.size() != 2)
      throw PreconditionError("a conjugate coupling needs exactly one partner factor");
    const std::size_t p = 1 - i;
    if (g.factors[p].rule == CouplingRule::conjugate)
      throw PreconditionError("both factors of a gate cannot be conjugate");
    const double jp = std::abs(out.factors[p].coupling);
    double mag = 0.0;
    if (jp > 0.0) {
      const double c = std::abs(
          commutator_phase(out.factors[p].observable, out.factors[i].observable));
      mag = c > 0.0 ? std::min(jp, kPi / (4.0 * jp * c)) : jp;
    }
    out.factors[i].coupling = g.factors[i].value * mag;
  }
  return out;
}

}  // namespace

ChannelSetup instantiate(const ChannelTemplate& t, double j, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("sweep sigma must be positive");
  if (!(t.velocity > 0.0)) throw PreconditionError("field velocity must be positive");
  ChannelSetup s;
  s.velocity = t.velocity;
  s.x_a = t.encoder.x;
  s.t_a = t.encoder.t;
  s.x_b = t.decoder.x;
  s.t_b = t.decoder.t;
  s.encoder = instantiate_gate(t.encoder, j, sigma, t.velocity);
  s.decoder = instantiate_gate(t.decoder, j, sigma, t.velocity);
  return s;
}

std::vector<SweepRow> capacity_sweep(const ChannelTemplate& t, std::span<const double> js,
                                     std::span<const double> sigmas, int threads) {
  std::vector<SweepRow> rows;
  for (double s : sigmas)
    for (double j : js) rows.push_back({j, s, 0.0, 0});
  // validate once up front so configuration problems surface before the work
  if (!rows.empty()) {
    const auto probe = instantiate(t, rows.front().j, rows.front().sigma);
    probe.validate();
    for (const auto* g : {&probe.encoder, &probe.decoder})
      if (classify(*g) != GateClass::gaussian_computable)
        throw UnsupportedError("sweep needs GaussianComputable gates, got " +
                               std::string(to_string(classify(*g))));
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        const auto r = evaluate_channel(instantiate(t, rows[i].j, rows[i].sigma));
        rows[i].coherent_info = r.coherent_info;
        rows[i].branch_count = r.branch_count;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(rows.size())));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

bool is_monotone_increasing(std::span<const double> v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - slack) return false;
  return true;
}

DiscreteModes uniform_modes(std::span<const double> k) {
  DiscreteModes m;
  m.k.assign(k.begin(), k.end());
  double w = 1.0;
  if (k.size() > 1) {
    const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
    w = (*hi - *lo) / (static_cast<double>(k.size() - 1) * 2.0 * kPi);
  }
  m.weight.assign(k.size(), w);
  m.validate();
  return m;
}

}  // namespace udw
