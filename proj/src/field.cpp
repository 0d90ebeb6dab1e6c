#include "udw/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace udw {

namespace {

const cplx I(0.0, 1.0);

bool pi_like(ObservableKind k) {
  return k == ObservableKind::pi || k == ObservableKind::pi_right || k == ObservableKind::pi_left;
}

void require_linear(const FieldObservable& o) {
  if (!is_linear(o.kind))
    throw UnsupportedError("observable kind " + std::string(to_string(o.kind)) +
                           " is not linear in the field; no Gaussian correlator exists");
}

// Allowed momentum half-lines: {negative, positive}.
std::pair<bool, bool> domain(ObservableKind k) {
  if (k == ObservableKind::pi_right) return {false, true};
  if (k == ObservableKind::pi_left) return {true, false};
  return {true, true};
}

bool same_field(const FieldObservable& a, const FieldObservable& b) {
  if (a.sector != b.sector) return false;
  if (a.velocity != b.velocity)
    throw PreconditionError("observables on one field must share the velocity");
  return true;
}

}  // namespace

void SmearingProfile::validate() const {
  if (!std::isfinite(center)) throw PreconditionError("smearing center must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw PreconditionError("smearing sigma must be positive, got " + std::to_string(sigma));
}

cplx fourier_profile(const SmearingProfile& p, double k) {
  return std::exp(cplx(-0.5 * k * k * p.sigma * p.sigma, -k * p.center));
}

bool is_linear(ObservableKind k) {
  return k != ObservableKind::cosine_phi && k != ObservableKind::dirac_quadratic;
}

std::string_view to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::pi: return "pi";
    case ObservableKind::dphi: return "dphi";
    case ObservableKind::pi_right: return "pi_right";
    case ObservableKind::pi_left: return "pi_left";
    case ObservableKind::cosine_phi: return "cosine_phi";
    case ObservableKind::dirac_quadratic: return "dirac_quadratic";
  }
  return "?";
}

ObservableKind observable_kind_from(std::string_view s) {
  for (auto k : {ObservableKind::pi, ObservableKind::dphi, ObservableKind::pi_right,
                 ObservableKind::pi_left, ObservableKind::cosine_phi,
                 ObservableKind::dirac_quadratic})
    if (to_string(k) == s) return k;
  throw PreconditionError("unknown observable kind '" + std::string(s) + "'");
}

std::string_view to_string(FieldSector s) {
  switch (s) {
    case FieldSector::single: return "single";
    case FieldSector::charge: return "charge";
    case FieldSector::spin: return "spin";
  }
  return "?";
}

FieldSector field_sector_from(std::string_view s) {
  for (auto k : {FieldSector::single, FieldSector::charge, FieldSector::spin})
    if (to_string(k) == s) return k;
  throw PreconditionError("unknown field sector '" + std::string(s) + "'");
}

Eigen::Matrix2cd DetectorOp::matrix(double t) const {
  const double a = angle_at(t);
  Eigen::Matrix2cd m;
  m << 0.0, std::polar(1.0, -a), std::polar(1.0, a), 0.0;
  return m;
}

void GateSpec::validate() const {
  if (factors.empty()) throw PreconditionError("gate needs at least one factor");
  for (const auto& f : factors) {
    if (!std::isfinite(f.coupling)) throw PreconditionError("gate coupling must be finite");
    f.observable.smearing.validate();
    if (!(f.observable.velocity > 0.0)) throw PreconditionError("field velocity must be positive");
  }
}

GateClass classify(const GateSpec& g) {
  for (const auto& f : g.factors)
    if (!is_linear(f.observable.kind)) return GateClass::non_gaussian;
  return GateClass::gaussian_computable;
}

std::string_view to_string(GateClass c) {
  return c == GateClass::gaussian_computable ? "GaussianComputable" : "NonGaussian";
}

namespace gates {

namespace {
FieldObservable obs(ObservableKind k, const SmearingProfile& p, double t, double v,
                    FieldSector s = FieldSector::single) {
  FieldObservable o;
  o.kind = k;
  o.smearing = p;
  o.event_time = t;
  o.velocity = v;
  o.sector = s;
  return o;
}
}  // namespace

GateSpec simple_rank_one(double j, DetectorOp mu, const SmearingProfile& p, double t, double v) {
  return {{{j, mu, obs(ObservableKind::pi, p, t, v)}}};
}

GateSpec naive_two_rank_one(double j_minus, DetectorOp mu_minus, double j_plus,
                            DetectorOp mu_plus, const SmearingProfile& p, double t, double v) {
  return {{{j_minus, mu_minus, obs(ObservableKind::pi, p, t, v)},
           {j_plus, mu_plus, obs(ObservableKind::dphi, p, t, v)}}};
}

GateSpec chiral(double j1, DetectorOp mu1, double j2, DetectorOp mu2, const SmearingProfile& p,
                double t, double dt, double v, bool right_moving) {
  const auto k = right_moving ? ObservableKind::pi_right : ObservableKind::pi_left;
  return {{{j2, mu2, obs(k, p, t + dt, v)}, {j1, mu1, obs(k, p, t, v)}}};
}

GateSpec cross_term(double j, DetectorOp mu, double x0, double t, double v, int klein_sign) {
  auto o = obs(ObservableKind::cosine_phi, {x0, 1.0}, t, v);
  o.klein_sign = klein_sign;
  return {{{j, mu, o}}};
}

GateSpec spin_charge_forward(double j, DetectorOp mu, const SmearingProfile& p, double t,
                             double v) {
  const double c = 2.0 * j / std::sqrt(kPi);
  return {{{c, mu, obs(ObservableKind::pi, p, t, v, FieldSector::charge)},
           {c, mu, obs(ObservableKind::dphi, p, t, v, FieldSector::spin)}}};
}

GateSpec spin_charge_back(double j, DetectorOp mu, double x0, double t, double v,
                          int klein_sign) {
  auto o = obs(ObservableKind::cosine_phi, {x0, 1.0}, t, v, FieldSector::charge);
  o.cosine_scale = std::sqrt(2.0 * kPi);
  o.klein_sign = klein_sign;
  return {{{j, mu, o}}};
}

GateSpec dirac_quadratic(double j, DetectorOp mu, const SmearingProfile& p, double t, double v) {
  return {{{j, mu, obs(ObservableKind::dirac_quadratic, p, t, v)}}};
}

}  // namespace gates

void DiscreteModes::validate() const {
  if (k.empty()) throw PreconditionError("discrete measure needs at least one mode");
  if (k.size() != weight.size())
    throw PreconditionError("discrete measure needs one weight per mode");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!std::isfinite(k[i]) || k[i] == 0.0)
      throw PreconditionError("mode momenta must be finite and nonzero");
    if (!(weight[i] > 0.0)) throw PreconditionError("mode weights must be positive");
  }
}

double spectral_kernel(ObservableKind a, ObservableKind b, double k) {
  if (!is_linear(a) || !is_linear(b))
    throw UnsupportedError("spectral kernel requested for a non-linear observable");
  const auto [an, ap] = domain(a);
  const auto [bn, bp] = domain(b);
  if ((k > 0 && !(ap && bp)) || (k < 0 && !(an && bn))) return 0.0;
  if (pi_like(a) == pi_like(b)) return 0.5 * std::abs(k);
  return -0.5 * k;
}

cplx mode_amplitude(const FieldObservable& o, double k) {
  require_linear(o);
  const auto [neg, pos] = domain(o.kind);
  if (k == 0.0 || (k > 0 && !pos) || (k < 0 && !neg)) return 0.0;
  const cplx env = std::conj(fourier_profile(o.smearing, k)) *
                   std::polar(1.0, -o.velocity * std::abs(k) * o.event_time);
  if (pi_like(o.kind)) return -I * std::sqrt(0.5 * std::abs(k)) * env;
  return I * k / std::sqrt(2.0 * std::abs(k)) * env;
}

cplx correlator(const FieldObservable& o1, const FieldObservable& o2, const QuadratureOptions& q) {
  require_linear(o1);
  require_linear(o2);
  o1.smearing.validate();
  o2.smearing.validate();
  if (!same_field(o1, o2)) return 0.0;

  const double v = o1.velocity;
  const double s2 = 0.5 * (o1.smearing.sigma * o1.smearing.sigma +
                           o2.smearing.sigma * o2.smearing.sigma);
  const double dx = o1.smearing.center - o2.smearing.center;
  const double dt = o1.event_time - o2.event_time;
  // envelope exp(-k^2 s2) is below 1e-20 past kmax
  const double kmax = std::sqrt(46.0 / s2);
  const double l1 = 1.0 / (8.0 * kPi * s2);  // bound on each half-line integral
  const double rel = std::max(q.abs_tol / (4.0 * l1), 1e-15);

  const auto [an, ap] = domain(o1.kind);
  const auto [bn, bp] = domain(o2.kind);
  const bool same = pi_like(o1.kind) == pi_like(o2.kind);

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  cplx total = 0.0;
  double err_total = 0.0;
  for (int side : {-1, 1}) {
    if (side > 0 && !(ap && bp)) continue;
    if (side < 0 && !(an && bn)) continue;
    // integrate over u = |k| on (0, kmax)
    auto f = [&](double u) -> cplx {
      const double k = side * u;
      const double kern = same ? 0.5 * u : -0.5 * k;
      return kern * std::exp(cplx(-u * u * s2, k * dx - v * u * dt)) / (2.0 * kPi);
    };
    double err = 0.0, l1_est = 0.0;
    total += GK::integrate(f, 0.0, kmax, q.max_depth, rel, &err, &l1_est);
    err_total += err;
  }
  if (err_total > q.abs_tol)
    throw NumericalError("correlator quadrature error " + std::to_string(err_total) +
                         " exceeds tolerance");
  return total;
}

cplx correlator(const FieldObservable& o1, const FieldObservable& o2, const DiscreteModes& m) {
  require_linear(o1);
  require_linear(o2);
  m.validate();
  if (!same_field(o1, o2)) return 0.0;
  cplx acc = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j)
    acc += m.weight[j] * mode_amplitude(o1, m.k[j]) * std::conj(mode_amplitude(o2, m.k[j]));
  return acc;
}

double commutator_phase(const FieldObservable& o1, const FieldObservable& o2,
                        const QuadratureOptions& q) {
  return 2.0 * correlator(o1, o2, q).imag();
}

std::size_t CorrelatorMatrix::index_of(const FieldObservable& o) const {
  for (std::size_t i = 0; i < observables_.size(); ++i)
    if (observables_[i] == o) return i;
  throw PreconditionError("observable " + std::string(to_string(o.kind)) +
                          " is not covered by the correlator matrix");
}

namespace {
template <class Pairwise>
CorrelatorMatrix build(std::span<const FieldObservable> obs, Pairwise w_of) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXcd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const cplx v = w_of(obs[i], obs[j]);
      if (i == j) {
        w(i, i) = v.real();
      } else {
        w(i, j) = v;
        w(j, i) = std::conj(v);
      }
    }
  return {std::vector<FieldObservable>(obs.begin(), obs.end()), std::move(w)};
}
}  // namespace

CorrelatorMatrix correlator_matrix(std::span<const FieldObservable> obs,
                                   const QuadratureOptions& q) {
  return build(obs, [&](const FieldObservable& a, const FieldObservable& b) {
    return correlator(a, b, q);
  });
}

CorrelatorMatrix correlator_matrix(std::span<const FieldObservable> obs, const DiscreteModes& m) {
  return build(obs, [&](const FieldObservable& a, const FieldObservable& b) {
    return correlator(a, b, m);
  });
}

cplx gaussian_weyl_expectation(std::span<const WeylTerm> terms, const CorrelatorMatrix& cm) {
  const auto& w = cm.matrix();
  double re = 0.0, ph = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].index >= cm.size())
      throw PreconditionError("Weyl term refers to an observable outside the correlator matrix");
    const auto a = static_cast<Eigen::Index>(terms[i].index);
    re += terms[i].alpha * terms[i].alpha * w(a, a).real();
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      const auto b = static_cast<Eigen::Index>(terms[j].index);
      const double aa = terms[i].alpha * terms[j].alpha;
      re += 2.0 * aa * w(a, b).real();
      ph += aa * w(a, b).imag();
    }
  }
  return std::exp(cplx(-0.5 * re, -ph));
}

cplx gaussian_weyl_expectation(std::span<const std::pair<double, FieldObservable>> terms,
                               const CorrelatorMatrix& cm) {
  std::vector<WeylTerm> t;
  t.reserve(terms.size());
  for (const auto& [alpha, o] : terms) {
    require_linear(o);
    t.push_back({alpha, cm.index_of(o)});
  }
  return gaussian_weyl_expectation(t, cm);
}

}  // namespace udw
