#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "udw/errors.hpp"
#include "udw/units.hpp"

namespace udw {

using cplx = std::complex<double>;

// Gaussian smearing p(x) centred on x0 with width sigma (nm).
struct SmearingProfile {
  double center = 0.0;
  double sigma = 1.0;

  void validate() const;
  bool operator==(const SmearingProfile&) const = default;
};

// f(k) = exp(-i k x0 - k^2 sigma^2 / 2), so f(0) = 1.
cplx fourier_profile(const SmearingProfile& p, double k);

enum class ObservableKind { pi, dphi, pi_right, pi_left, cosine_phi, dirac_quadratic };

// Independent boson fields: a plain channel, or the charge and spin bosons of
// a spinful edge. Observables in different sectors commute and are uncorrelated.
enum class FieldSector { single, charge, spin };

bool is_linear(ObservableKind kind);
std::string_view to_string(ObservableKind kind);
ObservableKind observable_kind_from(std::string_view name);
std::string_view to_string(FieldSector sector);
FieldSector field_sector_from(std::string_view name);

struct FieldObservable {
  ObservableKind kind = ObservableKind::pi;
  SmearingProfile smearing;
  double event_time = 0.0;  // ns
  double velocity = 1.0;    // nm/ns
  FieldSector sector = FieldSector::single;
  // cosine_phi only: O = klein_sign * cos(cosine_scale * phi(x0)) / (2 pi)
  double cosine_scale = 3.5449077018110318;  // sqrt(4 pi)
  int klein_sign = 1;

  bool operator==(const FieldObservable&) const = default;
};

// mu(t) = cos(theta + Omega t) sigma_x + sin(theta + Omega t) sigma_y
struct DetectorOp {
  double axis = 0.0;  // rad
  double gap = 0.0;   // rad/ns

  double angle_at(double t) const { return axis + gap * t; }
  Eigen::Matrix2cd matrix(double t) const;
  bool operator==(const DetectorOp&) const = default;
};

struct SwitchingEvent {
  double time = 0.0;
  double strength = 0.0;
};

// One rank-one factor exp(i J mu (x) O), switched at observable.event_time.
struct GateFactor {
  double coupling = 0.0;
  DetectorOp detector;
  FieldObservable observable;

  SwitchingEvent switching() const { return {observable.event_time, coupling}; }
  bool operator==(const GateFactor&) const = default;
};

// Factors are written left to right and applied right to left.
struct GateSpec {
  std::vector<GateFactor> factors;

  void validate() const;
  bool operator==(const GateSpec&) const = default;
};

enum class GateClass { gaussian_computable, non_gaussian };
GateClass classify(const GateSpec& gate);
std::string_view to_string(GateClass c);

// The bosonized gate library.
namespace gates {

GateSpec simple_rank_one(double j, DetectorOp mu, const SmearingProfile& p, double t, double v);
// exp(i J- mu- Pi) exp(i J+ mu+ dPhi)
GateSpec naive_two_rank_one(double j_minus, DetectorOp mu_minus, double j_plus,
                            DetectorOp mu_plus, const SmearingProfile& p, double t, double v);
// Two factors on one chiral channel, the second switched dt later.
GateSpec chiral(double j1, DetectorOp mu1, double j2, DetectorOp mu2, const SmearingProfile& p,
                double t, double dt, double v, bool right_moving);
// Unsmeared cosine with its Klein sign.
GateSpec cross_term(double j, DetectorOp mu, double x0, double t, double v, int klein_sign = 1);
// J mu (2/sqrt(pi)) (Pi_c + dPhi_s): two commuting factors with the same mu.
GateSpec spin_charge_forward(double j, DetectorOp mu, const SmearingProfile& p, double t,
                             double v);
// cos(sqrt(2 pi)(phi_c + theta_s)) style back-scattering term.
GateSpec spin_charge_back(double j, DetectorOp mu, double x0, double t, double v,
                          int klein_sign = 1);
GateSpec dirac_quadratic(double j, DetectorOp mu, const SmearingProfile& p, double t, double v);

}  // namespace gates

// Discrete spectral measure: mode j carries momentum k_j and weight w_j, the
// continuum integral dk/2pi being replaced by sum_j w_j.
struct DiscreteModes {
  std::vector<double> k;
  std::vector<double> weight;

  void validate() const;
  std::size_t size() const { return k.size(); }
};

// Symmetric kernel K(a, b, k) of the mode expansion (Pi-like vs dPhi).
double spectral_kernel(ObservableKind a, ObservableKind b, double k);

// Coefficient of b_k in O, so O = int dk/2pi [a(k) b_k + h.c.].
cplx mode_amplitude(const FieldObservable& o, double k);

struct QuadratureOptions {
  double abs_tol = 1e-10;
  unsigned max_depth = 30;
};

// <0| O1 O2 |0>
cplx correlator(const FieldObservable& o1, const FieldObservable& o2,
                const QuadratureOptions& q = {});
cplx correlator(const FieldObservable& o1, const FieldObservable& o2, const DiscreteModes& modes);

// 2 Im W = -i <[O1, O2]>
double commutator_phase(const FieldObservable& o1, const FieldObservable& o2,
                        const QuadratureOptions& q = {});

class CorrelatorMatrix {
 public:
  CorrelatorMatrix() = default;
  CorrelatorMatrix(std::vector<FieldObservable> observables, Eigen::MatrixXcd w)
      : observables_(std::move(observables)), w_(std::move(w)) {}

  const Eigen::MatrixXcd& matrix() const { return w_; }
  const std::vector<FieldObservable>& observables() const { return observables_; }
  std::size_t size() const { return observables_.size(); }
  // Index of an observable, or throws when W does not cover it.
  std::size_t index_of(const FieldObservable& o) const;

 private:
  std::vector<FieldObservable> observables_;
  Eigen::MatrixXcd w_;
};

CorrelatorMatrix correlator_matrix(std::span<const FieldObservable> observables,
                                   const QuadratureOptions& q = {});
CorrelatorMatrix correlator_matrix(std::span<const FieldObservable> observables,
                                   const DiscreteModes& modes);

struct WeylTerm {
  double alpha = 0.0;
  std::size_t index = 0;  // row of the correlator matrix
};

// <0| prod_i exp(i alpha_i O_i) |0>, product written left to right.
cplx gaussian_weyl_expectation(std::span<const WeylTerm> terms, const CorrelatorMatrix& w);
cplx gaussian_weyl_expectation(std::span<const std::pair<double, FieldObservable>> terms,
                               const CorrelatorMatrix& w);

}  // namespace udw
