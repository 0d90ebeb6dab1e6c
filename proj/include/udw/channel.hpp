#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "udw/field.hpp"

namespace udw {

// Reference C and qubit A start in (|00> + |11>)/sqrt2, qubit B in |0>, the
// field in its vacuum. The encoder acts on A, then the decoder on B.
struct ChannelSetup {
  GateSpec encoder;
  GateSpec decoder;
  double x_a = 0.0, t_a = 0.0;
  double x_b = 0.0, t_b = 0.0;
  double velocity = 1.0;

  void validate() const;
};

struct ChannelResult {
  Eigen::Matrix4cd rho_cb;  // basis |c b>, c most significant
  double coherent_info = 0.0;
  std::size_t branch_count = 0;
};

double von_neumann_entropy(const Eigen::MatrixXcd& rho);  // bits
Eigen::Matrix2cd trace_out_reference(const Eigen::Matrix4cd& rho_cb);
double coherent_information(const Eigen::Matrix4cd& rho_cb);
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Branch expansion over the +-1 eigenspaces of every detector factor. With
// `modes` the field correlators use that discrete measure instead of the
// continuum, which is what the Fock oracle represents exactly.
ChannelResult evaluate_channel(const ChannelSetup& setup, const DiscreteModes* modes = nullptr);
Eigen::Matrix4cd output_state(const ChannelSetup& setup, const DiscreteModes* modes = nullptr);

// Sweep templates: couplings and smearing filled in per grid point.
enum class CouplingRule { fixed, sweep, conjugate };

struct FactorTemplate {
  CouplingRule rule = CouplingRule::sweep;
  double value = 1.0;  // fixed coupling, or multiplier of the swept/derived one
  DetectorOp detector;
  ObservableKind kind = ObservableKind::pi;
  FieldSector sector = FieldSector::single;
  double dx = 0.0, dx_sigma = 0.0;  // centre offset: dx + dx_sigma * sigma
  double dt = 0.0, dt_sigma = 0.0;  // time offset: dt + dt_sigma * sigma / v

  bool operator==(const FactorTemplate&) const = default;
};

struct GateTemplate {
  double x = 0.0;
  double t = 0.0;
  std::vector<FactorTemplate> factors;

  bool operator==(const GateTemplate&) const = default;
};

struct ChannelTemplate {
  GateTemplate encoder;
  GateTemplate decoder;
  double velocity = 1.0;

  bool operator==(const ChannelTemplate&) const = default;
};

// A `conjugate` factor takes |J'| = min(|J|, pi / (4 |J| |c|)) from the coupling J
// of the other factor in its gate, c being that pair's commutator phase.
ChannelSetup instantiate(const ChannelTemplate& t, double j, double sigma);

struct SweepRow {
  double j = 0.0;
  double sigma = 0.0;
  double coherent_info = 0.0;
  std::size_t branch_count = 0;
};

// Rows ordered sigma-major, J-minor.
std::vector<SweepRow> capacity_sweep(const ChannelTemplate& t, std::span<const double> j_values,
                                     std::span<const double> sigma_values, int threads = 1);

bool is_monotone_increasing(std::span<const double> values, double slack = 1e-9);

// Truncated Fock space reference.
struct OracleResult {
  Eigen::Matrix4cd rho_cb;
  double coherent_info = 0.0;
  double top_population = 0.0;  // weight on any mode's highest retained level
  bool reliable = true;
  std::size_t fock_dimension = 0;
};

OracleResult fock_oracle(const ChannelSetup& setup, const DiscreteModes& modes, int n_max);

// Weights w_j = spacing / 2pi for evenly spaced momenta, 1 for a single mode.
DiscreteModes uniform_modes(std::span<const double> k_values);

}  // namespace udw
