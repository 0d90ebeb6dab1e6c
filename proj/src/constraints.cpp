#include "udw/constraints.hpp"

#include <cmath>

#include "udw/errors.hpp"
#include "udw/units.hpp"

namespace udw {

namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw PreconditionError(std::string(name) + " must be positive");
}

void non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw PreconditionError(std::string(name) + " must be non-negative");
}

constexpr double kZeemanKelvinPerTesla = 0.672;  // hbar gamma_e / 2 k_B
constexpr double kEsrGhzPerTesla = 28.0;

}  // namespace

void MaterialScenario::validate() const {
  positive(velocity, "velocity");
  positive(smearing, "smearing length");
}

double q_loc(double t_sw, double velocity, double smearing) {
  non_negative(t_sw, "switching time");
  positive(velocity, "velocity");
  positive(smearing, "smearing length");
  return t_sw * velocity / smearing;
}

double switching_time(double smearing, double velocity) {
  positive(smearing, "smearing length");
  positive(velocity, "velocity");
  return smearing / velocity;
}

double thermal_polarization(double temperature, double field) {
  positive(temperature, "temperature");
  if (!std::isfinite(field)) throw PreconditionError("field must be finite");
  return std::tanh(kZeemanKelvinPerTesla * field / temperature);
}

double esr_frequency(double field) {
  non_negative(field, "field");
  return kEsrGhzPerTesla * field;
}

double moire_velocity(double bandwidth, double moire_constant) {
  positive(bandwidth, "bandwidth");
  positive(moire_constant, "moire lattice constant");
  return bandwidth * moire_constant / (kHbarEvNs * kPi);
}

double max_link_distance(double velocity, double scrambling_time) {
  positive(velocity, "velocity");
  non_negative(scrambling_time, "scrambling time");
  return velocity * scrambling_time;
}

PolarizationRow polarization_row(double temperature, double field) {
  return {temperature, field, esr_frequency(field), thermal_polarization(temperature, field)};
}

std::vector<PolarizationRow> polarization_table() {
  return {polarization_row(4.2, 1.4), polarization_row(4.2, 4.5), polarization_row(4.2, 9.0),
          polarization_row(2.1, 9.0)};
}

std::vector<MaterialScenario> material_scenarios() {
  // the TMD velocity is the one-figure value of moire_velocity(1 meV, 10 nm)
  return {{"graphene", 1e6, 30.0, std::nullopt, std::nullopt},
          {"hgte", 0.54e6, 30.0, std::nullopt, std::nullopt},
          {"tmd", 5000.0, 10.0, 0.001, 10.0}};
}

}  // namespace udw
