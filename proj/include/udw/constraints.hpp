#pragma once

#include <optional>
#include <string>
#include <vector>

namespace udw {

struct MaterialScenario {
  std::string name;
  double velocity = 0.0;  // nm/ns
  double smearing = 0.0;  // lambda_s, nm
  std::optional<double> bandwidth;      // W, eV
  std::optional<double> moire_constant; // a_M, nm

  void validate() const;
};

struct PolarizationRow {
  double temperature = 0.0;  // K
  double field = 0.0;        // B0, T
  double esr_ghz = 0.0;
  double polarization = 0.0;
};

double q_loc(double t_sw, double velocity, double smearing);
double switching_time(double smearing, double velocity);  // ns
double thermal_polarization(double temperature, double field);
double esr_frequency(double field);  // GHz
double moire_velocity(double bandwidth, double moire_constant);  // nm/ns
double max_link_distance(double velocity, double scrambling_time);  // nm

PolarizationRow polarization_row(double temperature, double field);
// The four (T, B0) operating points of the ESR table.
std::vector<PolarizationRow> polarization_table();
// Graphene, HgTe edge and twisted TMD scenarios.
std::vector<MaterialScenario> material_scenarios();

}  // namespace udw
