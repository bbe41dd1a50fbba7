#pragma once

#include <string>

namespace socsmo::model {

/// Physical and empirical constants of the cell model. Capacity is stored in
/// ampere-seconds internally; file I/O uses mAh as documented in the README.
struct ModelParams {
  double d_p = 0.7284;   ///< capacity-distribution coefficient, positive electrode
  double d_n = 0.6533;   ///< capacity-distribution coefficient, negative electrode
  double q_all_as = 2894.1 * 3.6;  ///< total capacity (A*s); 2894.1 mAh
  double r_ohm = 0.045;  ///< ohmic resistance (ohm)
  double p_act = 90424.0;  ///< reaction-polarization coefficient, s*(mol*m^-3)^(1/2)
  double p_con_a = 150.0;  ///< electrolyte diffusion gain, positive side (mol*m^-3/A)
  double p_con_b = 60.0;   ///< electrolyte diffusion gain, negative side (mol*m^-3/A)
  double tau_e = 80.0;     ///< electrolyte diffusion time constant (s)
  double tau_sp = 1.85;    ///< solid diffusion time constant, positive (s)
  double tau_sn1 = 1.1;    ///< solid diffusion time constant, negative, rate < 1.5C (s)
  double tau_sn2 = 10.0;   ///< 1.5C <= rate < 2.5C (s)
  double tau_sn3 = 0.05;   ///< rate >= 2.5C (s)
  double x_sp0 = 0.68;     ///< initial average stoichiometry, positive
  double x_sn0 = 0.745;    ///< initial average stoichiometry, negative
  double peukert_n = 1.021;
  double temperature_k = 298.15;
  double t_plus = 0.363;  ///< transference number
  double c0 = 1000.0;     ///< initial electrolyte concentration (mol*m^-3)
  double r_gas = 8.314;
  double faraday = 96485.3;

  double q_all_mah() const { return q_all_as / 3.6; }
  double q_all_ah() const { return q_all_as / 3600.0; }
  /// Current that discharges the nominal capacity in one hour (A).
  double current_1c() const { return q_all_ah(); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  static ModelParams defaults() { return ModelParams{}; }
};

/// C-rate of a current against this cell's own capacity.
double c_rate_of(const ModelParams& p, double current_a);

/// Parameter bank file I/O (JSON, keys documented in README).
ModelParams load_params(const std::string& path);
void save_params(const ModelParams& p, const std::string& path);

}  // namespace socsmo::model
