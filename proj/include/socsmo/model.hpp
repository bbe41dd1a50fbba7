// Reduced-order electrochemical cell model: normalized charge throughput,
// parabolic solid-diffusion deviations, two-node electrolyte dynamics,
// Butler-Volmer reaction kinetics, piecewise negative solid time constant and
// Peukert capacity correction. Sign convention: current > 0 is discharge.
#pragma once

#include "socsmo/ocp.hpp"
#include "socsmo/params.hpp"

namespace socsmo::model {

/// Dynamic state. s is the normalized charge throughput integrator; the
/// deviation fields are surface-minus-average solid concentrations and the
/// two electrolyte concentration deviations (mol*m^-3).
struct ModelState {
  double s = 0.0;
  double dx_sp = 0.0;
  double dx_sn = 0.0;
  double dc1 = 0.0;
  double dc2 = 0.0;
};

/// Derived stoichiometries for a state.
struct Stoichiometry {
  double sp_avg, sn_avg, sp_surf, sn_surf;
};

struct VoltageBreakdown {
  double e_ocv;
  double eta_con;
  double eta_act;
  double eta_ohm;
  double u_terminal;
  bool in_band;  ///< u_terminal inside the [1.5, 5.0] V sanity band
};

/// Floor applied to the Peukert rate so the correction stays bounded at rest.
inline constexpr double kRateFloor = 0.05;

/// Effective capacity (A*s) under the present C-rate per Peukert's law with
/// a 1C reference. Rates below kRateFloor are clamped; non-positive rates
/// throw DomainError.
double effective_capacity(const ModelParams& p, double c_rate_now);

/// Negative-electrode solid time constant for the present C-rate.
double select_tau_sn(const ModelParams& p, double c_rate_now);

Stoichiometry stoichiometry(const ModelState& st, const ModelParams& p);

/// One forward-Euler step. Throws SaturationError when a derived
/// stoichiometry leaves (0,1) and DomainError on electrolyte sign loss.
ModelState step(const ModelState& st, const ModelParams& p, double current_a,
                double dt_s);

/// Ohmic over-potential, signed with the current.
double eta_ohm(const ModelParams& p, double current_a);

/// Electrolyte concentration over-potential. Throws DomainError when a log
/// argument is non-positive.
double eta_con(const ModelParams& p, const ModelState& st);

/// Reaction over-potential from Butler-Volmer kinetics; q_eff_as replaces the
/// nominal capacity. Zero current returns exactly zero.
double eta_act(const ModelParams& p, const ModelState& st, double current_a,
               double q_eff_as);

/// Assembles the terminal voltage u = e_ocv - eta_con - eta_act - eta_ohm.
VoltageBreakdown terminal_voltage(const ModelState& st, const ModelParams& p,
                                  const OcpCurves& curves, double current_a);

/// State of charge from the throughput integrator: soc0 - s, clamped to
/// [0,1]. soc0 is the charge level the initial stoichiometries correspond to.
double soc_of_state(const ModelState& st, const ModelParams& p,
                    double soc0 = 1.0, bool* out_of_range = nullptr);

}  // namespace socsmo::model
