#include "socsmo/model.hpp"

#include <algorithm>
#include <cmath>

#include "socsmo/errors.hpp"

namespace socsmo::model {

double effective_capacity(const ModelParams& p, double c_rate_now) {
  if (!(c_rate_now > 0.0))
    throw DomainError("effective_capacity: rate must be positive");
  const double rate = std::max(c_rate_now, kRateFloor);
  // Q_now = Q_all * (C_ref / C_now)^(n-1), C_ref = 1.
  return p.q_all_as * std::pow(1.0 / rate, p.peukert_n - 1.0);
}

double select_tau_sn(const ModelParams& p, double c_rate_now) {
  if (c_rate_now < 1.5) return p.tau_sn1;
  if (c_rate_now < 2.5) return p.tau_sn2;
  return p.tau_sn3;
}

Stoichiometry stoichiometry(const ModelState& st, const ModelParams& p) {
  Stoichiometry out;
  out.sp_avg = p.x_sp0 + p.d_p * st.s;
  out.sn_avg = p.x_sn0 - p.d_n * st.s;
  out.sp_surf = out.sp_avg + st.dx_sp;
  out.sn_surf = out.sn_avg + st.dx_sn;
  return out;
}

namespace {

void check_state(const ModelState& st, const ModelParams& p) {
  const Stoichiometry x = stoichiometry(st, p);
  if (!(x.sp_avg > 0.0 && x.sp_avg < 1.0))
    throw SaturationError("x_sp_avg", x.sp_avg);
  if (!(x.sn_avg > 0.0 && x.sn_avg < 1.0))
    throw SaturationError("x_sn_avg", x.sn_avg);
  if (!(x.sp_surf > 0.0 && x.sp_surf < 1.0))
    throw SaturationError("x_sp_surf", x.sp_surf);
  if (!(x.sn_surf > 0.0 && x.sn_surf < 1.0))
    throw SaturationError("x_sn_surf", x.sn_surf);
  if (!(p.c0 + st.dc1 > 0.0))
    throw DomainError("electrolyte deviation dc1 drives c0 + dc1 <= 0");
  if (!(p.c0 - st.dc2 > 0.0))
    throw DomainError("electrolyte deviation dc2 drives c0 - dc2 <= 0");
}

}  // namespace

ModelState step(const ModelState& st, const ModelParams& p, double current_a,
                double dt_s) {
  if (!(dt_s > 0.0)) throw ConfigError("step: dt must be positive");
  const double rate = c_rate_of(p, current_a);
  const double q_eff = current_a == 0.0 ? p.q_all_as : effective_capacity(p, rate);
  const double tau_sn = select_tau_sn(p, rate);

  ModelState next;
  next.s = st.s + dt_s * current_a / q_eff;
  next.dx_sp = st.dx_sp + (dt_s / p.tau_sp) *
                              ((12.0 / 7.0) * (p.d_p / q_eff) * current_a - st.dx_sp);
  next.dx_sn = st.dx_sn + (dt_s / tau_sn) *
                              ((12.0 / 7.0) * (p.d_n / q_eff) * current_a - st.dx_sn);
  next.dc1 = st.dc1 + (dt_s / p.tau_e) * (p.p_con_a * current_a - st.dc1);
  next.dc2 = st.dc2 + (dt_s / p.tau_e) * (p.p_con_b * current_a - st.dc2);

  check_state(next, p);
  return next;
}

double eta_ohm(const ModelParams& p, double current_a) {
  return p.r_ohm * current_a;
}

double eta_con(const ModelParams& p, const ModelState& st) {
  const double num = p.c0 + st.dc1;
  const double den = p.c0 - st.dc2;
  if (!(num > 0.0))
    throw DomainError("eta_con: c0 + dc1 must be positive (dc1 = " +
                      std::to_string(st.dc1) + ")");
  if (!(den > 0.0))
    throw DomainError("eta_con: c0 - dc2 must be positive (dc2 = " +
                      std::to_string(st.dc2) + ")");
  return 2.0 * p.r_gas * p.temperature_k / p.faraday * (1.0 - p.t_plus) *
         std::log(num / den);
}

double eta_act(const ModelParams& p, const ModelState& st, double current_a,
               double q_eff_as) {
  if (current_a == 0.0) return 0.0;
  const Stoichiometry x = stoichiometry(st, p);
  if (!(x.sp_surf > 0.0 && x.sp_surf < 1.0))
    throw DomainError("eta_act: positive surface stoichiometry at boundary");
  if (!(x.sn_surf > 0.0 && x.sn_surf < 1.0))
    throw DomainError("eta_act: negative surface stoichiometry at boundary");
  const double common = p.p_act * current_a / (6.0 * q_eff_as * std::sqrt(p.c0));
  const double m_p =
      p.d_p * std::sqrt(1.0 - x.sp_surf) * std::sqrt(x.sp_surf) * common;
  const double m_n =
      p.d_n * std::sqrt(1.0 - x.sn_surf) * std::sqrt(x.sn_surf) * common;
  return 2.0 * p.r_gas * p.temperature_k / p.faraday *
         (std::asinh(m_n) + std::asinh(m_p));
}

VoltageBreakdown terminal_voltage(const ModelState& st, const ModelParams& p,
                                  const OcpCurves& curves, double current_a) {
  const Stoichiometry x = stoichiometry(st, p);
  VoltageBreakdown out;
  out.e_ocv = e_ocv(curves, x.sp_surf, x.sn_surf);
  out.eta_con = eta_con(p, st);
  const double rate = c_rate_of(p, current_a);
  const double q_eff = current_a == 0.0 ? p.q_all_as : effective_capacity(p, rate);
  out.eta_act = eta_act(p, st, current_a, q_eff);
  out.eta_ohm = eta_ohm(p, current_a);
  out.u_terminal = out.e_ocv - out.eta_con - out.eta_act - out.eta_ohm;
  out.in_band = out.u_terminal >= 1.5 && out.u_terminal <= 5.0;
  return out;
}

double soc_of_state(const ModelState& st, const ModelParams& p, double soc0,
                    bool* out_of_range) {
  (void)p;
  const double soc = soc0 - st.s;
  const bool outside = soc < 0.0 || soc > 1.0;
  if (out_of_range) *out_of_range = outside;
  return std::clamp(soc, 0.0, 1.0);
}

}  // namespace socsmo::model
