#include "socsmo/observer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "socsmo/errors.hpp"

namespace socsmo::observer {

StateSpace build_state_space(const model::ModelParams& p, double dt,
                             double c_rate_now) {
  const double tau_sn = model::select_tau_sn(p, c_rate_now);
  const double tau_min = std::min({p.tau_sp, tau_sn, p.tau_e});
  if (!(dt > 0.0) || !(dt < tau_min))
    throw ConfigError("state space: dt = " + std::to_string(dt) +
                      " must lie in (0, " + std::to_string(tau_min) +
                      ") for Euler stability");
  const double q_eff =
      c_rate_now <= 0.0 ? p.q_all_as : model::effective_capacity(p, c_rate_now);

  StateSpace ss;
  ss.dt = dt;
  ss.a = linalg::zero();
  ss.a[0][0] = 1.0;
  ss.a[1][1] = 1.0 - dt / p.tau_sp;
  ss.a[2][2] = 1.0 - dt / tau_sn;
  ss.a[3][3] = 1.0 - dt / p.tau_e;
  ss.a[4][4] = 1.0 - dt / p.tau_e;
  ss.b = {dt / q_eff,
          12.0 * p.d_p * dt / (7.0 * q_eff * p.tau_sp),
          12.0 * p.d_n * dt / (7.0 * q_eff * tau_sn),
          dt * p.p_con_a / p.tau_e,
          dt * p.p_con_b / p.tau_e};
  return ss;
}

Vec to_vec(const model::ModelState& st) {
  return {st.s, st.dx_sp, st.dx_sn, st.dc1, st.dc2};
}

model::ModelState to_state(const Vec& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

std::array<GainCheck, linalg::kDim> check_gain_window(const Vec& k, const Mat& a,
                                                      const Vec& x_err_bound,
                                                      double dw) {
  std::array<GainCheck, linalg::kDim> out;
  for (std::size_t i = 0; i < linalg::kDim; ++i) {
    const double reach = std::abs((a[i][i] + 1.0) * x_err_bound[i]) - dw;
    out[i].lower_violated = !(k[i] > dw);
    out[i].upper_violated = !(reach >= k[i]);
    out[i].pass = !out[i].lower_violated && !out[i].upper_violated;
  }
  return out;
}

ThetaVector ThetaVector::from_params(const model::ModelParams& p) {
  return {p.d_p, p.d_n, p.q_all_ah(), p.x_sp0, p.x_sn0};
}

void ThetaVector::apply_to(model::ModelParams& p) const {
  p.d_p = d_p;
  p.d_n = d_n;
  p.q_all_as = q_all_ah * 3600.0;
  p.x_sp0 = x_sp0;
  p.x_sn0 = x_sn0;
}

ThetaBox ThetaBox::around(const model::ModelParams& p) {
  const ThetaVector c = ThetaVector::from_params(p);
  ThetaBox box;
  box.lo = {0.8 * c.d_p, 0.8 * c.d_n, 0.5 * c.q_all_ah, 0.8 * c.x_sp0, 0.8 * c.x_sn0};
  box.hi = {1.2 * c.d_p, 1.2 * c.d_n, 1.1 * c.q_all_ah, 1.2 * c.x_sp0, 1.2 * c.x_sn0};
  return box;
}

bool ThetaBox::clamp(ThetaVector& t) const {
  Vec v = t.as_vec();
  const Vec vlo = lo.as_vec();
  const Vec vhi = hi.as_vec();
  bool projected = false;
  for (std::size_t i = 0; i < linalg::kDim; ++i) {
    const double c = std::clamp(v[i], vlo[i], vhi[i]);
    if (c != v[i]) projected = true;
    v[i] = c;
  }
  t = ThetaVector::from_vec(v);
  return projected;
}

LyapunovCache lyapunov_prepare(const StateSpace& ss, const Vec& l,
                               double eps_int) {
  if (!(eps_int > 0.0 && eps_int < 1.0))
    throw ConfigError("lyapunov: eps_int must lie in (0,1)");
  Mat a_s = ss.a;
  a_s[0][0] = 1.0 - eps_int;
  for (std::size_t i = 0; i < linalg::kDim; ++i)
    if (!(std::abs(a_s[i][i]) < 1.0))
      throw ConfigError("lyapunov: stabilized A is not Schur stable");

  LyapunovCache cache;
  cache.eps_int = eps_int;
  cache.p = linalg::solve_discrete_lyapunov(a_s, linalg::identity());
  const Mat at_p_a =
      linalg::mat_mul(linalg::transpose(a_s), linalg::mat_mul(cache.p, a_s));
  cache.lambda_m = linalg::min_eigenvalue_sym(linalg::sub(cache.p, at_p_a));
  if (!(cache.lambda_m > 0.0))
    throw ConfigError("lyapunov: nonpositive lambda_m");
  cache.norm_ip = linalg::spectral_norm_sym(linalg::add(linalg::identity(), cache.p));
  cache.norm_l = linalg::norm2(l);
  return cache;
}

double dead_zone_bound_from_norms(double z_norm, double switch_norm,
                                  double l_norm, double lambda_m,
                                  double ip_norm) {
  if (!(l_norm > 0.0))
    throw ConfigError("dead zone: injection gain norm must be positive");
  return (z_norm + switch_norm) / l_norm * std::sqrt(lambda_m / ip_norm);
}

double dead_zone_bound(const Vec& x_hat, const StateSpace& ss, const Vec& k,
                       const LyapunovCache& cache, double current_a) {
  Vec z, reach;
  for (std::size_t i = 0; i < linalg::kDim; ++i) {
    const double a_inv = 1.0 / ss.a[i][i];
    z[i] = x_hat[i] + a_inv * ss.b[i] * current_a;
    reach[i] = a_inv * k[i];
  }
  return dead_zone_bound_from_norms(linalg::norm2(z), linalg::norm2(reach),
                                    cache.norm_l, cache.lambda_m, cache.norm_ip);
}

double switching_signal(double e, double phi) {
  // Residuals at the arithmetic noise floor count as zero, so a noiseless
  // matched run does not random-walk on rounding dust.
  if (std::abs(e) <= 1e-12) return 0.0;
  if (phi > 0.0) return std::clamp(e / phi, -1.0, 1.0);
  return e > 0.0 ? 1.0 : -1.0;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kStateOnly: return "state-only";
    case Variant::kPlainDual: return "plain-dual";
    case Variant::kFixedDeadZone: return "fixed-dz";
    case Variant::kAdaptiveDeadZone: return "adaptive-dz";
  }
  return "?";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  if (name == "state-only") return Variant::kStateOnly;
  if (name == "plain-dual") return Variant::kPlainDual;
  if (name == "fixed-dz") return Variant::kFixedDeadZone;
  if (name == "adaptive-dz") return Variant::kAdaptiveDeadZone;
  return std::nullopt;
}

std::string log_csv_header() {
  return "t_s,current_a,v_meas,v_pred,e_y,dz_bound,gate_open,soc_true,soc_est,"
         "theta_d_p,theta_d_n,theta_q_ah,theta_x_sp0,theta_x_sn0";
}

std::string log_csv_line(const LogRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%.12g,%.12g,%.12g,"
                "%.12g,%.12g,%.12g,%.12g",
                r.t, r.current, r.y_meas, r.y_pred, r.e_y, r.bound, r.gate_open,
                r.soc_true, r.soc_est, r.theta_d_p, r.theta_d_n, r.theta_q_ah,
                r.theta_x_sp0, r.theta_x_sn0);
  return buf;
}

void write_log_csv(const std::vector<LogRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("log: cannot write " + path);
  out << log_csv_header() << '\n';
  for (const auto& r : rows) out << log_csv_line(r) << '\n';
}

Estimator::Estimator(model::ModelParams nominal, model::OcpCurves curves,
                     ObserverGains gains, Variant variant, EstimatorOptions opts)
    : nominal_(nominal),
      params_hat_(nominal),
      curves_(std::move(curves)),
      gains_(gains),
      variant_(variant),
      opts_(opts),
      box_(ThetaBox::around(nominal)) {
  nominal_.validate();
  if (!(opts_.fixed_lo >= 0.0 && opts_.fixed_hi > opts_.fixed_lo))
    throw ConfigError("estimator: fixed dead-zone interval must satisfy 0 <= lo < hi");
  est_.x_hat = model::ModelState{};
  est_.theta_hat = ThetaVector::from_params(nominal_);
}

void Estimator::set_initial_soc_error(double soc_error) {
  est_.x_hat.s -= soc_error;
}

double Estimator::soc() const {
  return model::soc_of_state(est_.x_hat, params_hat_, opts_.soc0);
}

const LyapunovCache& Estimator::cache_for_rate(double rate) {
  const std::size_t regime = rate < 1.5 ? 0 : (rate < 2.5 ? 1 : 2);
  if (!caches_[regime]) {
    const StateSpace ss = build_state_space(params_hat_, opts_.dt, rate);
    caches_[regime] = lyapunov_prepare(ss, gains_.l, opts_.eps_int);
  }
  return *caches_[regime];
}

double Estimator::predict_voltage(const model::ModelState& st,
                                  double current_a) const {
  return model::terminal_voltage(st, params_hat_, curves_, current_a).u_terminal;
}

void Estimator::check_estimate(const model::ModelState& st) const {
  const auto x = model::stoichiometry(st, params_hat_);
  if (!(x.sp_avg > 0.0 && x.sp_avg < 1.0))
    throw SaturationError("x_sp_avg", x.sp_avg, step_index_);
  if (!(x.sn_avg > 0.0 && x.sn_avg < 1.0))
    throw SaturationError("x_sn_avg", x.sn_avg, step_index_);
  if (!(x.sp_surf > 0.0 && x.sp_surf < 1.0))
    throw SaturationError("x_sp_surf", x.sp_surf, step_index_);
  if (!(x.sn_surf > 0.0 && x.sn_surf < 1.0))
    throw SaturationError("x_sn_surf", x.sn_surf, step_index_);
}

void Estimator::step(double current_a, double y_meas_v) {
  const double rate = model::c_rate_of(params_hat_, current_a);
  const StateSpace ss = build_state_space(params_hat_, opts_.dt, rate);

  try {
    y_pred_ = predict_voltage(est_.x_hat, current_a);
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " at step " +
                      std::to_string(step_index_));
  }
  const double e_y = y_meas_v - y_pred_;

  // Gate evaluation before the update, on the same residual that is logged.
  double bound = 0.0;
  bool gate = false;
  switch (variant_) {
    case Variant::kStateOnly:
      break;
    case Variant::kPlainDual:
      gate = true;
      break;
    case Variant::kFixedDeadZone:
      bound = opts_.fixed_hi;
      gate = std::abs(e_y) > opts_.fixed_lo && std::abs(e_y) < opts_.fixed_hi;
      break;
    case Variant::kAdaptiveDeadZone:
      bound = dead_zone_bound(to_vec(est_.x_hat), ss, gains_.k,
                              cache_for_rate(rate), current_a);
      gate = std::abs(e_y) < bound;
      break;
  }

  // State observer: x' = A x + B i + K.d.sigma + L.d.e_y.
  const double sigma = switching_signal(e_y, opts_.phi_v);
  Vec xv = linalg::mat_vec(ss.a, to_vec(est_.x_hat));
  for (std::size_t i = 0; i < linalg::kDim; ++i) {
    xv[i] += ss.b[i] * current_a;
    xv[i] += kStateDirection[i] * (gains_.k[i] * sigma + gains_.l[i] * e_y);
  }
  const model::ModelState x_new = to_state(xv);
  check_estimate(x_new);

  // Parameter observer, sequential after the state update. It carries its
  // own output equation, evaluated at the same operating point the state
  // residual used: the measurement and the prediction must refer to the same
  // instant or the one-step voltage slope enters the update as a bias.
  if (gate) {
    double y_theta;
    try {
      y_theta = predict_voltage(est_.x_hat, current_a);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at step " +
                        std::to_string(step_index_));
    }
    const double e2 = y_meas_v - y_theta;
    // Crisp switching for the slow observer; the boundary layer only softens
    // the fast state corrections.
    const double sigma2 = switching_signal(e2, 0.0);
    const double e_inj =
        opts_.theta_clip_v > 0.0
            ? std::clamp(e2, -opts_.theta_clip_v, opts_.theta_clip_v)
            : e2;
    Vec th = est_.theta_hat.as_vec();
    for (std::size_t i = 0; i < linalg::kDim; ++i)
      th[i] += gains_.k_theta[i] * sigma2 + gains_.l_theta[i] * e_inj;
    ThetaVector theta = ThetaVector::from_vec(th);
    if (box_.clamp(theta)) ++projection_events_;
    est_.theta_hat = theta;
    theta.apply_to(params_hat_);
  }

  est_.x_hat = x_new;
  est_.e_y = e_y;
  est_.bound = bound;
  est_.gate_open = gate;
  ++step_index_;
}

}  // namespace socsmo::observer
