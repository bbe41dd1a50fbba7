// Dual sliding-mode observer: a state observer with switching plus output
// injection, a slow parameter observer, and the Lyapunov-derived adaptive
// dead zone that gates parameter adaptation. Also hosts the fixed dead-zone,
// plain dual and state-only baseline variants.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "socsmo/linalg.hpp"
#include "socsmo/model.hpp"

namespace socsmo::observer {

using linalg::Mat;
using linalg::Vec;

/// Discrete state space of the cell model at one operating rate. A is
/// diagonal; B is the dt-consistent input column of the scalar recursions.
struct StateSpace {
  Mat a;
  Vec b;
  double dt;
};

/// Builds A and B from the model recursions. Throws ConfigError when dt is
/// not below every applicable time constant.
StateSpace build_state_space(const model::ModelParams& p, double dt,
                             double c_rate_now);

Vec to_vec(const model::ModelState& st);
model::ModelState to_state(const Vec& v);

/// Sliding and injection gains for the state and parameter observers. The
/// state vectors hold magnitudes (the correction direction comes from the
/// output sensitivity signs below); the parameter vectors are applied with
/// their signs as given.
struct ObserverGains {
  Vec k{0.005, 2.5e-6, 2.5e-6, 0.25, 0.25};
  Vec l{0.002, 1e-6, 1e-6, 0.2, 0.2};
  Vec k_theta{2.5e-6, 2.5e-6, 2.5e-3, 2.5e-6, 2.5e-6};
  Vec l_theta{0.0005, -0.0005, 0.5, 0.0005, -0.0005};

  static ObserverGains defaults() { return ObserverGains{}; }
};

/// Signs of the terminal-voltage sensitivity to each state component
/// (s, dx_sp, dx_sn, dc1, dc2) for monotone OCP curves. A broadcast residual
/// sign only corrects toward the measurement when routed through these.
inline constexpr Vec kStateDirection{-1.0, -1.0, +1.0, -1.0, -1.0};

/// Per-component verdict of the sliding-gain stability interval
/// |(A+I)x_err| - dw >= K > dw.
struct GainCheck {
  bool pass;
  bool lower_violated;  ///< K <= dw
  bool upper_violated;  ///< K > |(a_ii + 1) x_err_i| - dw
};

std::array<GainCheck, linalg::kDim> check_gain_window(const Vec& k, const Mat& a,
                                                      const Vec& x_err_bound,
                                                      double dw);

/// The five adapted parameters. Capacity is carried in Ah here so the
/// published gain magnitudes act on comparable scales.
struct ThetaVector {
  double d_p, d_n, q_all_ah, x_sp0, x_sn0;

  static ThetaVector from_params(const model::ModelParams& p);
  void apply_to(model::ModelParams& p) const;
  Vec as_vec() const { return {d_p, d_n, q_all_ah, x_sp0, x_sn0}; }
  static ThetaVector from_vec(const Vec& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
};

/// Componentwise projection box for theta.
struct ThetaBox {
  ThetaVector lo, hi;

  /// +-20 % around the given params, except capacity at [50 %, 110 %] to
  /// admit aging fade.
  static ThetaBox around(const model::ModelParams& p);
  /// Clamps in place; returns true when any component was projected.
  bool clamp(ThetaVector& t) const;
};

/// Solution of the discrete Lyapunov equation for the stabilized A plus the
/// norms the dead-zone bound needs. Immutable once built.
struct LyapunovCache {
  Mat p;
  double lambda_m;  ///< min eigenvalue of P - As^T P As (1 for unit right side)
  double norm_ip;   ///< spectral norm of I + P
  double norm_l;    ///< Euclidean norm of the injection gain
  double eps_int;   ///< integrator-row stabilization used to build As
};

/// Solves As^T P As - P = -I with As = A except As(0,0) = 1 - eps_int.
LyapunovCache lyapunov_prepare(const StateSpace& ss, const Vec& l,
                               double eps_int = 5e-14);

/// Adaptive dead-zone radius (volts):
///   (||x_hat + A^-1 B i|| + ||A^-1 K||) / ||L|| * sqrt(lambda_m / ||I+P||).
double dead_zone_bound(const Vec& x_hat, const StateSpace& ss, const Vec& k,
                       const LyapunovCache& cache, double current_a);

/// Same formula from pre-computed norms.
double dead_zone_bound_from_norms(double z_norm, double switch_norm,
                                  double l_norm, double lambda_m,
                                  double ip_norm);

/// Switching signal: sgn(e) when phi == 0 (with sign(0) = 0), otherwise the
/// saturated boundary-layer form clamp(e/phi, -1, 1).
double switching_signal(double e, double phi);

enum class Variant { kStateOnly, kPlainDual, kFixedDeadZone, kAdaptiveDeadZone };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

struct EstimatorOptions {
  double dt = 1.0;
  double phi_v = 0.03;       ///< switching boundary layer; 0 selects pure sgn
  double eps_int = 5e-14;    ///< integrator stabilization for the Lyapunov solve
  double fixed_lo = 0.0;     ///< fixed dead-zone interval, lower edge (V)
  double fixed_hi = 0.001;   ///< fixed dead-zone interval, upper edge (V)
  /// Saturation on the parameter-injection residual (V); keeps transient
  /// voltage errors from slewing theta across its box. 0 disables.
  double theta_clip_v = 0.02;
  double soc0 = 1.0;
};

/// Joint state plus parameter estimate and the last gate evaluation.
struct EstimatorState {
  model::ModelState x_hat;
  ThetaVector theta_hat;
  double bound = 0.0;
  double e_y = 0.0;
  bool gate_open = false;
};

/// Fixed column order of the per-step estimation log (see README).
struct LogRow {
  double t, current, y_meas, y_pred, e_y, bound;
  int gate_open;
  double soc_true, soc_est;
  double theta_d_p, theta_d_n, theta_q_ah, theta_x_sp0, theta_x_sn0;
};

std::string log_csv_header();
std::string log_csv_line(const LogRow& row);
void write_log_csv(const std::vector<LogRow>& rows, const std::string& path);

/// Joint estimator. Stepping is single threaded per instance; distinct
/// instances are independent.
class Estimator {
 public:
  Estimator(model::ModelParams nominal, model::OcpCurves curves,
            ObserverGains gains, Variant variant, EstimatorOptions opts);

  /// Offsets the initial SOC estimate (shifts the throughput state).
  void set_initial_soc_error(double soc_error);

  /// One joint step against a measurement pair. Always runs the state
  /// observer; runs the parameter observer per the variant's gate. Errors
  /// from the internal predictor carry the step index.
  void step(double current_a, double y_meas_v);

  const EstimatorState& state() const { return est_; }
  const model::ModelParams& predictor_params() const { return params_hat_; }
  double last_y_pred() const { return y_pred_; }
  double soc() const;
  long steps_taken() const { return step_index_; }
  long projection_events() const { return projection_events_; }
  const ThetaBox& box() const { return box_; }

 private:
  const LyapunovCache& cache_for_rate(double rate);
  double predict_voltage(const model::ModelState& st, double current_a) const;
  void check_estimate(const model::ModelState& st) const;

  model::ModelParams nominal_;
  model::ModelParams params_hat_;
  model::OcpCurves curves_;
  ObserverGains gains_;
  Variant variant_;
  EstimatorOptions opts_;
  ThetaBox box_;
  EstimatorState est_;
  double y_pred_ = 0.0;
  long step_index_ = 0;
  long projection_events_ = 0;
  // One Lyapunov cache per tau_sn regime; A depends only on dt and the time
  // constants, so the caches survive theta updates.
  std::array<std::optional<LyapunovCache>, 3> caches_;
};

}  // namespace socsmo::observer
