#include "socsmo/scenarios.hpp"

#include <chrono>
#include <cmath>

#include "socsmo/errors.hpp"

namespace socsmo::scenarios {

model::ModelParams age_params(const model::ModelParams& base, const AgingSpec& spec) {
  if (spec.cycles < 0.0 || spec.capacity_fade_per_100 < 0.0 ||
      spec.resistance_growth_per_100 < 0.0 || spec.stoich_shift_per_100 < 0.0)
    throw ConfigError("aging: drift knobs must be non-negative");
  const double per100 = spec.cycles / 100.0;
  model::ModelParams aged = base;
  aged.q_all_as = base.q_all_as * (1.0 - spec.capacity_fade_per_100 * per100);
  aged.r_ohm = base.r_ohm * (1.0 + spec.resistance_growth_per_100 * per100);
  aged.x_sn0 = base.x_sn0 - spec.stoich_shift_per_100 * per100;
  aged.validate();
  return aged;
}

profiles::CurrentProfile ProfileSpec::make(double q_all_mah) const {
  switch (kind) {
    case Kind::kConstant:
      return profiles::constant_current(c_rate, q_all_mah, duration_s, dt_s);
    case Kind::kSynthetic:
      return profiles::synthetic_dynamic(duration_s, dt_s, seed, c_rate_min,
                                         c_rate_max, q_all_mah);
    case Kind::kCsv:
      return profiles::ingest_csv(path);
  }
  throw ConfigError("profile: unknown kind");
}

void ScenarioConfig::validate() const {
  if (init_soc_error < -0.5 || init_soc_error > 0.5)
    throw ConfigError("scenario: init_soc_error must lie in [-0.5, 0.5]");
  if (!(profile.dt_s > 0.0)) throw ConfigError("scenario: dt must be positive");
  if (!(cutoff_v >= 0.0)) throw ConfigError("scenario: cutoff must be non-negative");
}

double soc_rmse(const std::vector<double>& truth, const std::vector<double>& est) {
  if (truth.size() != est.size())
    throw ConfigError("soc_rmse: sequence length mismatch");
  if (truth.empty()) throw ConfigError("soc_rmse: empty sequences");
  double acc = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double d = truth[k] - est[k];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(truth.size())) * 100.0;
}

std::optional<double> convergence_time(const std::vector<double>& err, double dt,
                                       double threshold) {
  if (err.empty()) return std::nullopt;
  // Scan backward for the first violation; settling starts just after it.
  std::size_t settled_from = 0;
  for (std::size_t k = err.size(); k-- > 0;) {
    if (std::abs(err[k]) >= threshold) {
      settled_from = k + 1;
      break;
    }
  }
  if (settled_from >= err.size()) return std::nullopt;
  return static_cast<double>(settled_from) * dt;
}

namespace {

struct PlantTrace {
  std::vector<double> t, i_true, v_clean, soc_true;
  EndReason end_reason = EndReason::kDuration;
  std::string fault;
};

PlantTrace simulate_plant(const model::ModelParams& truth,
                          const model::OcpCurves& curves,
                          const profiles::CurrentProfile& profile,
                          double cutoff_v) {
  PlantTrace tr;
  tr.t.reserve(profile.samples.size());
  model::ModelState st;
  for (std::size_t k = 0; k < profile.samples.size(); ++k) {
    const double i = profile.samples[k].i;
    model::VoltageBreakdown vb;
    try {
      vb = model::terminal_voltage(st, truth, curves, i);
    } catch (const Error& e) {
      tr.end_reason = EndReason::kSaturation;
      tr.fault = e.what();
      break;
    }
    if (vb.u_terminal < cutoff_v && i > 0.0) {
      tr.end_reason = EndReason::kCutoff;
      break;
    }
    tr.t.push_back(profile.samples[k].t);
    tr.i_true.push_back(i);
    tr.v_clean.push_back(vb.u_terminal);
    tr.soc_true.push_back(model::soc_of_state(st, truth));
    const double dt = k + 1 < profile.samples.size()
                          ? profile.samples[k + 1].t - profile.samples[k].t
                          : profile.dt_nominal;
    try {
      st = model::step(st, truth, i, dt);
    } catch (const Error& e) {
      tr.end_reason = EndReason::kSaturation;
      tr.fault = e.what();
      break;
    }
  }
  return tr;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const model::OcpCurves& curves) {
  cfg.validate();

  const model::ModelParams nominal = model::ModelParams::defaults();
  const model::ModelParams truth =
      cfg.aging ? age_params(nominal, *cfg.aging) : nominal;

  const profiles::CurrentProfile profile = cfg.profile.make(nominal.q_all_mah());
  PlantTrace plant = simulate_plant(truth, curves, profile, cfg.cutoff_v);

  // When the plant hit a stoichiometry wall, the estimator cannot propagate
  // past the same wall either; drop the final measurement.
  std::size_t n = plant.t.size();
  if (plant.end_reason == EndReason::kSaturation && n > 0) --n;
  const auto vn = profiles::noise_sequence(n, cfg.noise.sigma_v, cfg.noise.seed,
                                           cfg.noise.uniform);
  const auto in = profiles::noise_sequence(
      n, cfg.noise.sigma_i, cfg.noise.seed ^ 0x5bd1e995u, cfg.noise.uniform);

  observer::EstimatorOptions opts = cfg.observer_opts;
  opts.dt = profile.dt_nominal;  // equals cfg dt for generated profiles
  observer::Estimator est(nominal, curves, cfg.gains, cfg.variant, opts);
  est.set_initial_soc_error(cfg.init_soc_error);

  RunResult rr;
  rr.label = cfg.label;
  rr.end_reason = plant.end_reason;
  rr.fault = plant.fault;
  rr.log.reserve(n);
  std::vector<double> soc_est_seq, err_seq;
  soc_est_seq.reserve(n);
  std::size_t gate_count = 0;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < n; ++k) {
    const double i_meas = plant.i_true[k] + in[k];
    const double y_meas = plant.v_clean[k] + vn[k];
    const double soc_est = est.soc();
    observer::LogRow row;
    row.t = plant.t[k];
    row.current = i_meas;
    row.y_meas = y_meas;
    row.soc_true = plant.soc_true[k];
    row.soc_est = soc_est;
    try {
      est.step(i_meas, y_meas);
    } catch (const Error& e) {
      rr.end_reason = EndReason::kObserverFault;
      rr.fault = e.what();
      rr.completed = false;
      break;
    }
    row.y_pred = est.last_y_pred();
    row.e_y = est.state().e_y;
    row.bound = est.state().bound;
    row.gate_open = est.state().gate_open ? 1 : 0;
    const auto& th = est.state().theta_hat;
    row.theta_d_p = th.d_p;
    row.theta_d_n = th.d_n;
    row.theta_q_ah = th.q_all_ah;
    row.theta_x_sp0 = th.x_sp0;
    row.theta_x_sn0 = th.x_sn0;
    rr.log.push_back(row);
    soc_est_seq.push_back(soc_est);
    err_seq.push_back(plant.soc_true[k] - soc_est);
    if (row.gate_open) ++gate_count;
  }
  const auto t1 = std::chrono::steady_clock::now();
  rr.wall_clock_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  rr.steps = rr.log.size();
  if (plant.end_reason == EndReason::kSaturation) rr.completed = false;
  if (rr.steps > 0) {
    std::vector<double> soc_true_seq(plant.soc_true.begin(),
                                     plant.soc_true.begin() + rr.steps);
    rr.soc_rmse_pct = soc_rmse(soc_true_seq, soc_est_seq);
    double worst = 0.0;
    for (double e : err_seq) worst = std::max(worst, std::abs(e));
    rr.max_abs_err_pct = worst * 100.0;
    rr.convergence_time_s = convergence_time(err_seq, profile.dt_nominal);
    rr.gate_duty = static_cast<double>(gate_count) / static_cast<double>(rr.steps);
    rr.projection_events = est.projection_events();
  }
  return rr;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  return run_scenario(cfg, model::OcpCurves::defaults());
}

}  // namespace socsmo::scenarios
