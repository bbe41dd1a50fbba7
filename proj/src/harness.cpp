#include "socsmo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "socsmo/errors.hpp"

namespace socsmo::harness {

namespace {

std::string status_of(const scenarios::RunResult& r) {
  using scenarios::EndReason;
  if (!r.completed) {
    return r.end_reason == EndReason::kSaturation ? "partial:saturation"
                                                  : "failed:" + r.fault;
  }
  switch (r.end_reason) {
    case EndReason::kCutoff: return "cutoff";
    case EndReason::kDuration: return "ok";
    default: return "ok";
  }
}

std::string format_batch_table(const std::vector<scenarios::RunResult>& runs) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-34s %10s %10s %10s %9s %8s  %s\n", "scenario",
                "rmse_pct", "max_pct", "conv_s", "duty", "steps", "status");
  os << buf;
  for (const auto& r : runs) {
    char conv[32];
    if (r.convergence_time_s)
      std::snprintf(conv, sizeof conv, "%.1f", *r.convergence_time_s);
    else
      std::snprintf(conv, sizeof conv, "-");
    std::snprintf(buf, sizeof buf, "%-34s %10.4f %10.4f %10s %9.3f %8zu  %s\n",
                  r.label.c_str(), r.soc_rmse_pct, r.max_abs_err_pct, conv,
                  r.gate_duty, r.steps, status_of(r).c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace

BatchResult run_batch(const std::vector<scenarios::ScenarioConfig>& configs,
                      const model::OcpCurves& curves, unsigned max_workers) {
  BatchResult out;
  out.runs.resize(configs.size());
  if (configs.empty()) {
    out.summary_text = format_batch_table(out.runs);
    return out;
  }
  unsigned workers = max_workers == 0 ? std::thread::hardware_concurrency()
                                      : max_workers;
  workers = std::max(1u, std::min<unsigned>(workers, configs.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= configs.size()) return;
      try {
        out.runs[k] = scenarios::run_scenario(configs[k], curves);
      } catch (const std::exception& e) {
        out.runs[k].label = configs[k].label;
        out.runs[k].completed = false;
        out.runs[k].end_reason = scenarios::EndReason::kObserverFault;
        out.runs[k].fault = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  out.summary_text = format_batch_table(out.runs);
  return out;
}

BenchReport bench_variants(const scenarios::ScenarioConfig& base,
                           const std::vector<observer::Variant>& variants,
                           unsigned repetitions, const model::OcpCurves& curves) {
  if (repetitions < 5)
    throw ConfigError("bench: need at least 5 repetitions for a stable median");

  // Shared plant trace; the timed sections cover only estimator stepping.
  const model::ModelParams nominal = model::ModelParams::defaults();
  const model::ModelParams truth =
      base.aging ? scenarios::age_params(nominal, *base.aging) : nominal;
  const profiles::CurrentProfile profile = base.profile.make(nominal.q_all_mah());

  std::vector<double> t_s, i_meas, y_meas;
  {
    model::ModelState st;
    const auto vn = profiles::noise_sequence(profile.samples.size(),
                                             base.noise.sigma_v, base.noise.seed,
                                             base.noise.uniform);
    const auto in = profiles::noise_sequence(profile.samples.size(),
                                             base.noise.sigma_i,
                                             base.noise.seed ^ 0x5bd1e995u,
                                             base.noise.uniform);
    for (std::size_t k = 0; k < profile.samples.size(); ++k) {
      const double i = profile.samples[k].i;
      const auto vb = model::terminal_voltage(st, truth, curves, i);
      if (vb.u_terminal < base.cutoff_v && i > 0.0) break;
      t_s.push_back(profile.samples[k].t);
      i_meas.push_back(i + in[k]);
      y_meas.push_back(vb.u_terminal + vn[k]);
      st = model::step(st, truth, i, profile.dt_nominal);
    }
  }

  BenchReport report;
  volatile double sink = 0.0;
  for (const auto variant : variants) {
    std::vector<double> times_ms;
    times_ms.reserve(repetitions);
    for (unsigned rep = 0; rep < repetitions; ++rep) {
      observer::EstimatorOptions opts = base.observer_opts;
      opts.dt = profile.dt_nominal;
      observer::Estimator est(nominal, curves, base.gains, variant, opts);
      est.set_initial_soc_error(base.init_soc_error);
      double acc = 0.0;
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t k = 0; k < t_s.size(); ++k) {
        est.step(i_meas[k], y_meas[k]);
        acc += est.state().e_y;
      }
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + acc;
      times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times_ms.begin(), times_ms.end());
    BenchRow row;
    row.variant = observer::variant_name(variant);
    row.median_ms = times_ms[times_ms.size() / 2];
    row.steps = t_s.size();
    row.repetitions = repetitions;
    row.per_step_us = row.steps ? row.median_ms * 1000.0 / row.steps : 0.0;
    row.steps_per_s = row.median_ms > 0.0 ? row.steps / (row.median_ms / 1000.0) : 0.0;
    report.rows.push_back(row);
  }

  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %14s %8s %6s\n", "variant",
                "median_ms", "per_step_us", "steps_per_s", "steps", "reps");
  os << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-16s %12.3f %12.4f %14.0f %8zu %6u\n",
                  r.variant.c_str(), r.median_ms, r.per_step_us, r.steps_per_s,
                  r.steps, r.repetitions);
    os << buf;
  }
  report.summary_text = os.str();
  return report;
}

std::vector<std::string> fittable_params() {
  return {"D_p", "D_n", "Q_all", "R_ohm", "P_act", "P_con_a", "P_con_b",
          "tau_e", "tau_sp", "x_sp0", "x_sn0", "n"};
}

double get_param(const model::ModelParams& p, const std::string& name) {
  if (name == "D_p") return p.d_p;
  if (name == "D_n") return p.d_n;
  if (name == "Q_all") return p.q_all_mah();
  if (name == "R_ohm") return p.r_ohm;
  if (name == "P_act") return p.p_act;
  if (name == "P_con_a") return p.p_con_a;
  if (name == "P_con_b") return p.p_con_b;
  if (name == "tau_e") return p.tau_e;
  if (name == "tau_sp") return p.tau_sp;
  if (name == "tau_sn1") return p.tau_sn1;
  if (name == "tau_sn2") return p.tau_sn2;
  if (name == "tau_sn3") return p.tau_sn3;
  if (name == "x_sp0") return p.x_sp0;
  if (name == "x_sn0") return p.x_sn0;
  if (name == "n") return p.peukert_n;
  if (name == "T") return p.temperature_k;
  if (name == "t_plus") return p.t_plus;
  if (name == "c0") return p.c0;
  if (name == "R") return p.r_gas;
  if (name == "F") return p.faraday;
  throw ConfigError("unknown parameter name: " + name);
}

void set_param(model::ModelParams& p, const std::string& name, double value) {
  if (name == "D_p") p.d_p = value;
  else if (name == "D_n") p.d_n = value;
  else if (name == "Q_all") p.q_all_as = value * 3.6;  // mAh in files
  else if (name == "R_ohm") p.r_ohm = value;
  else if (name == "P_act") p.p_act = value;
  else if (name == "P_con_a") p.p_con_a = value;
  else if (name == "P_con_b") p.p_con_b = value;
  else if (name == "tau_e") p.tau_e = value;
  else if (name == "tau_sp") p.tau_sp = value;
  else if (name == "tau_sn1") p.tau_sn1 = value;
  else if (name == "tau_sn2") p.tau_sn2 = value;
  else if (name == "tau_sn3") p.tau_sn3 = value;
  else if (name == "x_sp0") p.x_sp0 = value;
  else if (name == "x_sn0") p.x_sn0 = value;
  else if (name == "n") p.peukert_n = value;
  else if (name == "T") p.temperature_k = value;
  else if (name == "t_plus") p.t_plus = value;
  else if (name == "c0") p.c0 = value;
  else if (name == "R") p.r_gas = value;
  else if (name == "F") p.faraday = value;
  else throw ConfigError("unknown parameter name: " + name);
}

namespace {

// Residuals of the simulated terminal voltage against the measured column.
// Returns false when the trial parameter set drives the model out of domain.
bool residuals(const model::ModelParams& p, const model::OcpCurves& curves,
               const profiles::CurrentProfile& prof, std::vector<double>& r) {
  r.assign(prof.samples.size(), 0.0);
  model::ModelState st;
  try {
    for (std::size_t k = 0; k < prof.samples.size(); ++k) {
      const double i = prof.samples[k].i;
      r[k] = model::terminal_voltage(st, p, curves, i).u_terminal - prof.voltage[k];
      const double dt = k + 1 < prof.samples.size()
                            ? prof.samples[k + 1].t - prof.samples[k].t
                            : prof.dt_nominal;
      st = model::step(st, p, i, dt);
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

double cost_of(const std::vector<double>& r) {
  double acc = 0.0;
  for (double x : r) acc += x * x;
  return acc;
}

// Gaussian elimination with partial pivoting for the m x m normal equations.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t m) {
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    if (std::abs(a[piv * m + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(a[piv * m + c], a[col * m + c]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r * m + col] / a[col * m + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t col = m; col-- > 0;) {
    double acc = b[col];
    for (std::size_t c = col + 1; c < m; ++c) acc -= a[col * m + c] * b[c];
    b[col] = acc / a[col * m + col];
  }
  return true;
}

}  // namespace

FitReport identify_params(const profiles::CurrentProfile& profile_with_voltage,
                          const std::vector<std::string>& names,
                          const model::ModelParams& initial_guess,
                          const model::OcpCurves& curves,
                          unsigned max_iterations) {
  if (!profile_with_voltage.has_voltage())
    throw ConfigError("fit: profile carries no measured voltage column");
  if (names.empty()) throw ConfigError("fit: empty parameter subset");

  const std::size_t m = names.size();
  const std::size_t n = profile_with_voltage.samples.size();
  if (n < m) throw ConfigError("fit: fewer samples than parameters");

  // Physical boxes around the nominal bank: +-20 %, capacity [50 %, 110 %].
  const model::ModelParams nominal = model::ModelParams::defaults();
  std::vector<double> lo(m), hi(m), pv(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = get_param(nominal, names[j]);
    lo[j] = names[j] == "Q_all" ? 0.5 * c : 0.8 * c;
    hi[j] = names[j] == "Q_all" ? 1.1 * c : 1.2 * c;
    pv[j] = std::clamp(get_param(initial_guess, names[j]), lo[j], hi[j]);
  }

  model::ModelParams p = initial_guess;
  for (std::size_t j = 0; j < m; ++j) set_param(p, names[j], pv[j]);

  FitReport report;
  report.names = names;

  std::vector<double> r, r_try, r_pert;
  if (!residuals(p, curves, profile_with_voltage, r))
    throw ConfigError("fit: initial guess drives the model out of domain");
  double cost = cost_of(r);

  const double rms_tol = 1e-11;
  double lambda = 1e-3;
  bool converged = std::sqrt(cost / n) < rms_tol;
  unsigned iter = 0;
  while (!converged && iter < max_iterations) {
    ++iter;

    // Forward-difference Jacobian, relative step 1e-6.
    std::vector<double> jac(n * m, 0.0);
    bool jac_ok = true;
    for (std::size_t j = 0; j < m; ++j) {
      const double h = 1e-6 * std::max(std::abs(pv[j]), 1e-12);
      model::ModelParams pp = p;
      set_param(pp, names[j], pv[j] + h);
      if (!residuals(pp, curves, profile_with_voltage, r_pert)) {
        jac_ok = false;
        break;
      }
      for (std::size_t k = 0; k < n; ++k) jac[k * m + j] = (r_pert[k] - r[k]) / h;
    }
    if (!jac_ok) break;

    std::vector<double> jtj(m * m, 0.0), jtr(m, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < m; ++j) {
        jtr[j] += jac[k * m + j] * r[k];
        for (std::size_t j2 = j; j2 < m; ++j2)
          jtj[j * m + j2] += jac[k * m + j] * jac[k * m + j2];
      }
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t j2 = 0; j2 < j; ++j2) jtj[j * m + j2] = jtj[j2 * m + j];

    double grad_max = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      grad_max = std::max(grad_max, std::abs(jtr[j]));
    if (grad_max < 1e-12) {
      converged = true;
      break;
    }

    bool improved = false;
    while (lambda <= 1e12) {
      std::vector<double> a = jtj;
      std::vector<double> b(m);
      for (std::size_t j = 0; j < m; ++j) {
        a[j * m + j] += lambda * std::max(jtj[j * m + j], 1e-12);
        b[j] = -jtr[j];
      }
      if (!solve_dense(a, b, m)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> pv_try(m);
      model::ModelParams p_try = p;
      for (std::size_t j = 0; j < m; ++j) {
        pv_try[j] = std::clamp(pv[j] + b[j], lo[j], hi[j]);
        set_param(p_try, names[j], pv_try[j]);
      }
      if (residuals(p_try, curves, profile_with_voltage, r_try)) {
        const double cost_try = cost_of(r_try);
        if (cost_try < cost) {
          const double rel_drop = (cost - cost_try) / std::max(cost, 1e-300);
          p = p_try;
          pv = pv_try;
          r = r_try;
          cost = cost_try;
          lambda = std::max(lambda / 10.0, 1e-12);
          improved = true;
          if (rel_drop < 1e-14 || std::sqrt(cost / n) < rms_tol) converged = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No damping level improves the cost: stationary within line-search
      // resolution. Call it converged when the gradient has collapsed.
      converged = grad_max < 1e-6 * (1.0 + cost);
      break;
    }
  }

  report.iterations = iter;
  report.residual_rms_v = std::sqrt(cost / n);
  report.fitted.resize(m);
  for (std::size_t j = 0; j < m; ++j) report.fitted[j] = pv[j];
  report.converged = converged;
  return report;
}

}  // namespace socsmo::harness
