// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one verdict line per criterion. Exit code is the failure count.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "socsmo/harness.hpp"
#include "socsmo/linalg.hpp"

using namespace socsmo;
using observer::Variant;
using scenarios::ProfileSpec;
using scenarios::RunResult;
using scenarios::ScenarioConfig;

namespace {

int g_failures = 0;

void verdict(int criterion, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double tail_rmse_pct(const RunResult& rr) {
  const std::size_t from = rr.log.size() * 3 / 4;
  double acc = 0.0;
  for (std::size_t k = from; k < rr.log.size(); ++k) {
    const double d = rr.log[k].soc_true - rr.log[k].soc_est;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(rr.log.size() - from)) * 100.0;
}

// Adaptive-variant runs accumulated across the suite for the gate audit.
std::vector<RunResult> g_adaptive_runs;

ScenarioConfig profile_1c(double duration, double dt = 1.0) {
  ScenarioConfig cfg;
  cfg.profile.kind = ProfileSpec::Kind::kConstant;
  cfg.profile.c_rate = 1.0;
  cfg.profile.duration_s = duration;
  cfg.profile.dt_s = dt;
  return cfg;
}

ScenarioConfig profile_udds(double duration, double dt = 1.0,
                            std::uint64_t seed = 42) {
  ScenarioConfig cfg;
  cfg.profile.kind = ProfileSpec::Kind::kSynthetic;
  cfg.profile.duration_s = duration;
  cfg.profile.dt_s = dt;
  cfg.profile.seed = seed;
  return cfg;
}

void criterion_1_model_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = model::ModelParams::defaults();
  model::ModelState scalar;
  linalg::Vec vec{0, 0, 0, 0, 0};
  std::uint64_t rng = 2024;
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    rng = rng * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(rng >> 11) * 0x1.0p-53;
    const double current = (2.0 * u - 1.0) * 1.4 * p.current_1c();
    const auto ss = observer::build_state_space(p, 1.0, model::c_rate_of(p, current));
    linalg::Vec next = linalg::mat_vec(ss.a, vec);
    for (std::size_t i = 0; i < linalg::kDim; ++i) next[i] += ss.b[i] * current;
    vec = next;
    scalar = model::step(scalar, p, current, 1.0);
    const auto sv = observer::to_vec(scalar);
    for (std::size_t i = 0; i < linalg::kDim; ++i)
      worst = std::max(worst, std::abs(sv[i] - vec[i]));
  }
  const double elapsed = seconds_since(t0);
  verdict(1, worst <= 1e-12 && elapsed < 1.0,
          fmt("matrix vs scalar propagation over 10000 random steps: max abs "
              "diff %.2e (limit 1e-12) in %.2f s (limit 1)",
              worst, elapsed));
}

void criterion_2_correct_init() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail = "correct init:";
  for (const int kind : {0, 1}) {
    ScenarioConfig cfg = kind == 0 ? profile_1c(1200.0) : profile_udds(1400.0);
    cfg.noise.sigma_v = 0.005;
    cfg.noise.seed = 11;
    cfg.label = kind == 0 ? "1c" : "udds";

    cfg.variant = Variant::kAdaptiveDeadZone;
    RunResult adaptive = scenarios::run_scenario(cfg);
    cfg.variant = Variant::kPlainDual;
    const RunResult plain = scenarios::run_scenario(cfg);

    const bool ok = adaptive.completed && plain.completed &&
                    adaptive.soc_rmse_pct <= 0.5 &&
                    adaptive.soc_rmse_pct <= plain.soc_rmse_pct;
    pass = pass && ok;
    detail += fmt(" [%s adz %.3f%% <= 0.5 and <= plain %.3f%%]",
                  cfg.label.c_str(), adaptive.soc_rmse_pct, plain.soc_rmse_pct);
    g_adaptive_runs.push_back(std::move(adaptive));
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 30.0;
  detail += fmt(" in %.1f s (limit 30)", elapsed);
  verdict(2, pass, detail);
}

void criterion_3_init_error() {
  bool pass = true;
  std::string detail = "30% init error:";
  for (const int kind : {0, 1}) {
    for (const Variant v : {Variant::kAdaptiveDeadZone, Variant::kPlainDual}) {
      ScenarioConfig cfg =
          kind == 0 ? profile_1c(600.0, 0.5) : profile_udds(700.0, 0.5);
      cfg.noise.sigma_v = 0.005;
      cfg.noise.seed = 11;
      cfg.init_soc_error = -0.30;
      cfg.variant = v;
      cfg.label = std::string(kind == 0 ? "1c" : "udds") + ":" +
                  observer::variant_name(v);
      RunResult rr = scenarios::run_scenario(cfg);
      const double conv = rr.convergence_time_s ? *rr.convergence_time_s : 1e9;
      const double tail = tail_rmse_pct(rr);
      const bool ok = rr.completed && conv <= 60.0 && tail < 1.0;
      pass = pass && ok;
      detail += fmt(" [%s conv %.1f s, final rmse %.3f%%]", rr.label.c_str(),
                    conv, tail);
      if (v == Variant::kAdaptiveDeadZone)
        g_adaptive_runs.push_back(std::move(rr));
    }
  }
  verdict(3, pass, detail);
}

void criterion_4_timing() {
  ScenarioConfig cfg = profile_udds(30000.0);
  cfg.noise.sigma_v = 0.005;
  cfg.noise.seed = 11;
  const std::vector<Variant> variants = {Variant::kStateOnly,
                                         Variant::kAdaptiveDeadZone,
                                         Variant::kPlainDual};
  const auto report =
      harness::bench_variants(cfg, variants, 7, model::OcpCurves::defaults());
  const double t_state = report.rows[0].median_ms;
  const double t_adaptive = report.rows[1].median_ms;
  const double t_plain = report.rows[2].median_ms;
  const double gap = (t_plain - t_adaptive) / t_plain;
  const bool pass = t_state < t_adaptive && t_adaptive < t_plain && gap >= 0.05;
  verdict(4, pass,
          fmt("timing medians over %zu steps x 7 reps: state-only %.2f < "
              "adaptive %.2f < plain %.2f ms, adaptive-vs-plain gap %.1f%% "
              "(limit >= 5%%)",
              report.rows[0].steps, t_state, t_adaptive, t_plain, 100.0 * gap));
}

void criterion_5_aging() {
  bool pass = true;
  std::string detail = "aging:";
  double plain_100 = 0.0, plain_400 = 0.0;
  for (const double cycles : {100.0, 400.0}) {
    scenarios::AgingSpec aging;
    aging.cycles = cycles;
    aging.resistance_growth_per_100 = 0.015;
    ScenarioConfig cfg = profile_udds(5600.0, 1.0, 7);
    cfg.noise.sigma_v = 0.002;
    cfg.noise.seed = 504;
    cfg.aging = aging;

    cfg.variant = Variant::kPlainDual;
    const RunResult plain = scenarios::run_scenario(cfg);
    cfg.variant = Variant::kFixedDeadZone;
    const RunResult fixed = scenarios::run_scenario(cfg);
    cfg.variant = Variant::kAdaptiveDeadZone;
    RunResult adaptive = scenarios::run_scenario(cfg);

    (cycles == 100.0 ? plain_100 : plain_400) = plain.soc_rmse_pct;
    const bool ok = adaptive.completed && fixed.completed && plain.completed &&
                    adaptive.soc_rmse_pct <= fixed.soc_rmse_pct &&
                    fixed.soc_rmse_pct <= plain.soc_rmse_pct &&
                    adaptive.soc_rmse_pct <= 0.5;
    pass = pass && ok;
    detail +=
        fmt(" [%.0f cycles: adz %.4f <= fixed %.4f <= plain %.4f, adz <= 0.5]",
            cycles, adaptive.soc_rmse_pct, fixed.soc_rmse_pct,
            plain.soc_rmse_pct);
    g_adaptive_runs.push_back(std::move(adaptive));
  }
  pass = pass && plain_400 > plain_100;
  detail += fmt(" [plain degradation %+.4f > 0]", plain_400 - plain_100);
  verdict(5, pass, detail);
}

void criterion_6_gate_soundness() {
  std::size_t adapted = 0, violations = 0;
  for (const RunResult& rr : g_adaptive_runs)
    for (const auto& row : rr.log)
      if (row.gate_open) {
        ++adapted;
        if (!(std::abs(row.e_y) < row.bound)) ++violations;
      }
  verdict(6, adapted > 0 && violations == 0,
          fmt("gate audit over %zu adaptive runs: %zu adaptation steps, %zu "
              "bound violations (limit 0)",
              g_adaptive_runs.size(), adapted, violations));
}

void criterion_7_lyapunov() {
  const auto p = model::ModelParams::defaults();
  const auto ss = observer::build_state_space(p, 1.0, 1.0);
  const observer::ObserverGains g;
  const auto cache = observer::lyapunov_prepare(ss, g.l, 1e-3);

  linalg::Mat a_s = ss.a;
  a_s[0][0] = 1.0 - 1e-3;
  const auto residual = linalg::add(
      linalg::sub(linalg::mat_mul(linalg::transpose(a_s),
                                  linalg::mat_mul(cache.p, a_s)),
                  cache.p),
      linalg::identity());
  const double res = linalg::max_abs(residual);

  double closed_form_err = 0.0;
  for (std::size_t i = 0; i < linalg::kDim; ++i) {
    const double expect = 1.0 / (1.0 - a_s[i][i] * a_s[i][i]);
    closed_form_err =
        std::max(closed_form_err, std::abs(cache.p[i][i] - expect) / expect);
  }

  linalg::Vec l2;
  for (std::size_t i = 0; i < linalg::kDim; ++i) l2[i] = 2.0 * g.l[i];
  const auto cache2 = observer::lyapunov_prepare(ss, l2, 1e-3);
  const linalg::Vec x{0.2, 0.001, 0.001, 100.0, 40.0};
  const double b1 = observer::dead_zone_bound(x, ss, g.k, cache, 2.8941);
  const double b2 = observer::dead_zone_bound(x, ss, g.k, cache2, 2.8941);
  const double homogeneity = std::abs(b2 - 0.5 * b1) / (0.5 * b1);

  verdict(7, res <= 1e-10 && closed_form_err <= 1e-10 && homogeneity <= 1e-12,
          fmt("lyapunov residual %.2e (limit 1e-10), closed-form mismatch "
              "%.2e, dead-zone homogeneity error %.2e (limit 1e-12)",
              res, closed_form_err, homogeneity));
}

void criterion_8_overpotential_examples() {
  const auto p = model::ModelParams::defaults();
  bool pass = true;
  std::string detail = "unit examples:";

  auto check = [&](const char* name, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol * std::max(std::abs(want), 1e-30);
    pass = pass && ok;
    if (!ok) detail += fmt(" [%s got %.8g want %.8g]", name, got, want);
  };

  check("eta_ohm(1C)", model::eta_ohm(p, 2.8941), 0.045 * 2.8941, 1e-9);
  check("eta_ohm(0)", model::eta_ohm(p, 0.0), 0.0, 1e-9);
  check("eta_ohm rounded", model::eta_ohm(p, 2.8941), 0.130235, 1e-4);

  model::ModelState st;
  st.dc1 = 150.0;
  st.dc2 = 60.0;
  const double eta_con_oracle = 2.0 * 8.314 * 298.15 / 96485.3 * (1.0 - 0.363) *
                                std::log(1150.0 / 940.0);
  check("eta_con", model::eta_con(p, st), eta_con_oracle, 1e-9);
  check("eta_con rounded", model::eta_con(p, st), 0.006601, 5e-4);
  check("eta_con(0)", model::eta_con(p, model::ModelState{}), 0.0, 1e-9);

  const double common = p.p_act * 2.8941 / (6.0 * p.q_all_as * std::sqrt(1000.0));
  const double m_p = p.d_p * std::sqrt(1.0 - 0.68) * std::sqrt(0.68) * common;
  const double m_n = p.d_n * std::sqrt(1.0 - 0.745) * std::sqrt(0.745) * common;
  const double eta_act_oracle =
      2.0 * 8.314 * 298.15 / 96485.3 * (std::asinh(m_n) + std::asinh(m_p));
  check("eta_act", model::eta_act(p, model::ModelState{}, 2.8941, p.q_all_as),
        eta_act_oracle, 1e-9);
  check("eta_act(0)", model::eta_act(p, model::ModelState{}, 0.0, p.q_all_as),
        0.0, 1e-9);

  check("peukert(1C)", model::effective_capacity(p, 1.0), p.q_all_as, 1e-9);
  check("peukert(2C) mAh", model::effective_capacity(p, 2.0) / 3.6, 2852.3, 1e-4);
  model::ModelParams unit = p;
  unit.peukert_n = 1.0;
  check("peukert(n=1)", model::effective_capacity(unit, 2.7), p.q_all_as, 1e-9);

  check("tau_sn(1C)", model::select_tau_sn(p, 1.0), 1.1, 1e-9);
  check("tau_sn(2C)", model::select_tau_sn(p, 2.0), 10.0, 1e-9);
  check("tau_sn(3C)", model::select_tau_sn(p, 3.0), 0.05, 1e-9);

  if (pass) detail += " all pinned values within tolerance";
  verdict(8, pass, detail);
}

void criterion_9_identification() {
  const auto truth = model::ModelParams::defaults();
  const auto curves = model::OcpCurves::defaults();
  bool pass = true;
  std::string detail = "identification:";

  auto labeled = [&](double c_rate, double duration) {
    auto prof =
        profiles::constant_current(c_rate, truth.q_all_mah(), duration, 1.0);
    model::ModelState st;
    for (const auto& s : prof.samples) {
      prof.voltage.push_back(
          model::terminal_voltage(st, truth, curves, s.i).u_terminal);
      st = model::step(st, truth, s.i, 1.0);
    }
    return prof;
  };

  {
    const auto t0 = std::chrono::steady_clock::now();
    auto guess = truth;
    guess.r_ohm = truth.r_ohm * 1.2;
    const auto fit =
        harness::identify_params(labeled(1.0, 600.0), {"R_ohm"}, guess, curves);
    const double rel = std::abs(fit.fitted[0] - truth.r_ohm) / truth.r_ohm;
    const double elapsed = seconds_since(t0);
    pass = pass && fit.converged && rel < 0.01 && elapsed < 10.0;
    detail += fmt(" [R_ohm rel err %.2e < 1e-2 in %.2f s]", rel, elapsed);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    auto guess = truth;
    guess.q_all_as = truth.q_all_as * 1.08;
    const auto fit = harness::identify_params(labeled(0.5, 1800.0), {"Q_all"},
                                              guess, curves);
    const double rel =
        std::abs(fit.fitted[0] - truth.q_all_mah()) / truth.q_all_mah();
    const double elapsed = seconds_since(t0);
    pass = pass && fit.converged && rel < 0.02 && elapsed < 10.0;
    detail += fmt(" [Q_all rel err %.2e < 2e-2 in %.2f s]", rel, elapsed);
  }
  verdict(9, pass, detail);
}

void criterion_10_determinism() {
  ScenarioConfig cfg = profile_udds(900.0);
  cfg.noise.sigma_v = 0.005;
  cfg.noise.sigma_i = 0.01;
  cfg.noise.seed = 99;
  cfg.variant = Variant::kAdaptiveDeadZone;
  const RunResult a = scenarios::run_scenario(cfg);
  const RunResult b = scenarios::run_scenario(cfg);
  bool identical = a.log.size() == b.log.size();
  if (identical)
    for (std::size_t k = 0; k < a.log.size(); ++k)
      if (observer::log_csv_line(a.log[k]) != observer::log_csv_line(b.log[k])) {
        identical = false;
        break;
      }
  verdict(10, identical,
          fmt("repeated scenario: %zu-step logs byte-identical: %s",
              a.log.size(), identical ? "yes" : "no"));
}

}  // namespace

int main() {
  criterion_1_model_consistency();
  criterion_2_correct_init();
  criterion_3_init_error();
  criterion_4_timing();
  criterion_5_aging();
  criterion_6_gate_soundness();
  criterion_7_lyapunov();
  criterion_8_overpotential_examples();
  criterion_9_identification();
  criterion_10_determinism();
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures;
}
