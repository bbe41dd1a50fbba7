// Command-line front end: simulate the plant, run estimators, reproduce the
// experiment batches, benchmark variants, fit parameters, export defaults.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "socsmo/config_io.hpp"
#include "socsmo/errors.hpp"

namespace fs = std::filesystem;
using namespace socsmo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

model::OcpCurves load_curves(const std::string& ocp_p, const std::string& ocp_n) {
  if (!ocp_p.empty() && !ocp_n.empty())
    return model::OcpCurves::from_files(ocp_p, ocp_n);
  return model::OcpCurves::defaults();
}

// Command-line values override the config file only when their flag was
// actually given; otherwise the file (or the built-in default) wins.
struct Overrides {
  const std::string* profile = nullptr;
  const std::string* variant = nullptr;
  const double* init_err = nullptr;
  double sigma_v = -1.0;
  std::uint64_t seed = 0;
};

scenarios::ScenarioConfig make_config(const Overrides& ov,
                                      const std::string& config) {
  scenarios::ScenarioConfig cfg;
  if (!config.empty()) cfg = harness::scenario_from_json_file(config);
  if (ov.profile) cfg.profile = harness::profile_from_name(*ov.profile);
  if (ov.variant) {
    const auto v = observer::variant_from_name(*ov.variant);
    if (!v) throw ConfigError("unknown variant: " + *ov.variant);
    cfg.variant = *v;
  }
  if (ov.seed != 0) {
    cfg.noise.seed = ov.seed;
    cfg.profile.seed = ov.seed;
  }
  if (ov.init_err) cfg.init_soc_error = *ov.init_err;
  if (ov.sigma_v >= 0.0) cfg.noise.sigma_v = ov.sigma_v;
  if (cfg.label == "run" || ov.profile || ov.variant)
    cfg.label = (ov.profile ? *ov.profile : std::string("config")) + ":" +
                observer::variant_name(cfg.variant);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"socsmo: battery SOC estimation with dual sliding-mode observers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  std::string config_path, profile = "1c", variant = "adaptive-dz";
  std::string ocp_p_path, ocp_n_path;
  std::uint64_t seed = 0;
  double init_err = 0.0, sigma_v = -1.0, duration = -1.0, dt = -1.0;
  unsigned reps = 7;
  std::vector<std::string> fit_names;

  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--config", config_path, "Scenario/batch config (JSON)");
  app.add_option("--seed", seed, "Seed override for profile and noise");
  app.add_option("--ocp-positive", ocp_p_path, "Positive OCP table file");
  app.add_option("--ocp-negative", ocp_n_path, "Negative OCP table file");

  auto* sim = app.add_subcommand("simulate", "Run the plant over a profile, write t/I/V CSV");
  auto* sim_profile =
      sim->add_option("--profile", profile, "Profile name (0.5c/1c/2c/3c/udds) or CSV path");
  sim->add_option("--duration", duration, "Override duration (s)");
  sim->add_option("--dt", dt, "Override step (s)");
  sim->add_option("--sigma-v", sigma_v, "Voltage noise std (V)");

  auto* est = app.add_subcommand("estimate", "Run an observer variant against the synthetic plant");
  auto* est_profile = est->add_option("--profile", profile, "Profile name or CSV path");
  auto* est_variant =
      est->add_option("--variant", variant, "state-only|plain-dual|fixed-dz|adaptive-dz");
  auto* est_init =
      est->add_option("--init-soc-error", init_err, "Initial SOC offset of the estimate");
  est->add_option("--sigma-v", sigma_v, "Voltage noise std (V)");
  est->add_option("--duration", duration, "Override duration (s)");
  est->add_option("--dt", dt, "Override step (s)");

  auto* batch = app.add_subcommand("batch", "Run a scenario batch from --config");

  auto* bench = app.add_subcommand("bench", "Time the observer variants on one profile");
  auto* bench_profile = bench->add_option("--profile", profile, "Profile name or CSV path");
  bench->add_option("--reps", reps, "Repetitions (>= 5)");
  bench->add_option("--duration", duration, "Override duration (s)");
  bench->add_option("--sigma-v", sigma_v, "Voltage noise std (V), default 0.005");

  auto* fit = app.add_subcommand("fit", "Identify parameters from a CSV with voltage");
  fit->add_option("--profile", profile, "CSV path with voltage_v column")->required();
  fit->add_option("--params", fit_names, "Parameter names to fit")->required();

  app.add_subcommand("export-defaults", "Write the default parameter bank and OCP tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    fs::create_directories(out_dir);
    const auto curves = load_curves(ocp_p_path, ocp_n_path);

    if (app.got_subcommand("export-defaults")) {
      const auto params = model::ModelParams::defaults();
      model::save_params(params, out_dir + "/params_default.json");
      model::save_ocp_table(curves.u_p, out_dir + "/ocp_positive.csv");
      model::save_ocp_table(curves.u_n, out_dir + "/ocp_negative.csv");
      std::printf("wrote %s/params_default.json and OCP tables\n", out_dir.c_str());
      return kExitOk;
    }

    if (app.got_subcommand("simulate")) {
      Overrides ov;
      const std::string plant_variant = "state-only";
      ov.variant = &plant_variant;
      if (config_path.empty() || sim_profile->count() > 0) ov.profile = &profile;
      ov.sigma_v = sigma_v;
      ov.seed = seed;
      auto cfg = make_config(ov, config_path);
      if (duration > 0.0) cfg.profile.duration_s = duration;
      if (dt > 0.0) cfg.profile.dt_s = dt;
      const auto result = scenarios::run_scenario(cfg, curves);
      profiles::CurrentProfile trace;
      trace.dt_nominal = cfg.profile.dt_s;
      trace.label = cfg.label;
      for (const auto& row : result.log) {
        trace.samples.push_back({row.t, row.current});
        trace.voltage.push_back(row.y_meas);
      }
      const std::string path = out_dir + "/simulated.csv";
      profiles::export_csv(trace, path);
      std::printf("wrote %s (%zu samples)\n", path.c_str(), trace.samples.size());
      return kExitOk;
    }

    if (app.got_subcommand("estimate")) {
      Overrides ov;
      if (config_path.empty() || est_profile->count() > 0) ov.profile = &profile;
      if (config_path.empty() || est_variant->count() > 0) ov.variant = &variant;
      if (config_path.empty() || est_init->count() > 0) ov.init_err = &init_err;
      ov.sigma_v = sigma_v;
      ov.seed = seed;
      auto cfg = make_config(ov, config_path);
      if (duration > 0.0) cfg.profile.duration_s = duration;
      if (dt > 0.0) cfg.profile.dt_s = dt;
      const auto result = scenarios::run_scenario(cfg, curves);
      observer::write_log_csv(result.log, out_dir + "/steps.csv");
      harness::write_run_summary_json(result, out_dir + "/summary.json");
      std::printf("%s: rmse %.4f %%, max |err| %.4f %%, gate duty %.3f, %zu steps\n",
                  result.label.c_str(), result.soc_rmse_pct, result.max_abs_err_pct,
                  result.gate_duty, result.steps);
      std::printf("wrote %s/steps.csv and %s/summary.json\n", out_dir.c_str(),
                  out_dir.c_str());
      return result.completed ? kExitOk : kExitRuntime;
    }

    if (app.got_subcommand("batch")) {
      if (config_path.empty()) {
        std::fprintf(stderr, "batch requires --config\n");
        return kExitUsage;
      }
      const auto configs = harness::batch_from_json_file(config_path);
      const auto result = harness::run_batch(configs, curves);
      std::fputs(result.summary_text.c_str(), stdout);
      std::ofstream(out_dir + "/batch_summary.txt") << result.summary_text;
      harness::write_batch_summary_json(result, out_dir + "/batch_summary.json");
      for (const auto& r : result.runs)
        if (!r.log.empty())
          observer::write_log_csv(r.log, out_dir + "/" + r.label + ".csv");
      return kExitOk;
    }

    if (app.got_subcommand("bench")) {
      if (sigma_v < 0.0) sigma_v = 0.005;
      Overrides ov;
      if (config_path.empty() || bench_profile->count() > 0) ov.profile = &profile;
      ov.sigma_v = sigma_v;
      ov.seed = seed;
      auto cfg = make_config(ov, config_path);
      if (duration > 0.0) cfg.profile.duration_s = duration;
      const std::vector<observer::Variant> variants = {
          observer::Variant::kStateOnly, observer::Variant::kPlainDual,
          observer::Variant::kAdaptiveDeadZone};
      const auto report = harness::bench_variants(cfg, variants, reps, curves);
      std::fputs(report.summary_text.c_str(), stdout);
      harness::write_bench_json(report, out_dir + "/bench.json");
      return kExitOk;
    }

    if (app.got_subcommand("fit")) {
      const auto trace = profiles::ingest_csv(profile);
      const auto guess = config_path.empty() ? model::ModelParams::defaults()
                                             : model::load_params(config_path);
      const auto report = harness::identify_params(trace, fit_names, guess, curves);
      for (std::size_t k = 0; k < report.names.size(); ++k)
        std::printf("%s = %.6g\n", report.names[k].c_str(), report.fitted[k]);
      std::printf("residual rms %.3g V after %u iterations (%s)\n",
                  report.residual_rms_v, report.iterations,
                  report.converged ? "converged" : "not converged");
      harness::write_fit_json(report, out_dir + "/fit.json");
      return report.converged ? kExitOk : kExitRuntime;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
