#include "socsmo/config_io.hpp"

#include <fstream>

#include "json.hpp"
#include "socsmo/errors.hpp"

namespace socsmo {

using nlohmann::json;

namespace model {

// Parameter-bank keys follow the README transliterations; Q_all is in mAh.
namespace {
const char* const kParamKeys[] = {"D_n", "D_p", "F", "P_act", "P_con_a",
                                  "P_con_b", "Q_all", "R", "R_ohm", "T",
                                  "t_plus", "c0", "tau_e", "tau_sn1", "tau_sn2",
                                  "tau_sn3", "tau_sp", "x_sn0", "x_sp0", "n"};
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("params: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("params: bad JSON in " + path + ": " + e.what());
  }
  ModelParams p;
  for (const char* key : kParamKeys) {
    if (!j.contains(key)) throw ConfigError("params: missing key " + std::string(key));
    harness::set_param(p, key, j.at(key).get<double>());
  }
  p.validate();
  return p;
}

void save_params(const ModelParams& p, const std::string& path) {
  json j;
  for (const char* key : kParamKeys) j[key] = harness::get_param(p, key);
  std::ofstream out(path);
  if (!out) throw ConfigError("params: cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace model

namespace harness {

namespace {

scenarios::ProfileSpec profile_from_json(const json& j) {
  scenarios::ProfileSpec spec;
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant")
    spec.kind = scenarios::ProfileSpec::Kind::kConstant;
  else if (kind == "synthetic")
    spec.kind = scenarios::ProfileSpec::Kind::kSynthetic;
  else if (kind == "csv")
    spec.kind = scenarios::ProfileSpec::Kind::kCsv;
  else
    throw ConfigError("profile: unknown kind " + kind);
  spec.c_rate = j.value("c_rate", spec.c_rate);
  spec.duration_s = j.value("duration_s", spec.duration_s);
  spec.dt_s = j.value("dt_s", spec.dt_s);
  spec.seed = j.value("seed", spec.seed);
  spec.c_rate_min = j.value("c_rate_min", spec.c_rate_min);
  spec.c_rate_max = j.value("c_rate_max", spec.c_rate_max);
  spec.path = j.value("path", spec.path);
  return spec;
}

observer::Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != linalg::kDim)
    throw ConfigError(std::string("gains: ") + what + " must be a 5-vector");
  observer::Vec v;
  for (std::size_t i = 0; i < linalg::kDim; ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

scenarios::ScenarioConfig scenario_from_json(const json& j) {
  scenarios::ScenarioConfig cfg;
  cfg.label = j.value("label", cfg.label);
  if (j.contains("profile")) cfg.profile = profile_from_json(j.at("profile"));
  if (j.contains("variant")) {
    const auto v = observer::variant_from_name(j.at("variant").get<std::string>());
    if (!v) throw ConfigError("scenario: unknown variant");
    cfg.variant = *v;
  }
  cfg.init_soc_error = j.value("init_soc_error", cfg.init_soc_error);
  cfg.cutoff_v = j.value("cutoff_v", cfg.cutoff_v);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.noise.sigma_v = n.value("sigma_v", cfg.noise.sigma_v);
    cfg.noise.sigma_i = n.value("sigma_i", cfg.noise.sigma_i);
    cfg.noise.seed = n.value("seed", cfg.noise.seed);
    cfg.noise.uniform = n.value("uniform", cfg.noise.uniform);
  }
  if (j.contains("aging")) {
    const auto& a = j.at("aging");
    scenarios::AgingSpec spec;
    spec.cycles = a.value("cycles", spec.cycles);
    spec.capacity_fade_per_100 = a.value("capacity_fade_per_100", spec.capacity_fade_per_100);
    spec.resistance_growth_per_100 =
        a.value("resistance_growth_per_100", spec.resistance_growth_per_100);
    spec.stoich_shift_per_100 = a.value("stoich_shift_per_100", spec.stoich_shift_per_100);
    cfg.aging = spec;
  }
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    if (g.contains("K")) cfg.gains.k = vec_from_json(g.at("K"), "K");
    if (g.contains("L")) cfg.gains.l = vec_from_json(g.at("L"), "L");
    if (g.contains("K_theta")) cfg.gains.k_theta = vec_from_json(g.at("K_theta"), "K_theta");
    if (g.contains("L_theta")) cfg.gains.l_theta = vec_from_json(g.at("L_theta"), "L_theta");
  }
  if (j.contains("observer")) {
    const auto& o = j.at("observer");
    cfg.observer_opts.phi_v = o.value("phi_v", cfg.observer_opts.phi_v);
    cfg.observer_opts.eps_int = o.value("eps_int", cfg.observer_opts.eps_int);
    cfg.observer_opts.fixed_lo = o.value("fixed_lo", cfg.observer_opts.fixed_lo);
    cfg.observer_opts.fixed_hi = o.value("fixed_hi", cfg.observer_opts.fixed_hi);
    cfg.observer_opts.soc0 = o.value("soc0", cfg.observer_opts.soc0);
  }
  cfg.validate();
  return cfg;
}

scenarios::ScenarioConfig scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario: bad JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::vector<scenarios::ScenarioConfig> batch_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("batch: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("batch: bad JSON in " + path + ": " + e.what());
  }
  const json& arr = j.is_array() ? j : j.at("scenarios");
  if (!arr.is_array()) throw ConfigError("batch: expected a scenario array");
  std::vector<scenarios::ScenarioConfig> out;
  out.reserve(arr.size());
  for (const auto& item : arr) out.push_back(scenario_from_json(item));
  return out;
}

namespace {

json run_to_json(const scenarios::RunResult& r) {
  json j;
  j["label"] = r.label;
  j["soc_rmse_pct"] = r.soc_rmse_pct;
  j["max_abs_err_pct"] = r.max_abs_err_pct;
  if (r.convergence_time_s)
    j["convergence_time_s"] = *r.convergence_time_s;
  else
    j["convergence_time_s"] = nullptr;
  j["wall_clock_ms"] = r.wall_clock_ms;
  j["gate_duty"] = r.gate_duty;
  j["projection_events"] = r.projection_events;
  j["steps"] = r.steps;
  j["completed"] = r.completed;
  if (!r.fault.empty()) j["fault"] = r.fault;
  return j;
}

void dump_to(const json& j, const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw ConfigError(std::string(what) + ": cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

void write_run_summary_json(const scenarios::RunResult& result,
                            const std::string& path) {
  dump_to(run_to_json(result), path, "run summary");
}

void write_batch_summary_json(const BatchResult& batch, const std::string& path) {
  json j = json::array();
  for (const auto& r : batch.runs) j.push_back(run_to_json(r));
  dump_to(j, path, "batch summary");
}

void write_bench_json(const BenchReport& report, const std::string& path) {
  json j = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["variant"] = r.variant;
    row["median_ms"] = r.median_ms;
    row["per_step_us"] = r.per_step_us;
    row["steps_per_s"] = r.steps_per_s;
    row["steps"] = r.steps;
    row["repetitions"] = r.repetitions;
    j.push_back(row);
  }
  dump_to(j, path, "bench report");
}

void write_fit_json(const FitReport& report, const std::string& path) {
  json j;
  for (std::size_t k = 0; k < report.names.size(); ++k)
    j["fitted"][report.names[k]] = report.fitted[k];
  j["residual_rms_v"] = report.residual_rms_v;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  dump_to(j, path, "fit report");
}

scenarios::ProfileSpec profile_from_name(const std::string& name) {
  scenarios::ProfileSpec spec;
  if (name == "udds") {
    spec.kind = scenarios::ProfileSpec::Kind::kSynthetic;
    spec.duration_s = 1400.0;
    return spec;
  }
  if (!name.empty() && (name.back() == 'c' || name.back() == 'C')) {
    try {
      const double rate = std::stod(name.substr(0, name.size() - 1));
      if (rate > 0.0) {
        spec.kind = scenarios::ProfileSpec::Kind::kConstant;
        spec.c_rate = rate;
        return spec;
      }
    } catch (...) {
      // fall through to CSV
    }
  }
  spec.kind = scenarios::ProfileSpec::Kind::kCsv;
  spec.path = name;
  return spec;
}

}  // namespace harness
}  // namespace socsmo
