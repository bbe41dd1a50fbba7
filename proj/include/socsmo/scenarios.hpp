// Composes a synthetic plant, an excitation profile and an observer variant
// into one reproducible estimation run with its metric bundle.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socsmo/observer.hpp"
#include "socsmo/profiles.hpp"

namespace socsmo::scenarios {

/// Linear parameter drift standing in for cycle aging: capacity fade, ohmic
/// growth and a negative-electrode stoichiometry shift per 100 cycles.
struct AgingSpec {
  double cycles = 0.0;
  double capacity_fade_per_100 = 0.02;
  double resistance_growth_per_100 = 0.05;
  double stoich_shift_per_100 = 0.002;  ///< absolute shift on x_sn0
};

/// Aged copy of the base parameters. Throws ConfigError when the drifted set
/// violates the parameter invariants.
model::ModelParams age_params(const model::ModelParams& base, const AgingSpec& spec);

struct ProfileSpec {
  enum class Kind { kConstant, kSynthetic, kCsv };
  Kind kind = Kind::kConstant;
  double c_rate = 1.0;       // constant
  double duration_s = 1200.0;
  double dt_s = 1.0;
  std::uint64_t seed = 42;   // synthetic
  double c_rate_min = -2.0;
  double c_rate_max = 2.0;
  std::string path;          // csv

  profiles::CurrentProfile make(double q_all_mah) const;
};

struct ScenarioConfig {
  std::string label = "run";
  ProfileSpec profile;
  observer::Variant variant = observer::Variant::kAdaptiveDeadZone;
  observer::ObserverGains gains;
  double init_soc_error = 0.0;  ///< in [-0.5, 0.5]
  profiles::NoiseSpec noise;
  std::optional<AgingSpec> aging;
  observer::EstimatorOptions observer_opts;
  double cutoff_v = 2.5;

  void validate() const;
};

enum class EndReason { kDuration, kCutoff, kSaturation, kObserverFault };

struct RunResult {
  std::string label;
  double soc_rmse_pct = 0.0;
  double max_abs_err_pct = 0.0;
  std::optional<double> convergence_time_s;  ///< empty when never converged
  double wall_clock_ms = 0.0;
  double gate_duty = 0.0;
  long projection_events = 0;  ///< parameter-box clamps during the run
  std::size_t steps = 0;
  bool completed = true;  ///< false when ended by saturation or observer fault
  EndReason end_reason = EndReason::kDuration;
  std::string fault;  ///< diagnostic when not completed
  std::vector<observer::LogRow> log;
};

/// Simulates the plant (optionally aged, with measurement noise), runs the
/// selected observer variant against it and computes the metric bundle.
RunResult run_scenario(const ScenarioConfig& cfg, const model::OcpCurves& curves);
RunResult run_scenario(const ScenarioConfig& cfg);

/// Root-mean-square difference of two equal-length SOC sequences, percent.
double soc_rmse(const std::vector<double>& truth, const std::vector<double>& est);

/// Earliest time after which |err| stays below the threshold; empty when it
/// never settles. Errors are fractions, dt in seconds.
std::optional<double> convergence_time(const std::vector<double>& err, double dt,
                                       double threshold = 0.01);

}  // namespace socsmo::scenarios
