// Front-end engineering: experiment batches, wall-clock benchmarking of the
// observer variants, and nonlinear least-squares parameter identification.
#pragma once

#include <string>
#include <vector>

#include "socsmo/scenarios.hpp"

namespace socsmo::harness {

struct BatchResult {
  std::vector<scenarios::RunResult> runs;
  std::string summary_text;  ///< aligned table, one row per scenario
};

/// Runs every scenario (optionally on a bounded worker pool); failures are
/// recorded in the corresponding RunResult and the batch continues.
BatchResult run_batch(const std::vector<scenarios::ScenarioConfig>& configs,
                      const model::OcpCurves& curves, unsigned max_workers = 0);

struct BenchRow {
  std::string variant;
  double median_ms = 0.0;
  double per_step_us = 0.0;
  double steps_per_s = 0.0;
  std::size_t steps = 0;
  unsigned repetitions = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string summary_text;
};

/// Times the pure estimation loop per variant over a shared pre-simulated
/// plant trace: median of `repetitions` (>= 5) runs, serial execution, all
/// logging buffered outside the timed section.
BenchReport bench_variants(const scenarios::ScenarioConfig& base,
                           const std::vector<observer::Variant>& variants,
                           unsigned repetitions, const model::OcpCurves& curves);

struct FitReport {
  std::vector<std::string> names;
  std::vector<double> fitted;
  double residual_rms_v = 0.0;
  unsigned iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of the named parameter
/// subset to a measured-voltage profile. Sensitivities by forward difference,
/// damping adapted by factors of 10, iterates clamped to physical boxes.
FitReport identify_params(const profiles::CurrentProfile& profile_with_voltage,
                          const std::vector<std::string>& names,
                          const model::ModelParams& initial_guess,
                          const model::OcpCurves& curves,
                          unsigned max_iterations = 80);

/// Fittable parameter-name list (README documents the keys).
std::vector<std::string> fittable_params();

/// Named value access used by the fitter and the parameter-bank file I/O.
double get_param(const model::ModelParams& p, const std::string& name);
void set_param(model::ModelParams& p, const std::string& name, double value);

}  // namespace socsmo::harness
