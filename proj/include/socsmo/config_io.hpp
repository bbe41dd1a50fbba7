// JSON file I/O for scenario configs, batches and machine-readable reports.
#pragma once

#include <string>
#include <vector>

#include "socsmo/harness.hpp"

namespace socsmo::harness {

scenarios::ScenarioConfig scenario_from_json_file(const std::string& path);
std::vector<scenarios::ScenarioConfig> batch_from_json_file(const std::string& path);

void write_run_summary_json(const scenarios::RunResult& result,
                            const std::string& path);
void write_batch_summary_json(const BatchResult& batch, const std::string& path);
void write_bench_json(const BenchReport& report, const std::string& path);
void write_fit_json(const FitReport& report, const std::string& path);

/// Named built-in profile ("0.5c", "1c", "2c", "3c", "udds") or a CSV path.
scenarios::ProfileSpec profile_from_name(const std::string& name);

}  // namespace socsmo::harness
