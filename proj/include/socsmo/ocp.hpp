#pragma once

#include <string>
#include <vector>

#include "socsmo/params.hpp"

namespace socsmo::model {

/// Sampled open-circuit-potential curve of one electrode: breakpoint table
/// with monotone piecewise-cubic interpolation (Fritsch-Carlson tangents).
class OcpTable {
 public:
  /// Breakpoints must have strictly increasing stoichiometry and monotone
  /// (non-increasing or non-decreasing) potentials; throws ConfigError.
  OcpTable(std::vector<double> stoich, std::vector<double> volts);

  /// Interpolated potential. Throws DomainError outside [min_x, max_x].
  double operator()(double x) const;

  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }
  bool decreasing() const { return decreasing_; }
  std::size_t size() const { return x_.size(); }
  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> x_, v_, m_;  // breakpoints, values, Hermite tangents
  bool decreasing_ = true;
};

struct OcpCurves {
  OcpTable u_p;  ///< positive electrode potential vs stoichiometry y
  OcpTable u_n;  ///< negative electrode potential vs stoichiometry x

  /// Built-in NMC/graphite-like pair covering stoichiometry [0,1].
  static OcpCurves defaults();
  static OcpCurves from_files(const std::string& positive_path,
                              const std::string& negative_path);
};

/// Open-circuit voltage from electrode surface stoichiometries.
double e_ocv(const OcpCurves& curves, double y_surf, double x_surf);

/// True when E_OCV stays inside [lo, hi] volts over the SOC window reachable
/// with these params (stoichiometries inside both curve supports).
bool ocv_within_window(const OcpCurves& curves, const ModelParams& p,
                       double lo = 2.5, double hi = 4.2);

/// Two-column table file: header line, then "stoich,volts" rows with strictly
/// increasing first column. Whitespace-separated columns are also accepted.
OcpTable load_ocp_table(const std::string& path);
void save_ocp_table(const OcpTable& table, const std::string& path);

}  // namespace socsmo::model
