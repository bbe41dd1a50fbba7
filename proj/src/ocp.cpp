#include "socsmo/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "socsmo/errors.hpp"

namespace socsmo::model {

OcpTable::OcpTable(std::vector<double> stoich, std::vector<double> volts)
    : x_(std::move(stoich)), v_(std::move(volts)) {
  if (x_.size() != v_.size() || x_.size() < 2)
    throw ConfigError("ocp table: need at least two matching breakpoints");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1]))
      throw ConfigError("ocp table: stoichiometry column must be strictly increasing");
  bool noninc = true, nondec = true;
  for (std::size_t i = 1; i < v_.size(); ++i) {
    if (v_[i] > v_[i - 1]) noninc = false;
    if (v_[i] < v_[i - 1]) nondec = false;
  }
  if (!noninc && !nondec)
    throw ConfigError("ocp table: potentials must be monotone");
  decreasing_ = noninc;

  // Fritsch-Carlson tangents keep the cubic interpolant monotone.
  const std::size_t n = x_.size();
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (v_[i + 1] - v_[i]) / (x_[i + 1] - x_[i]);
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
      m_[i] = 0.0;
    } else {
      // Harmonic mean weighted by interval widths.
      const double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
      const double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m_[i] = 0.0;
      m_[i + 1] = 0.0;
      continue;
    }
    const double a = m_[i] / d[i];
    const double b = m_[i + 1] / d[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m_[i] = t * a * d[i];
      m_[i + 1] = t * b * d[i];
    }
  }
}

double OcpTable::operator()(double x) const {
  if (!(x >= x_.front() && x <= x_.back()))
    throw DomainError("ocp table: stoichiometry " + std::to_string(x) +
                      " outside support [" + std::to_string(x_.front()) + ", " +
                      std::to_string(x_.back()) + "]");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) i = 1;
  if (i == x_.size()) i = x_.size() - 1;
  --i;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * v_[i] + h10 * h * m_[i] + h01 * v_[i + 1] + h11 * h * m_[i + 1];
}

OcpCurves OcpCurves::defaults() {
  // Synthetic NMC-like positive curve. The steep tail toward y -> 1 puts the
  // 2.5 V cell cutoff ahead of the positive-electrode saturation limit.
  OcpTable u_p(
      {0.00, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.68, 0.76, 0.84, 0.90, 0.94,
       0.97, 0.99, 1.00},
      {4.90, 4.80, 4.69, 4.58, 4.47, 4.38, 4.31, 4.25, 4.02, 3.76, 3.53, 3.33,
       3.10, 2.85, 2.70});
  // Graphite-like negative curve.
  OcpTable u_n(
      {0.00, 0.01, 0.03, 0.06, 0.10, 0.15, 0.22, 0.30, 0.40, 0.50, 0.60, 0.70,
       0.80, 0.90, 1.00},
      {1.100, 0.800, 0.580, 0.420, 0.320, 0.255, 0.210, 0.175, 0.150, 0.132,
       0.118, 0.106, 0.095, 0.085, 0.075});
  return OcpCurves{std::move(u_p), std::move(u_n)};
}

OcpCurves OcpCurves::from_files(const std::string& positive_path,
                                const std::string& negative_path) {
  return OcpCurves{load_ocp_table(positive_path), load_ocp_table(negative_path)};
}

double e_ocv(const OcpCurves& curves, double y_surf, double x_surf) {
  return curves.u_p(y_surf) - curves.u_n(x_surf);
}

bool ocv_within_window(const OcpCurves& curves, const ModelParams& p, double lo,
                       double hi) {
  // Reachable SOC window: both average stoichiometries inside curve support.
  const int n = 512;
  for (int i = 0; i <= n; ++i) {
    const double soc = static_cast<double>(i) / n;
    const double s = 1.0 - soc;
    const double y = p.x_sp0 + p.d_p * s;
    const double x = p.x_sn0 - p.d_n * s;
    if (y <= curves.u_p.min_x() || y >= curves.u_p.max_x()) continue;
    if (x <= curves.u_n.min_x() || x >= curves.u_n.max_x()) continue;
    const double e = e_ocv(curves, y, x);
    if (e < lo || e > hi) return false;
  }
  return true;
}

OcpTable load_ocp_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ocp table: cannot open " + path);
  std::string line;
  std::vector<double> xs, vs;
  std::size_t row = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    double x, v;
    if (!(ss >> x >> v)) {
      if (!header_skipped) {
        header_skipped = true;  // first non-numeric line is the header
        continue;
      }
      throw IngestError("ocp table: unparsable row in " + path, row);
    }
    header_skipped = true;
    xs.push_back(x);
    vs.push_back(v);
  }
  return OcpTable(std::move(xs), std::move(vs));
}

void save_ocp_table(const OcpTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("ocp table: cannot write " + path);
  out << "stoich,volts\n";
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", table.breakpoints()[i],
                  table.values()[i]);
    out << buf;
  }
}

}  // namespace socsmo::model
