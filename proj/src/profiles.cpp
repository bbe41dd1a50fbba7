#include "socsmo/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "socsmo/errors.hpp"

namespace socsmo::profiles {

double CurrentProfile::net_charge_as() const {
  double acc = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k)
    acc += 0.5 * (samples[k].i + samples[k - 1].i) *
           (samples[k].t - samples[k - 1].t);
  return acc;
}

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next_u64() {
  // splitmix64; deterministic and platform independent.
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::uint32_t Rng::uniform_int(std::uint32_t lo, std::uint32_t hi) {
  return lo + static_cast<std::uint32_t>(next_u64() % (hi - lo + 1));
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

CurrentProfile constant_current(double c_rate, double q_all_mah,
                                double duration_s, double dt_s) {
  if (!(c_rate > 0.0)) throw ConfigError("constant_current: rate must be positive");
  if (!(dt_s > 0.0)) throw ConfigError("constant_current: dt must be positive");
  const double amps = c_rate * q_all_mah / 1000.0;
  CurrentProfile p;
  p.dt_nominal = dt_s;
  char label[64];
  std::snprintf(label, sizeof label, "%gc", c_rate);
  p.label = label;
  const auto n = static_cast<std::size_t>(std::llround(duration_s / dt_s));
  p.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    p.samples.push_back({static_cast<double>(k) * dt_s, amps});
  return p;
}

CurrentProfile synthetic_dynamic(double duration_s, double dt_s,
                                 std::uint64_t seed, double c_rate_min,
                                 double c_rate_max, double q_all_mah) {
  if (!(dt_s > 0.0)) throw ConfigError("synthetic_dynamic: dt must be positive");
  if (c_rate_min < -3.0 || c_rate_max > 3.0 || c_rate_min > c_rate_max ||
      c_rate_max < 0.0)
    throw ConfigError("synthetic_dynamic: rate bounds must lie in [-3, 3]");
  const double amps_1c = q_all_mah / 1000.0;
  const double cap_as = q_all_mah * 3.6;
  // Keep the running net discharge inside this band; well under the 80 %
  // ceiling and clear of the fresh-cell stoichiometry limits.
  const double net_hi = 0.35 * cap_as;
  const double net_lo = 0.02 * cap_as;

  Rng rng(seed);
  CurrentProfile p;
  p.dt_nominal = dt_s;
  char label[64];
  std::snprintf(label, sizeof label, "synthetic-%llu",
                static_cast<unsigned long long>(seed));
  p.label = label;

  const auto n = static_cast<std::size_t>(std::llround(duration_s / dt_s));
  p.samples.reserve(n);
  double net_as = 0.0;
  std::size_t k = 0;
  while (k < n) {
    const double pulse_s = static_cast<double>(rng.uniform_int(2, 20));
    auto steps = static_cast<std::size_t>(std::ceil(pulse_s / dt_s));
    steps = std::max<std::size_t>(steps, 1);
    const double mag =
        c_rate_max > 0.1 ? rng.uniform(0.1, c_rate_max) : rng.uniform(0.0, c_rate_max);
    bool discharge = rng.uniform(0.0, 1.0) < 0.75;
    if (net_as > net_hi) discharge = false;
    if (net_as < net_lo) discharge = true;
    double c = discharge ? mag : -0.5 * mag;
    c = std::clamp(c, c_rate_min, c_rate_max);
    const double amps = c * amps_1c;
    for (std::size_t j = 0; j < steps && k < n; ++j, ++k) {
      p.samples.push_back({static_cast<double>(k) * dt_s, amps});
      net_as += amps * dt_s;
    }
  }
  return p;
}

CurrentProfile ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ingest: cannot open " + path);
  CurrentProfile p;
  p.label = path;
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  bool has_voltage = false;
  while (std::getline(in, line)) {
    ++row;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line.rfind("t_s,current_a", 0) != 0)
        throw IngestError("ingest: expected header t_s,current_a[,voltage_v]", row);
      has_voltage = line.find("voltage_v") != std::string::npos;
      saw_header = true;
      continue;
    }
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    double t, i, v = 0.0;
    if (!(ss >> t >> i) || (has_voltage && !(ss >> v)))
      throw IngestError("ingest: unparsable row", row);
    if (!p.samples.empty() && !(t > p.samples.back().t))
      throw IngestError("ingest: non-monotone timestamp", row);
    p.samples.push_back({t, i});
    if (has_voltage) p.voltage.push_back(v);
  }
  if (!saw_header) throw IngestError("ingest: missing header", 1);
  if (p.samples.size() >= 2) {
    const double dt0 = p.samples[1].t - p.samples[0].t;
    p.dt_nominal = dt0;
    p.uniform_dt = true;
    for (std::size_t k = 2; k < p.samples.size(); ++k) {
      const double dt = p.samples[k].t - p.samples[k - 1].t;
      if (std::abs(dt - dt0) > 1e-9) {
        p.uniform_dt = false;
        break;
      }
    }
  }
  return p;
}

void export_csv(const CurrentProfile& profile, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("export: cannot write " + path);
  const bool with_v = profile.has_voltage();
  out << (with_v ? "t_s,current_a,voltage_v\n" : "t_s,current_a\n");
  char buf[128];
  for (std::size_t k = 0; k < profile.samples.size(); ++k) {
    if (with_v)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", profile.samples[k].t,
                    profile.samples[k].i, profile.voltage[k]);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", profile.samples[k].t,
                    profile.samples[k].i);
    out << buf;
  }
}

std::vector<double> noise_sequence(std::size_t n, double sigma,
                                   std::uint64_t seed, bool uniform) {
  std::vector<double> out(n, 0.0);
  if (sigma <= 0.0) return out;
  Rng rng(seed);
  if (uniform) {
    // Uniform mixture with matching variance: U(-a, a) has std a/sqrt(3).
    const double a = sigma * std::sqrt(3.0);
    for (auto& x : out) x = rng.uniform(-a, a);
  } else {
    for (auto& x : out) x = sigma * rng.gaussian();
  }
  return out;
}

CurrentProfile add_noise(const CurrentProfile& profile, const NoiseSpec& spec) {
  if (!(spec.sigma_v >= 0.0 && spec.sigma_i >= 0.0))
    throw ConfigError("noise: sigmas must be non-negative");
  CurrentProfile out = profile;
  const auto ni = noise_sequence(out.samples.size(), spec.sigma_i, spec.seed,
                                 spec.uniform);
  for (std::size_t k = 0; k < out.samples.size(); ++k) out.samples[k].i += ni[k];
  if (out.has_voltage()) {
    const auto nv = noise_sequence(out.voltage.size(), spec.sigma_v,
                                   spec.seed ^ 0xa5a5a5a5a5a5a5a5ULL, spec.uniform);
    for (std::size_t k = 0; k < out.voltage.size(); ++k) out.voltage[k] += nv[k];
  }
  return out;
}

}  // namespace socsmo::profiles
