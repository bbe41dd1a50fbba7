// Current excitation profiles: constant-current discharges, a seeded
// synthetic dynamic pulse train, and CSV traces, plus sensor-noise injection.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace socsmo::profiles {

struct Sample {
  double t;  ///< seconds
  double i;  ///< amperes, > 0 discharging
};

struct CurrentProfile {
  std::vector<Sample> samples;
  double dt_nominal = 1.0;
  std::string label;
  bool uniform_dt = true;  ///< false for ingested non-uniform traces
  /// Measured terminal voltage, when the source CSV carried one.
  std::vector<double> voltage;

  bool has_voltage() const { return voltage.size() == samples.size(); }
  double duration() const {
    return samples.empty() ? 0.0 : samples.back().t + dt_nominal;
  }
  /// Trapezoidal integral of I dt over the sample grid (A*s).
  double net_charge_as() const;
};

struct NoiseSpec {
  double sigma_v = 0.0;  ///< voltage noise std (V)
  double sigma_i = 0.0;  ///< current noise std (A)
  std::uint64_t seed = 0;
  bool uniform = false;  ///< uniform-mixture draws instead of gaussian
};

/// Deterministic generator: mt19937_64 plus a polar gaussian so draws are
/// reproducible from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform(double lo, double hi);
  std::uint32_t uniform_int(std::uint32_t lo, std::uint32_t hi);  // inclusive
  double gaussian();  ///< standard normal

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint64_t next_u64();
};

/// Constant-current profile at the given C-rate of q_all_mah.
CurrentProfile constant_current(double c_rate, double q_all_mah,
                                double duration_s, double dt_s);

/// Seeded pulse train inside [c_rate_min, c_rate_max] (themselves inside
/// [-3, 3]), 2-20 s pulses, biased toward discharge, with the running net
/// discharge held inside a band well under 80 % of the capacity.
CurrentProfile synthetic_dynamic(double duration_s, double dt_s,
                                 std::uint64_t seed, double c_rate_min,
                                 double c_rate_max, double q_all_mah);

/// CSV with header "t_s,current_a" or "t_s,current_a,voltage_v".
CurrentProfile ingest_csv(const std::string& path);
void export_csv(const CurrentProfile& profile, const std::string& path);

/// Additive noise on the currents (and voltages when present).
CurrentProfile add_noise(const CurrentProfile& profile, const NoiseSpec& spec);

/// Noise sequence for a voltage trace of the given length.
std::vector<double> noise_sequence(std::size_t n, double sigma,
                                   std::uint64_t seed, bool uniform);

}  // namespace socsmo::profiles
