#include "socsmo/params.hpp"

#include <cmath>

#include "socsmo/errors.hpp"

namespace socsmo::model {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("model params: ") + what);
}
}  // namespace

void ModelParams::validate() const {
  require(q_all_as > 0.0, "Q_all must be positive");
  require(d_p > 0.0 && d_p <= 1.0, "D_p must be in (0,1]");
  require(d_n > 0.0 && d_n <= 1.0, "D_n must be in (0,1]");
  require(tau_e > 0.0 && tau_sp > 0.0 && tau_sn1 > 0.0 && tau_sn2 > 0.0 && tau_sn3 > 0.0,
          "time constants must be positive");
  require(x_sp0 > 0.0 && x_sp0 < 1.0, "x_sp0 must be in (0,1)");
  require(x_sn0 > 0.0 && x_sn0 < 1.0, "x_sn0 must be in (0,1)");
  require(peukert_n >= 1.0, "Peukert exponent must be >= 1");
  require(c0 > 0.0, "c0 must be positive");
  require(temperature_k > 0.0, "temperature must be positive");
  require(t_plus > 0.0 && t_plus < 1.0, "t_plus must be in (0,1)");
  require(r_ohm >= 0.0, "R_ohm must be non-negative");
  require(r_gas > 0.0 && faraday > 0.0, "physical constants must be positive");
}

double c_rate_of(const ModelParams& p, double current_a) {
  return std::abs(current_a) / p.current_1c();
}

}  // namespace socsmo::model
