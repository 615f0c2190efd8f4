#include "syndromestat/noise.hpp"

#include <cmath>
#include <string>

#include "syndromestat/errors.hpp"

namespace syndromestat {

namespace {

constexpr double kTol = 1e-12;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
}

void check_readout(double q, const std::string& name) {
  if (!(q >= 0.0 && q <= 0.5 + kTol)) throw ValidationError(name + " must lie in [0, 1/2]");
}

}  // namespace

void NoiseParams::validate() const {
  check_probability(p_x, "p_x");
  check_probability(p_y, "p_y");
  check_probability(p_z, "p_z");
  if (p_total() > 1.0 + kTol) throw ValidationError("p_x + p_y + p_z must not exceed 1");
  if (p_x + p_y > 0.5 + kTol) throw ValidationError("p_x + p_y must not exceed 1/2");
  if (p_x + p_z > 0.5 + kTol) throw ValidationError("p_x + p_z must not exceed 1/2");
  if (p_y + p_z > 0.5 + kTol) throw ValidationError("p_y + p_z must not exceed 1/2");
  check_readout(q, "q");
  for (std::size_t i = 0; i < q_per_check.size(); ++i) check_readout(q_per_check[i], "q of check " + std::to_string(i));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
}

double NoiseParams::q_eff(std::size_t i) const { return effective_readout_rate(q_raw(i), lambda); }

double effective_readout_rate(double q, double lambda) {
  check_readout(q, "q");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  const double l2 = 1.0 + lambda * lambda;
  return q * 2.0 * lambda / l2 + 0.5 * (1.0 - lambda) * (1.0 - lambda) / l2;
}

std::array<double, 4> site_weights(const NoiseParams& p) {
  p.validate();
  auto clamp0 = [](double v) { return v < 0.0 ? 0.0 : v; };
  return {1.0, clamp0(1.0 - 2.0 * p.p_z - 2.0 * p.p_y), clamp0(1.0 - 2.0 * p.p_x - 2.0 * p.p_y),
          clamp0(1.0 - 2.0 * p.p_x - 2.0 * p.p_z)};
}

double readout_weight(const NoiseParams& p, std::size_t check) {
  const double w = 1.0 - 2.0 * p.q_eff(check);
  return w < 0.0 ? 0.0 : w;
}

Couplings couplings_from_rates(const NoiseParams& p) {
  p.validate();
  const double xy = 1.0 - 2.0 * p.p_x - 2.0 * p.p_y;
  const double zy = 1.0 - 2.0 * p.p_z - 2.0 * p.p_y;
  const double xz = 1.0 - 2.0 * p.p_x - 2.0 * p.p_z;
  if (!(xy > 0.0)) throw ValidationError("regime violation: p_x + p_y = 1/2 gives an infinite coupling");
  if (!(zy > 0.0)) throw ValidationError("regime violation: p_y + p_z = 1/2 gives an infinite coupling");
  if (!(xz > 0.0)) throw ValidationError("regime violation: p_x + p_z = 1/2 gives an infinite coupling");
  const double a = 0.0;
  const double b = std::log(xy);  // weight when only the z-parity is odd
  const double c = std::log(zy);  // only the x-parity odd
  const double d = std::log(xz);  // both odd
  Couplings out;
  out.J_z = 0.25 * (a + b - c - d);
  out.J_x = 0.25 * (a - b + c - d);
  out.J_y = 0.25 * (a - b - c + d);
  out.log_offset = 0.25 * (a + b + c + d);

  auto mu_of = [&p](double q, const std::string& name) {
    const double w = 1.0 - 2.0 * effective_readout_rate(q, p.lambda);
    if (!(w > 0.0)) throw ValidationError("regime violation: " + name + " = 1/2 gives an infinite coupling");
    return -std::log(w);
  };
  out.mu_q = mu_of(p.q, "q");
  for (std::size_t i = 0; i < p.q_per_check.size(); ++i) {
    out.mu_q_per_check.push_back(mu_of(p.q_per_check[i], "q of check " + std::to_string(i)));
  }
  return out;
}

}  // namespace syndromestat
