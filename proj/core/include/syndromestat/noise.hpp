#pragma once

#include <array>
#include <vector>

namespace syndromestat {

/// Single-qubit Pauli channel rates plus readout noise for every check.
struct NoiseParams {
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;
  double q = 0.0;
  double lambda = 1.0;
  /// Optional per-check readout rates; overrides q when non-empty.
  std::vector<double> q_per_check;

  /// Throws ValidationError outside the physical regime.
  void validate() const;
  /// Raw readout rate of check i (before the weak-measurement reduction).
  double q_raw(std::size_t i) const { return q_per_check.empty() ? q : q_per_check.at(i); }
  /// Effective readout rate of check i including lambda.
  double q_eff(std::size_t i) const;
  double p_total() const { return p_x + p_y + p_z; }
};

/// Spin-form couplings. The exact per-site weight is
///   W(h^x, h^z) = exp(log_offset + J_z h^x + J_x h^z + J_y h^x h^z)
/// and each readout contributes exp(-mu_q |u - u'|).
struct Couplings {
  double J_x = 0.0;
  double J_y = 0.0;
  double J_z = 0.0;
  double mu_q = 0.0;
  std::vector<double> mu_q_per_check;
  double log_offset = 0.0;

  double mu(std::size_t i) const { return mu_q_per_check.empty() ? mu_q : mu_q_per_check.at(i); }
  double J_q(std::size_t i) const { return 0.5 * mu(i); }
};

/// Readout rate after the weak-measurement reduction.
double effective_readout_rate(double q, double lambda);

/// Throws ValidationError (naming the offending rate pair) when a coupling would be infinite.
Couplings couplings_from_rates(const NoiseParams& params);

/// Exact per-site weights, index (x-parity) | (z-parity) << 1 of the stabilizer word at the site:
/// {1, 1-2p_z-2p_y, 1-2p_x-2p_y, 1-2p_x-2p_z}. Entries may be zero at the regime boundary.
std::array<double, 4> site_weights(const NoiseParams& params);

/// exp(-mu_q) = 1 - 2 q_eff for check i.
double readout_weight(const NoiseParams& params, std::size_t check);

}  // namespace syndromestat
