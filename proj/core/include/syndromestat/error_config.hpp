#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "syndromestat/codes.hpp"
#include "syndromestat/lattice_model.hpp"
#include "syndromestat/noise.hpp"

namespace syndromestat {

/// Physical errors b_t and readout flips eps_t for rounds t = 1..T (stored 0-based).
struct ErrorConfig {
  std::vector<PauliWord> b;
  std::vector<BitVector> eps;

  static ErrorConfig identity(const CodeSpec& code, int T);
  int T() const { return static_cast<int>(b.size()); }
  /// Cumulative error sum_t b_t (phase dropped).
  PauliWord cumulative() const;
};

/// True final syndrome m_T plus the recorded outcomes m'_t = m_t + eps_t.
struct SyndromeRecord {
  BitVector m_final;
  std::vector<BitVector> m_noisy;

  int T() const { return static_cast<int>(m_noisy.size()); }
  /// "m'_1|...|m'_T;m_T" as bit strings.
  std::string key() const;
  std::uint64_t hash() const;
  bool operator==(const SyndromeRecord& o) const = default;
};

/// Record <-> integer index: bit (t-1)*I + i is m'_(t,i), bit T*I + i is m_(T,i).
std::uint64_t record_index(const SyndromeRecord& rec);
SyndromeRecord record_from_index(std::uint64_t index, std::size_t I, int T);

struct ErrorConfigOptions {
  /// eps_T = 0. Defaults on for decoding; the duality check turns it off.
  bool perfect_final_round = true;
  /// Optional per-round parameters (exactly T entries when set).
  std::vector<NoiseParams> step_params;
  double budget = 0.0;  // 0 means default_budget()
};

/// Probability of one configuration.
double config_probability(const ErrorConfig& cfg, const CodeSpec& code, const NoiseParams& params,
                          const ErrorConfigOptions& options = {});

SyndromeRecord syndrome_of(const ErrorConfig& cfg, const CodeSpec& code);

/// Deterministic configuration reproducing a record: b_1 = error_with_syndrome(m_T), other b_t = 1,
/// eps_t = m'_t + m_T. Throws ValidationError when no configuration can produce the record.
ErrorConfig reference_config(const CodeSpec& code, const SyndromeRecord& rec, bool perfect_final_round);

/// Joint distribution Pr(record, kappa) over every record, index record_index | kappa << (I (T+1)).
/// kappa is the class of the cumulative error relative to error_with_syndrome(m_T).
struct JointDistribution {
  std::size_t I = 0;
  int T = 0;
  std::size_t two_k = 0;
  std::vector<double> prob;

  std::size_t record_bits() const { return I * static_cast<std::size_t>(T + 1); }
  std::size_t num_records() const { return std::size_t{1} << record_bits(); }
  std::size_t num_sectors() const { return std::size_t{1} << two_k; }
  double at(std::uint64_t record, std::uint64_t kappa) const { return prob[record | (kappa << record_bits())]; }
  double record_probability(std::uint64_t record) const;
};

JointDistribution joint_distribution(const CodeSpec& code, const NoiseParams& params, int T,
                                     const ErrorConfigOptions& options = {});

/// Z'(record, kappa) for all 2^(2K) sectors, kappa relative to reference_config(record).
std::vector<double> z_prime(const CodeSpec& code, const NoiseParams& params, const SyndromeRecord& rec,
                            const ErrorConfigOptions& options = {});

/// Same quantity by brute force over every b configuration, with sectors measured relative to the
/// cumulative error of `reference` (which must reproduce the record).
std::vector<double> z_prime_direct(const CodeSpec& code, const NoiseParams& params, const SyndromeRecord& rec,
                                   const ErrorConfig& reference, const ErrorConfigOptions& options = {});

struct RecordPosterior {
  std::uint64_t record = 0;
  double probability = 0.0;
  std::vector<double> posterior;
};

struct MLStatistics {
  double delta_bar = 0.0;
  /// H(kappa | record) in nats.
  double conditional_entropy = 0.0;
  /// K log 2 - H, the n -> 1 coherent information.
  double coherent_information = 0.0;
  double total_probability = 0.0;
  /// Filled only when requested.
  std::vector<RecordPosterior> per_record;
};

MLStatistics ml_statistics(const JointDistribution& joint, std::size_t K, bool keep_records = false);
MLStatistics ml_statistics(const CodeSpec& code, const NoiseParams& params, int T,
                           const ErrorConfigOptions& options = {}, bool keep_records = false);

/// log sum_(rec,kappa) Pr^n and log sum_rec Pr^n.
double log_power_sum_joint(const JointDistribution& joint, int n);
double log_power_sum_records(const JointDistribution& joint, int n);

struct DualityReport {
  /// Max |lhs - rhs| / lhs over records with lhs > 0.
  double max_relative_deviation = 0.0;
  /// Max |rhs| over records with lhs = 0.
  double max_zero_record_deviation = 0.0;
  double total_probability = 0.0;
  /// |log(sum Pr^n) - log(normalized Z_n)| for n = 2 via the single-flavor square and for n = 2, 3
  /// via the multi-flavor engine.
  double plancherel_square_deviation = 0.0;
  double power_sum_deviation_n2 = 0.0;
  double power_sum_deviation_n3 = 0.0;
  std::size_t num_records = 0;
};

/// Compares the record distribution from error configurations with the Fourier transform of the
/// single-flavor Boltzmann weights, record by record.
DualityReport fourier_duality_check(const CodeSpec& code, const NoiseParams& params, int T,
                                    const ErrorConfigOptions& options = {});

/// Accepts a list of records or {"records": [...]}, each {"m_final": "0101", "m_noisy": ["...", ...]}.
std::vector<SyndromeRecord> parse_records_json(const std::string& text, const CodeSpec& code);

/// Posterior Pr(kappa | record) per record (zeros when the record has probability zero).
std::vector<std::vector<double>> decode_records(const CodeSpec& code, const NoiseParams& params,
                                                const std::vector<SyndromeRecord>& records,
                                                const ErrorConfigOptions& options = {});

/// CSV with header record_hash,sector,probability.
std::string decoder_csv(const std::vector<SyndromeRecord>& records, const std::vector<std::vector<double>>& posteriors,
                        std::size_t two_k);

}  // namespace syndromestat
