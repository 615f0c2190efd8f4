#include "syndromestat/error_config.hpp"

#include <quadmath.h>

#include <array>
#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>

#include "syndromestat/errors.hpp"
#include "syndromestat/exact.hpp"
#include "syndromestat/io.hpp"

namespace syndromestat {

namespace {

using quad = __float128;

constexpr int kMaxJointBits = 28;

const NoiseParams& round_params(const NoiseParams& params, const ErrorConfigOptions& opt, int t) {
  return opt.step_params.empty() ? params : opt.step_params[static_cast<std::size_t>(t)];
}

void validate_inputs(const CodeSpec& code, const NoiseParams& params, int T, const ErrorConfigOptions& opt) {
  if (T < 1) throw ValidationError("T must be at least 1");
  if (!opt.step_params.empty() && opt.step_params.size() != static_cast<std::size_t>(T)) {
    throw ValidationError("per-round overrides must list exactly T parameter sets");
  }
  for (int t = 0; t < T; ++t) {
    const NoiseParams& p = round_params(params, opt, t);
    p.validate();
    if (!p.q_per_check.empty() && p.q_per_check.size() != code.num_checks()) {
      throw ValidationError("per-check readout rates need one entry per check");
    }
  }
}

double budget_of(const ErrorConfigOptions& opt) { return opt.budget > 0.0 ? opt.budget : default_budget(); }

std::uint64_t bits_to_index(const BitVector& v) {
  std::uint64_t out = 0;
  for (int i : v.ones()) out |= std::uint64_t{1} << i;
  return out;
}

PauliWord single_qubit(std::size_t n, std::size_t r, char letter) {
  PauliWord p(n);
  if (letter == 'X' || letter == 'Y') p.x().set(r);
  if (letter == 'Z' || letter == 'Y') p.z().set(r);
  return p;
}

double letter_rate(const NoiseParams& p, char letter) {
  switch (letter) {
    case 'X':
      return p.p_x;
    case 'Y':
      return p.p_y;
    case 'Z':
      return p.p_z;
    default:
      return 1.0 - p.p_total();
  }
}

/// Class of a single-qubit error relative to the reference for its own syndrome.
BitVector relative_class(const CodeSpec& code, const PauliWord& e) {
  const BitVector s = syndrome_of_error(code, e);
  const auto ref = error_with_syndrome(code, s);
  return logical_class(code, e) ^ logical_class(code, *ref);
}

void xor_convolve(std::vector<double>& v, std::vector<double>& scratch, const std::vector<std::uint64_t>& masks,
                  const std::vector<double>& probs) {
  const std::size_t S = v.size();
  for (std::size_t x = 0; x < S; ++x) {
    double acc = 0.0;
    for (std::size_t o = 0; o < masks.size(); ++o) {
      if (probs[o] != 0.0) acc += probs[o] * v[x ^ masks[o]];
    }
    scratch[x] = acc;
  }
  v.swap(scratch);
}

void wht(std::vector<quad>& a) {
  const std::size_t n = a.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const quad x = a[j];
        const quad y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
    }
  }
}

}  // namespace

ErrorConfig ErrorConfig::identity(const CodeSpec& code, int T) {
  ErrorConfig cfg;
  for (int t = 0; t < T; ++t) {
    cfg.b.emplace_back(code.num_qubits());
    cfg.eps.emplace_back(code.num_checks());
  }
  return cfg;
}

PauliWord ErrorConfig::cumulative() const {
  PauliWord e(b.empty() ? 0 : b.front().num_qubits());
  for (const auto& w : b) {
    e.x() ^= w.x();
    e.z() ^= w.z();
  }
  return e;
}

std::string SyndromeRecord::key() const {
  std::string out;
  for (std::size_t t = 0; t < m_noisy.size(); ++t) {
    if (t) out += '|';
    out += m_noisy[t].str();
  }
  out += ';';
  out += m_final.str();
  return out;
}

std::uint64_t SyndromeRecord::hash() const { return fnv1a(key()); }

std::uint64_t record_index(const SyndromeRecord& rec) {
  const std::size_t I = rec.m_final.size();
  if (I * static_cast<std::size_t>(rec.T() + 1) > 62) throw SizeError("record too long to index", INFINITY);
  std::uint64_t idx = 0;
  for (int t = 0; t < rec.T(); ++t) idx |= bits_to_index(rec.m_noisy[static_cast<std::size_t>(t)]) << (t * I);
  idx |= bits_to_index(rec.m_final) << (static_cast<std::size_t>(rec.T()) * I);
  return idx;
}

SyndromeRecord record_from_index(std::uint64_t index, std::size_t I, int T) {
  SyndromeRecord rec;
  auto slice = [&](std::size_t offset) {
    BitVector v(I);
    for (std::size_t i = 0; i < I; ++i) {
      if ((index >> (offset + i)) & 1u) v.set(i);
    }
    return v;
  };
  for (int t = 0; t < T; ++t) rec.m_noisy.push_back(slice(static_cast<std::size_t>(t) * I));
  rec.m_final = slice(static_cast<std::size_t>(T) * I);
  return rec;
}

double config_probability(const ErrorConfig& cfg, const CodeSpec& code, const NoiseParams& params,
                          const ErrorConfigOptions& options) {
  const int T = cfg.T();
  if (cfg.eps.size() != cfg.b.size()) throw DimensionError("b and eps must both have T entries");
  validate_inputs(code, params, T, options);
  double prob = 1.0;
  for (int t = 0; t < T; ++t) {
    const NoiseParams& p = round_params(params, options, t);
    const PauliWord& b = cfg.b[static_cast<std::size_t>(t)];
    const BitVector& eps = cfg.eps[static_cast<std::size_t>(t)];
    if (b.num_qubits() != code.num_qubits()) throw DimensionError("error word has the wrong number of qubits");
    if (eps.size() != code.num_checks()) throw DimensionError("readout flips need one bit per check");
    for (std::size_t r = 0; r < code.num_qubits(); ++r) prob *= letter_rate(p, b.at(r));
    const bool perfect = options.perfect_final_round && t == T - 1;
    for (std::size_t i = 0; i < code.num_checks(); ++i) {
      if (perfect) {
        if (eps.get(i)) return 0.0;
        continue;
      }
      const double q = p.q_eff(i);
      prob *= eps.get(i) ? q : 1.0 - q;
    }
  }
  return prob;
}

SyndromeRecord syndrome_of(const ErrorConfig& cfg, const CodeSpec& code) {
  SyndromeRecord rec;
  BitVector m(code.num_checks());
  for (std::size_t t = 0; t < cfg.b.size(); ++t) {
    m ^= syndrome_of_error(code, cfg.b[t]);
    rec.m_noisy.push_back(m ^ cfg.eps[t]);
  }
  rec.m_final = m;
  return rec;
}

ErrorConfig reference_config(const CodeSpec& code, const SyndromeRecord& rec, bool perfect_final_round) {
  const int T = rec.T();
  if (T < 1) throw ValidationError("record must have at least one round");
  if (rec.m_final.size() != code.num_checks()) throw DimensionError("m_final needs one bit per check");
  for (const auto& m : rec.m_noisy) {
    if (m.size() != code.num_checks()) throw DimensionError("m_noisy entries need one bit per check");
  }
  const auto ref = error_with_syndrome(code, rec.m_final);
  if (!ref) throw ValidationError("final syndrome " + rec.m_final.str() + " is not produced by any Pauli error");
  if (perfect_final_round && !(rec.m_noisy.back() == rec.m_final)) {
    throw ValidationError("with a perfect final round the last recorded syndrome must equal m_final");
  }
  ErrorConfig cfg = ErrorConfig::identity(code, T);
  cfg.b[0] = *ref;
  cfg.b[0].set_phase(0);
  for (int t = 0; t < T; ++t) cfg.eps[static_cast<std::size_t>(t)] = rec.m_noisy[static_cast<std::size_t>(t)] ^ rec.m_final;
  return cfg;
}

double JointDistribution::record_probability(std::uint64_t record) const {
  double s = 0.0;
  for (std::uint64_t k = 0; k < num_sectors(); ++k) s += at(record, k);
  return s;
}

JointDistribution joint_distribution(const CodeSpec& code, const NoiseParams& params, int T,
                                     const ErrorConfigOptions& options) {
  validate_inputs(code, params, T, options);
  JointDistribution jd;
  jd.I = code.num_checks();
  jd.T = T;
  jd.two_k = 2 * code.num_logical();
  const std::size_t RB = jd.record_bits();
  const std::size_t bits = RB + jd.two_k;
  const double sources = static_cast<double>(code.num_qubits() + code.num_checks()) * T;
  if (bits > static_cast<std::size_t>(kMaxJointBits)) {
    throw SizeError("joint record distribution over " + std::to_string(bits) + " bits exceeds the memory cap",
                    std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(bits, 1000))) * sources);
  }
  const double required = std::ldexp(1.0, static_cast<int>(bits)) * sources;
  if (required > budget_of(options)) {
    throw SizeError("error-configuration enumeration needs " + std::to_string(required) + " steps, budget is " +
                        std::to_string(budget_of(options)),
                    required);
  }

  // Per qubit and letter: syndrome bits and class bits.
  const std::size_t N = code.num_qubits();
  const char letters[3] = {'X', 'Y', 'Z'};
  std::vector<std::array<std::uint64_t, 3>> synd(N);
  std::vector<std::array<std::uint64_t, 3>> cls(N);
  for (std::size_t r = 0; r < N; ++r) {
    for (int l = 0; l < 3; ++l) {
      const PauliWord e = single_qubit(N, r, letters[l]);
      synd[r][static_cast<std::size_t>(l)] = bits_to_index(syndrome_of_error(code, e));
      cls[r][static_cast<std::size_t>(l)] = bits_to_index(relative_class(code, e));
    }
  }

  jd.prob.assign(std::size_t{1} << bits, 0.0);
  jd.prob[0] = 1.0;
  std::vector<double> scratch(jd.prob.size());
  std::vector<std::uint64_t> masks(4);
  std::vector<double> probs(4);
  for (int t = 0; t < T; ++t) {
    const NoiseParams& p = round_params(params, options, t);
    for (std::size_t r = 0; r < N; ++r) {
      masks[0] = 0;
      probs[0] = 1.0 - p.p_total();
      for (int l = 0; l < 3; ++l) {
        const std::uint64_t s = synd[r][static_cast<std::size_t>(l)];
        std::uint64_t mask = 0;
        for (int tau = t; tau <= T; ++tau) mask |= s << (static_cast<std::size_t>(tau) * jd.I);
        mask |= cls[r][static_cast<std::size_t>(l)] << RB;
        masks[static_cast<std::size_t>(l) + 1] = mask;
        probs[static_cast<std::size_t>(l) + 1] = letter_rate(p, letters[l]);
      }
      if (probs[0] == 1.0) continue;
      xor_convolve(jd.prob, scratch, masks, probs);
    }
    if (options.perfect_final_round && t == T - 1) continue;
    for (std::size_t i = 0; i < jd.I; ++i) {
      const double q = p.q_eff(i);
      if (q == 0.0) continue;
      const std::vector<std::uint64_t> m2 = {0, std::uint64_t{1} << (static_cast<std::size_t>(t) * jd.I + i)};
      const std::vector<double> p2 = {1.0 - q, q};
      xor_convolve(jd.prob, scratch, m2, p2);
    }
  }
  return jd;
}

std::vector<double> z_prime(const CodeSpec& code, const NoiseParams& params, const SyndromeRecord& rec,
                            const ErrorConfigOptions& options) {
  reference_config(code, rec, options.perfect_final_round);
  const JointDistribution jd = joint_distribution(code, params, rec.T(), options);
  const std::uint64_t idx = record_index(rec);
  std::vector<double> out(jd.num_sectors());
  for (std::uint64_t k = 0; k < jd.num_sectors(); ++k) out[k] = jd.at(idx, k);
  return out;
}

std::vector<double> z_prime_direct(const CodeSpec& code, const NoiseParams& params, const SyndromeRecord& rec,
                                   const ErrorConfig& reference, const ErrorConfigOptions& options) {
  const int T = rec.T();
  validate_inputs(code, params, T, options);
  if (!(syndrome_of(reference, code) == rec)) throw ValidationError("reference configuration does not reproduce the record");
  const std::size_t N = code.num_qubits();
  const std::size_t sites = N * static_cast<std::size_t>(T);
  if (2 * sites > 62) throw SizeError("direct enumeration is out of reach", INFINITY);
  const double required = std::ldexp(1.0, static_cast<int>(2 * sites)) * static_cast<double>(sites);
  if (required > budget_of(options)) {
    throw SizeError("direct error enumeration needs " + std::to_string(required) + " steps", required);
  }
  const BitVector ref_class = logical_class(code, reference.cumulative());
  std::vector<double> out(std::size_t{1} << (2 * code.num_logical()), 0.0);
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const std::uint64_t total = std::uint64_t{1} << (2 * sites);
  ErrorConfig cfg = ErrorConfig::identity(code, T);
  for (std::uint64_t c = 0; c < total; ++c) {
    for (int t = 0; t < T; ++t) {
      PauliWord w(N);
      for (std::size_t r = 0; r < N; ++r) {
        const char l = letters[(c >> (2 * (static_cast<std::size_t>(t) * N + r))) & 3u];
        if (l == 'X' || l == 'Y') w.x().set(r);
        if (l == 'Z' || l == 'Y') w.z().set(r);
      }
      cfg.b[static_cast<std::size_t>(t)] = std::move(w);
    }
    BitVector m(code.num_checks());
    for (int t = 0; t < T; ++t) {
      m ^= syndrome_of_error(code, cfg.b[static_cast<std::size_t>(t)]);
      cfg.eps[static_cast<std::size_t>(t)] = m ^ rec.m_noisy[static_cast<std::size_t>(t)];
    }
    if (!(m == rec.m_final)) continue;
    const double p = config_probability(cfg, code, params, options);
    if (p == 0.0) continue;
    const BitVector k = logical_class(code, cfg.cumulative()) ^ ref_class;
    out[bits_to_index(k)] += p;
  }
  return out;
}

MLStatistics ml_statistics(const JointDistribution& jd, std::size_t K, bool keep_records) {
  MLStatistics st;
  double sum_max = 0.0;
  for (std::uint64_t rec = 0; rec < jd.num_records(); ++rec) {
    double pr = 0.0;
    double mx = 0.0;
    for (std::uint64_t k = 0; k < jd.num_sectors(); ++k) {
      const double v = jd.at(rec, k);
      pr += v;
      mx = std::max(mx, v);
    }
    if (pr <= 0.0) continue;
    st.total_probability += pr;
    sum_max += mx;
    for (std::uint64_t k = 0; k < jd.num_sectors(); ++k) {
      const double v = jd.at(rec, k);
      if (v > 0.0) st.conditional_entropy -= v * std::log(v / pr);
    }
    if (keep_records) {
      RecordPosterior rp{rec, pr, {}};
      for (std::uint64_t k = 0; k < jd.num_sectors(); ++k) rp.posterior.push_back(jd.at(rec, k) / pr);
      st.per_record.push_back(std::move(rp));
    }
  }
  st.delta_bar = st.total_probability - sum_max;
  if (st.delta_bar < 0.0) st.delta_bar = 0.0;
  if (st.conditional_entropy < 0.0) st.conditional_entropy = 0.0;
  st.coherent_information = static_cast<double>(K) * std::log(2.0) - st.conditional_entropy;
  return st;
}

MLStatistics ml_statistics(const CodeSpec& code, const NoiseParams& params, int T, const ErrorConfigOptions& options,
                           bool keep_records) {
  return ml_statistics(joint_distribution(code, params, T, options), code.num_logical(), keep_records);
}

double log_power_sum_joint(const JointDistribution& jd, int n) {
  double s = 0.0;
  for (double v : jd.prob) {
    if (v > 0.0) s += std::pow(v, n);
  }
  return std::log(s);
}

double log_power_sum_records(const JointDistribution& jd, int n) {
  double s = 0.0;
  for (std::uint64_t rec = 0; rec < jd.num_records(); ++rec) {
    const double pr = jd.record_probability(rec);
    if (pr > 0.0) s += std::pow(pr, n);
  }
  return std::log(s);
}

DualityReport fourier_duality_check(const CodeSpec& code, const NoiseParams& params, int T,
                                    const ErrorConfigOptions& options) {
  const JointDistribution jd = joint_distribution(code, params, T, options);
  ModelOptions mo;
  mo.boundary = Boundary::Open;
  mo.perfect_final_round = options.perfect_final_round;
  mo.step_params = options.step_params;
  const SpacetimeModel model = build_single_flavor(code, params, T, mo);
  const std::size_t I = jd.I;
  const std::size_t RB = jd.record_bits();
  const std::size_t S = std::size_t{1} << RB;
  const double required = static_cast<double>(S) * static_cast<double>(model.N() + static_cast<int>(I)) * T;
  if (required > budget_of(options)) throw SizeError("Fourier side needs " + std::to_string(required) + " steps", required);

  // Boltzmann weights of every configuration of the (T+1) x I spins.
  std::vector<quad> W(S);
  for (std::size_t u = 0; u < S; ++u) {
    quad w = 1;
    for (int t = 0; t < T && w != 0; ++t) {
      const std::uint64_t layer = (u >> (static_cast<std::size_t>(t) * I)) & ((std::uint64_t{1} << I) - 1);
      const std::uint64_t next = (u >> (static_cast<std::size_t>(t + 1) * I)) & ((std::uint64_t{1} << I) - 1);
      const auto& tab = model.spatial_weights(t);
      for (int r = 0; r < model.N(); ++r) {
        const unsigned px = std::popcount(layer & model.site_x_mask(r)) & 1u;
        const unsigned pz = std::popcount(layer & model.site_z_mask(r)) & 1u;
        w *= static_cast<quad>(tab[px | (pz << 1)]);
      }
      for (std::uint64_t d = layer ^ next; d; d &= d - 1) {
        w *= static_cast<quad>(model.temporal_weight(t, std::countr_zero(d)));
      }
    }
    W[u] = w;
  }
  quad z2_single = 0;
  for (const quad& w : W) z2_single += w * w;
  std::vector<quad> F = W;
  wht(F);

  DualityReport rep;
  rep.num_records = jd.num_records();
  const std::uint64_t lowmask = (std::uint64_t{1} << I) - 1;
  const quad norm = ldexpq(1, -static_cast<int>(RB));
  double sum_sq = 0.0;
  for (std::uint64_t rec = 0; rec < jd.num_records(); ++rec) {
    // Layer sequence M_0 = 0, M_t = m'_t, M_(T+1) = m_T; d_t = M_(t+1) + M_t for t = 0..T.
    std::uint64_t d = 0;
    std::uint64_t prev = 0;
    for (int t = 0; t <= T; ++t) {
      const std::uint64_t cur = (rec >> (static_cast<std::size_t>(t) * I)) & lowmask;
      d |= (cur ^ prev) << (static_cast<std::size_t>(t) * I);
      prev = cur;
    }
    const double lhs = jd.record_probability(rec);
    const quad rhs = F[d] * norm;
    rep.total_probability += lhs;
    sum_sq += lhs * lhs;
    if (lhs > 0.0) {
      const double dev = static_cast<double>(fabsq(static_cast<quad>(lhs) - rhs) / static_cast<quad>(lhs));
      rep.max_relative_deviation = std::max(rep.max_relative_deviation, dev);
    } else {
      rep.max_zero_record_deviation = std::max(rep.max_zero_record_deviation, static_cast<double>(fabsq(rhs)));
    }
  }
  const double log2v = std::log(2.0);
  rep.plancherel_square_deviation =
      std::abs(std::log(sum_sq) - (static_cast<double>(logq(z2_single)) - static_cast<double>(RB) * log2v));
  EngineOptions eo;
  eo.budget = budget_of(options);
  for (int n : {2, 3}) {
    const double lhs = log_power_sum_records(jd, n);
    const double rhs = partition_function(model, n, eo) - (n - 1) * static_cast<double>(RB) * log2v;
    (n == 2 ? rep.power_sum_deviation_n2 : rep.power_sum_deviation_n3) = std::abs(lhs - rhs);
  }
  return rep;
}

std::vector<SyndromeRecord> parse_records_json(const std::string& text, const CodeSpec& code) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("records file is not valid JSON: ") + e.what());
  }
  if (doc.is_object()) {
    if (!doc.contains("records")) throw ValidationError("records object needs a \"records\" list");
    doc = doc.at("records");
  }
  if (!doc.is_array()) throw ValidationError("records must be a list");
  const std::size_t I = code.num_checks();
  auto read_bits = [I](const nlohmann::json& j, const std::string& what) {
    BitVector v(I);
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s.size() != I) throw DimensionError(what + " must have " + std::to_string(I) + " bits");
      for (std::size_t i = 0; i < I; ++i) {
        if (s[i] != '0' && s[i] != '1') throw ValidationError(what + " must contain only 0 and 1");
        if (s[i] == '1') v.set(i);
      }
    } else if (j.is_array()) {
      if (j.size() != I) throw DimensionError(what + " must have " + std::to_string(I) + " bits");
      for (std::size_t i = 0; i < I; ++i) {
        const int b = j[i].get<int>();
        if (b != 0 && b != 1) throw ValidationError(what + " must contain only 0 and 1");
        if (b) v.set(i);
      }
    } else {
      throw ValidationError(what + " must be a bit string or a list of bits");
    }
    return v;
  };
  std::vector<SyndromeRecord> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& e = doc[k];
    const std::string where = "record " + std::to_string(k);
    if (!e.is_object() || !e.contains("m_final") || !e.contains("m_noisy")) {
      throw ValidationError(where + " needs m_final and m_noisy");
    }
    SyndromeRecord rec;
    rec.m_final = read_bits(e.at("m_final"), where + " m_final");
    const auto& noisy = e.at("m_noisy");
    if (!noisy.is_array() || noisy.empty()) throw ValidationError(where + " m_noisy must be a non-empty list");
    for (std::size_t t = 0; t < noisy.size(); ++t) {
      rec.m_noisy.push_back(read_bits(noisy[t], where + " m_noisy[" + std::to_string(t) + "]"));
    }
    if (!out.empty() && rec.T() != out.front().T()) throw ValidationError("all records must have the same number of rounds");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::vector<double>> decode_records(const CodeSpec& code, const NoiseParams& params,
                                                const std::vector<SyndromeRecord>& records,
                                                const ErrorConfigOptions& options) {
  if (records.empty()) return {};
  const int T = records.front().T();
  for (const auto& r : records) {
    if (r.T() != T) throw ValidationError("all records must have the same number of rounds");
    if (r.m_final.size() != code.num_checks()) throw DimensionError("m_final needs one bit per check");
  }
  const JointDistribution jd = joint_distribution(code, params, T, options);
  std::vector<std::vector<double>> out;
  for (const auto& r : records) {
    const std::uint64_t idx = record_index(r);
    std::vector<double> post(jd.num_sectors(), 0.0);
    const double pr = jd.record_probability(idx);
    if (pr > 0.0) {
      for (std::uint64_t k = 0; k < jd.num_sectors(); ++k) post[k] = jd.at(idx, k) / pr;
    }
    out.push_back(std::move(post));
  }
  return out;
}

std::string decoder_csv(const std::vector<SyndromeRecord>& records, const std::vector<std::vector<double>>& posteriors,
                        std::size_t two_k) {
  std::string out = csv_row({"record_hash", "sector", "probability"});
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::string h = hex64(records[r].hash());
    for (std::size_t k = 0; k < posteriors[r].size(); ++k) {
      std::string label(two_k, '0');
      for (std::size_t b = 0; b < two_k; ++b) {
        if ((k >> b) & 1u) label[b] = '1';
      }
      out += csv_row({h, label, format_double(posteriors[r][k])});
    }
  }
  return out;
}

}  // namespace syndromestat
