#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "syndromestat/codes.hpp"
#include "syndromestat/error_config.hpp"
#include "syndromestat/errors.hpp"
#include "syndromestat/exact.hpp"

using namespace syndromestat;

namespace {

NoiseParams rates(double px, double py, double pz, double q) {
  NoiseParams p;
  p.p_x = px;
  p.p_y = py;
  p.p_z = pz;
  p.q = q;
  return p;
}

ErrorConfigOptions noisy_final() {
  ErrorConfigOptions o;
  o.perfect_final_round = false;
  return o;
}

PauliWord random_pauli(std::mt19937_64& rng, std::size_t n) {
  PauliWord w(n);
  for (std::size_t r = 0; r < n; ++r) {
    w.x().set(r, rng() % 3 == 0);
    w.z().set(r, rng() % 3 == 0);
  }
  return w;
}

ErrorConfig random_config(std::mt19937_64& rng, const CodeSpec& code, int T, bool perfect_final) {
  ErrorConfig c = ErrorConfig::identity(code, T);
  for (int t = 0; t < T; ++t) {
    c.b[static_cast<std::size_t>(t)] = random_pauli(rng, code.num_qubits());
    if (perfect_final && t == T - 1) continue;
    for (std::size_t i = 0; i < code.num_checks(); ++i) c.eps[static_cast<std::size_t>(t)].set(i, rng() % 4 == 0);
  }
  return c;
}

const double kLog2 = std::log(2.0);

}  // namespace

TEST(ConfigProbability, IdentityConfig) {
  const auto code = build_repetition(1, 3);
  const auto np = rates(0.1, 0.02, 0.03, 0.07);
  const int T = 2;
  const double expect = std::pow(1 - 0.15, 3 * T) * std::pow(1 - 0.07, 3 * T);
  EXPECT_NEAR(config_probability(ErrorConfig::identity(code, T), code, np, noisy_final()), expect, 1e-15);
  // With a noiseless final readout the last round carries no readout factor.
  EXPECT_NEAR(config_probability(ErrorConfig::identity(code, T), code, np), expect / std::pow(1 - 0.07, 3), 1e-15);
}

TEST(ConfigProbability, SingleBitFlip) {
  const auto code = build_repetition(1, 3);
  const double p = 0.1, q = 0.05;
  auto c = ErrorConfig::identity(code, 1);
  c.b[0] = PauliWord::from_string("IXI");
  EXPECT_NEAR(config_probability(c, code, rates(p, 0, 0, q), noisy_final()), p * (1 - p) * (1 - p) * std::pow(1 - q, 3),
              1e-16);
}

TEST(ConfigProbability, ReadoutFlipOnPerfectRoundIsImpossible) {
  const auto code = build_repetition(1, 3);
  auto c = ErrorConfig::identity(code, 1);
  c.eps[0].set(1);
  EXPECT_EQ(config_probability(c, code, rates(0.1, 0, 0, 0.1)), 0.0);
}

TEST(SyndromeOf, Examples) {
  const auto code = build_repetition(1, 3);
  const auto zero = syndrome_of(ErrorConfig::identity(code, 2), code);
  EXPECT_TRUE(zero.m_final.none());
  for (const auto& m : zero.m_noisy) EXPECT_TRUE(m.none());

  // Qubit r sits in checks r-1 and r (check i = Z_i Z_(i+1)).
  auto c = ErrorConfig::identity(code, 1);
  c.b[0] = PauliWord::from_string("IXI");
  EXPECT_EQ(syndrome_of(c, code).m_final, BitVector::from_string("110"));

  const auto toric = build_toric(2);
  auto s = ErrorConfig::identity(toric, 1);
  s.b[0] = toric.check(5);
  EXPECT_TRUE(syndrome_of(s, toric).m_final.none());
}

TEST(RecordIndex, RoundTrips) {
  std::mt19937_64 rng(4);
  const auto code = build_toric(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_config(rng, code, 2, false);
    const auto rec = syndrome_of(c, code);
    EXPECT_EQ(record_from_index(record_index(rec), code.num_checks(), 2), rec);
  }
}

TEST(ReferenceConfig, ReproducesRecord) {
  std::mt19937_64 rng(8);
  const auto code = build_xzzx(2);
  for (bool perfect : {false, true}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto c = random_config(rng, code, 3, perfect);
      const auto rec = syndrome_of(c, code);
      EXPECT_EQ(syndrome_of(reference_config(code, rec, perfect), code), rec);
    }
  }
  SyndromeRecord bad{BitVector::from_string("0000"), {BitVector::from_string("0000"), BitVector::from_string("1100")}};
  EXPECT_THROW(reference_config(code, bad, true), ValidationError);
}

TEST(ZPrime, ZeroNoiseConcentratesOnTrivialClass) {
  const auto code = build_toric(2);
  SyndromeRecord rec{BitVector(8), {BitVector(8)}};
  const auto z = z_prime(code, rates(1e-9, 0, 1e-9, 1e-9), rec);
  double total = 0;
  for (double v : z) total += v;
  EXPECT_GT(z[0] / total, 1 - 1e-6);
}

TEST(ZPrime, SingleFlipSectorWeights) {
  const auto code = build_repetition(1, 3);
  const double p = 0.2;
  SyndromeRecord rec{BitVector::from_string("110"), {BitVector::from_string("110")}};
  const auto z = z_prime(code, rates(p, 0, 0, 0), rec);
  ASSERT_EQ(z.size(), 4u);
  // Reference error X_1 (weight p(1-p)^2); the complementary class is X_0 X_2 (p^2 (1-p)).
  const auto ref = reference_config(code, rec, true);
  const auto cls = logical_class(code, ref.cumulative()) ^ logical_class(code, PauliWord::from_string("IXI"));
  const std::size_t trivial = cls.none() ? 0 : 1;
  std::vector<double> sorted(z.begin(), z.end());
  EXPECT_NEAR(z[trivial] + z[trivial ^ 1], p * (1 - p) * (1 - p) + p * p * (1 - p), 1e-15);
  EXPECT_NEAR(std::max(z[0], z[1]), p * (1 - p) * (1 - p), 1e-15);
  EXPECT_NEAR(std::min(z[0], z[1]), p * p * (1 - p), 1e-15);
  EXPECT_EQ(z[2] + z[3], 0.0);
}

TEST(ZPrime, MatchesBruteForceForAnyReference) {
  std::mt19937_64 rng(15);
  const auto code = build_repetition(1, 3);
  const auto np = rates(0.08, 0.05, 0.1, 0.12);
  const int T = 2;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_config(rng, code, T, true);
    const auto rec = syndrome_of(c, code);
    const auto fast = z_prime(code, np, rec);
    const auto slow = z_prime_direct(code, np, rec, c);
    // Sectors of the brute force are relative to c; the fast route uses reference_config.
    const auto ref = reference_config(code, rec, true);
    std::uint64_t shift = 0;
    const auto d = logical_class(code, c.cumulative()) ^ logical_class(code, ref.cumulative());
    for (int b : d.ones()) shift |= std::uint64_t{1} << b;
    for (std::size_t k = 0; k < fast.size(); ++k) {
      EXPECT_NEAR(slow[k], fast[k ^ shift], 1e-15) << "trial " << trial << " sector " << k;
    }
  }
}

TEST(ZPrime, GaugeShiftOfTheReferenceIsExact) {
  std::mt19937_64 rng(16);
  const auto code = build_toric(2);
  const auto np = rates(0.05, 0.02, 0.1, 0.1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_config(rng, code, 1, true);
    const auto rec = syndrome_of(c, code);
    auto shifted = c;
    shifted.b[0] = multiply(shifted.b[0], code.check(rng() % code.num_checks()));
    shifted.b[0].set_phase(0);
    EXPECT_EQ(z_prime_direct(code, np, rec, c), z_prime_direct(code, np, rec, shifted));
  }
}

TEST(ErrorRelation, ConsistentConfigsDifferByClosedChains) {
  std::mt19937_64 rng(23);
  const auto code = build_repetition(1, 3);
  const int T = 2;
  std::map<std::uint64_t, std::vector<ErrorConfig>> by_record;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto c = random_config(rng, code, T, false);
    by_record[record_index(syndrome_of(c, code))].push_back(c);
  }
  int pairs = 0;
  for (const auto& [rec, cs] : by_record) {
    for (std::size_t a = 1; a < cs.size(); ++a) {
      PauliWord diff(code.num_qubits());
      for (int t = 0; t < T; ++t) {
        diff = multiply(diff, multiply(cs[0].b[static_cast<std::size_t>(t)], cs[a].b[static_cast<std::size_t>(t)]));
        EXPECT_EQ(syndrome_of_error(code, diff), cs[0].eps[static_cast<std::size_t>(t)] ^ cs[a].eps[static_cast<std::size_t>(t)]);
      }
      ++pairs;
    }
  }
  EXPECT_GT(pairs, 100);
}

TEST(JointDistribution, IsNormalizedAndMatchesBruteForce) {
  const auto code = build_repetition(1, 3);
  const auto np = rates(0.1, 0.03, 0.05, 0.08);
  const int T = 2;
  const auto jd = joint_distribution(code, np, T, noisy_final());
  double total = 0;
  for (double v : jd.prob) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Brute force over every configuration.
  std::vector<double> brute(jd.prob.size(), 0.0);
  const std::size_t N = code.num_qubits(), I = code.num_checks();
  const std::uint64_t nb = std::uint64_t{1} << (2 * N * T), ne = std::uint64_t{1} << (I * T);
  for (std::uint64_t bi = 0; bi < nb; ++bi) {
    for (std::uint64_t ei = 0; ei < ne; ++ei) {
      auto c = ErrorConfig::identity(code, T);
      for (int t = 0; t < T; ++t) {
        for (std::size_t r = 0; r < N; ++r) {
          const auto bits = bi >> (2 * (N * static_cast<std::size_t>(t) + r));
          c.b[static_cast<std::size_t>(t)].x().set(r, bits & 1);
          c.b[static_cast<std::size_t>(t)].z().set(r, (bits >> 1) & 1);
        }
        for (std::size_t i = 0; i < I; ++i) c.eps[static_cast<std::size_t>(t)].set(i, (ei >> (I * static_cast<std::size_t>(t) + i)) & 1);
      }
      const auto rec = syndrome_of(c, code);
      const auto ref = reference_config(code, rec, false);
      const auto cls = logical_class(code, c.cumulative()) ^ logical_class(code, ref.cumulative());
      std::uint64_t k = 0;
      for (int b : cls.ones()) k |= std::uint64_t{1} << b;
      brute[record_index(rec) | (k << jd.record_bits())] += config_probability(c, code, np, noisy_final());
    }
  }
  for (std::size_t i = 0; i < brute.size(); ++i) EXPECT_NEAR(jd.prob[i], brute[i], 1e-15);
}

TEST(MLStatistics, NoiselessIsTrivial) {
  const auto st = ml_statistics(build_toric(2), rates(0, 0, 0, 0), 1);
  EXPECT_EQ(st.delta_bar, 0.0);
  EXPECT_EQ(st.conditional_entropy, 0.0);
  EXPECT_NEAR(st.coherent_information, 2 * kLog2, 1e-15);
}

TEST(MLStatistics, MaximalBitFlipsGiveOneBitOfUncertainty) {
  const auto st = ml_statistics(build_repetition(1, 3), rates(0.5, 0, 0, 0), 1);
  EXPECT_NEAR(st.delta_bar, 0.5, 1e-14);
  EXPECT_NEAR(st.conditional_entropy, kLog2, 1e-14);
}

TEST(MLStatistics, BoundHoldsAlongSweep) {
  for (int k = 1; k <= 9; ++k) {
    const double p = 0.05 * k;
    const auto st = ml_statistics(build_repetition(1, 3), rates(p, 0, 0, 0.05), 2);
    EXPECT_LE(st.delta_bar, st.conditional_entropy) << "p=" << p;
    EXPECT_NEAR(st.total_probability, 1.0, 1e-12);
  }
}

TEST(Duality, NoiselessIsUnitMassOnZeroRecord) {
  const auto code = build_repetition(1, 3);
  const auto jd = joint_distribution(code, rates(0, 0, 0, 0), 2, noisy_final());
  EXPECT_EQ(jd.record_probability(0), 1.0);
  const auto r = fourier_duality_check(code, rates(0, 0, 0, 0), 2, noisy_final());
  EXPECT_LE(r.max_relative_deviation, 1e-12);
  EXPECT_LE(r.max_zero_record_deviation, 1e-12);
}

TEST(Duality, RepetitionTwoRounds) {
  const auto r = fourier_duality_check(build_repetition(1, 3), rates(0.15, 0, 0, 0.1), 2, noisy_final());
  EXPECT_LE(r.max_relative_deviation, 1e-10);
  EXPECT_LE(r.power_sum_deviation_n2, 1e-10);
  EXPECT_LE(r.power_sum_deviation_n3, 1e-10);
}

TEST(Duality, ToricPlancherel) {
  const auto r = fourier_duality_check(build_toric(2), rates(0, 0, 0.2, 0), 1, noisy_final());
  EXPECT_LE(r.max_relative_deviation, 1e-10);
  EXPECT_LE(r.max_zero_record_deviation, 1e-12);
  EXPECT_LE(r.plancherel_square_deviation, 1e-10);
  EXPECT_NEAR(r.total_probability, 1.0, 1e-12);
}

TEST(Duality, PowerSumsMatchPartitionFunctionsDirectly) {
  // With a noiseless last readout m_T is part of the record, so sum_records Pr^n is Tr rho_M^n,
  // the boundary-field partition function.
  const auto code = build_repetition(1, 3);
  const auto np = rates(0.1, 0.04, 0.02, 0.12);
  const int T = 2;
  const auto jd = joint_distribution(code, np, T);
  ModelOptions mo;
  mo.perfect_final_round = true;
  for (int n : {2, 3}) {
    EXPECT_NEAR(log_power_sum_records(jd, n), log_trace_rho_m(code, np, T, n, mo), 1e-10);
  }
}

TEST(Records, ParseAndDecode) {
  const auto code = build_repetition(1, 3);
  const std::string doc = R"({"records": [{"m_final": "110", "m_noisy": ["100", "110"]},
                                          {"m_final": [0, 0, 0], "m_noisy": [[0, 0, 0], [0, 0, 0]]}]})";
  const auto recs = parse_records_json(doc, code);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].m_noisy[0], BitVector::from_string("100"));
  const auto post = decode_records(code, rates(0.1, 0, 0, 0.1), recs);
  for (const auto& p : post) {
    double s = 0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  const auto csv = decoder_csv(recs, post, 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "record_hash,sector,probability");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 4);
  EXPECT_THROW(parse_records_json(R"({"records": [{"m_final": "11"}]})", code), ValidationError);
}
