#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "density_oracle.hpp"
#include "syndromestat/codes.hpp"
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

EngineOptions engine(ExactEngine e) {
  EngineOptions o;
  o.engine = e;
  return o;
}

const double kLog2 = std::log(2.0);

}  // namespace

TEST(PartitionFunction, FreeSpinsCountStates) {
  const CodeSpec single(1, {PauliWord::from_string("Z")});
  const auto m = build_single_flavor(single, rates(0, 0, 0, 0), 1);
  EXPECT_NEAR(partition_function(m, 2), std::log(4.0), 1e-14);
}

TEST(PartitionFunction, RepetitionLayerIsARingIsingModel) {
  const double p = 0.13;
  const auto m = build_single_flavor(build_repetition(1, 3), rates(p, 0, 0, 0), 1);
  // Layer 0: three-spin ring with bond weight a = (1-2p)^2 per broken bond; layer 1 is free.
  const double a = (1 - 2 * p) * (1 - 2 * p);
  const double ring = std::pow(1 + a, 3) + std::pow(1 - a, 3);
  for (auto e : {ExactEngine::Transfer, ExactEngine::Enumerate}) {
    EXPECT_NEAR(partition_function(m, 2, engine(e)), std::log(8 * ring), 1e-13);
  }
}

TEST(PartitionFunction, ToricMatchesDensityOracle) {
  const auto code = build_toric(2);
  const auto np = rates(0, 0, 0.1, 0.05);
  oracle::Protocol pr;
  pr.T = 1;
  const auto st = oracle::simulate(code, np, pr);
  EXPECT_NEAR(log_trace_rho_qm(code, np, 1, 2), oracle::log_trace_power(st, 2), 1e-10);
}

TEST(PartitionFunction, EnginesAgree) {
  struct Case {
    CodeSpec code;
    int T;
    int n;
  };
  for (const auto& [code, T, n] : {Case{build_repetition(1, 4), 2, 2}, Case{build_repetition(1, 4), 2, 3},
                                   Case{build_toric(2), 1, 2}, Case{build_xzzx(2), 1, 3}, Case{build_xzzx(3), 1, 2}}) {
    {
      const auto m = build_single_flavor(code, rates(0.04, 0.07, 0.11, 0.08), T);
      const double a = partition_function(m, n, engine(ExactEngine::Transfer));
      const double b = partition_function(m, n, engine(ExactEngine::Enumerate));
      EXPECT_NEAR(a, b, 1e-11 * std::abs(a)) << code.name() << " n=" << n;
    }
  }
}

TEST(PartitionFunction, EnginesAgreeWithDefectsAndSigns) {
  const auto code = build_xzzx(2);
  const auto m = build_single_flavor(code, rates(0.04, 0.07, 0.11, 0.08), 1);
  const std::vector<QubitFlips> flips = {defect_flips(code, BitVector::from_string("1000")),
                                         defect_flips(code, BitVector::from_string("1010"))};
  const auto prod = defect_flips(code, BitVector::from_string("0010"));
  const BitVector sign = syndrome_of_error(code, PauliWord::from_string("XIII"));
  for (const BitVector* s : std::vector<const BitVector*>{nullptr, &sign}) {
    const auto a = multiflavor_sum(m, 3, flips, prod, s, engine(ExactEngine::Transfer));
    const auto b = multiflavor_sum(m, 3, flips, prod, s, engine(ExactEngine::Enumerate));
    ASSERT_GT(std::abs(b.mantissa), 1e-3);
    EXPECT_NEAR(a.mantissa * std::exp(a.log_scale - b.log_scale), b.mantissa, 1e-11 * std::abs(b.mantissa));
  }
}

TEST(PartitionFunction, ThreadCountDoesNotChangeResult) {
  const auto code = build_xzzx(3);
  const auto m = build_single_flavor(code, rates(0.04, 0.07, 0.11, 0.08), 1);
  EngineOptions one = engine(ExactEngine::Enumerate);
  EngineOptions many = one;
  many.threads = 4;
  EXPECT_EQ(partition_function(m, 2, one), partition_function(m, 2, many));
}

TEST(PartitionFunction, BudgetExceededReportsRequirement) {
  const auto m = build_single_flavor(build_toric(3), rates(0.05, 0, 0.05, 0.05), 3);
  EngineOptions small;
  small.budget = 1000;
  try {
    partition_function(m, 2, small);
    FAIL() << "expected SizeError";
  } catch (const SizeError& e) {
    EXPECT_GT(e.required_budget(), 1000);
  }
}

TEST(CoherentInformation, NoiselessIsKLog2) {
  for (const auto& code : {build_repetition(1, 3), build_toric(2), build_xzzx(3)}) {
    for (int n : {2, 3}) {
      const auto r = coherent_information(code, rates(0, 0, 0, 0), 2, n);
      EXPECT_NEAR(r.ic, code.num_logical() * kLog2, 1e-12) << code.name();
    }
  }
}

TEST(CoherentInformation, MaximalBitFlipsDestroyInformation) {
  const auto r = coherent_information(build_repetition(1, 3), rates(0.5, 0, 0, 0), 1, 2);
  EXPECT_NEAR(r.ic, 0.0, 1e-12);
}

TEST(CoherentInformation, ToricMatchesOracle) {
  const auto code = build_toric(2);
  const auto np = rates(0, 0, 0.05, 0);
  oracle::Protocol pr;
  pr.T = 1;
  const double qm = oracle::log_trace_power(oracle::simulate(code, np, pr), 2);
  pr.with_reference = true;
  const double qmr = oracle::log_trace_power(oracle::simulate(code, np, pr), 2);
  const auto r = coherent_information(code, np, 1, 2);
  EXPECT_NEAR(r.ic, (qm - qmr) / (1 - 2), 1e-10);
  EXPECT_NEAR(r.log_trace_qm, qm, 1e-10);
  EXPECT_NEAR(r.log_trace_qmr, qmr, 1e-10);
}

TEST(CoherentInformation, ReportsEveryDefectSector) {
  const auto r = coherent_information(build_toric(2), rates(0, 0, 0.1, 0.1), 1, 3);
  EXPECT_EQ(r.defect_free_energies.size(), 16u * 16u);
  EXPECT_EQ(r.defect_free_energies.at("0000|0000"), 0.0);
}

TEST(RelativeEntropy, ZeroSyndromeGivesZero) {
  const auto code = build_repetition(1, 3);
  EXPECT_EQ(relative_entropy(code, rates(0.1, 0, 0, 0.1), 2, 2, BitVector(3)), 0.0);
  EXPECT_EQ(kl_divergence(code, rates(0.1, 0, 0, 0.1), 2, 2, BitVector(3)), 0.0);
}

TEST(RelativeEntropy, NoiselessStatesArePerfectlyDistinguishable) {
  const auto code = build_toric(2);
  const auto s = syndrome_of_error(code, PauliWord::from_string("XIIIIIII"));
  EXPECT_TRUE(std::isinf(relative_entropy(code, rates(0, 0, 0, 0), 1, 2, s)));
}

TEST(RelativeEntropy, UnreachableSyndromeIsRejected) {
  const auto code = build_toric(2);
  BitVector s(code.num_checks());
  s.set(0);
  EXPECT_THROW(relative_entropy(code, rates(0.1, 0, 0.1, 0.1), 1, 2, s), ValidationError);
}

TEST(RelativeEntropy, RepetitionMatchesBruteForceTwoPointFunction) {
  // 3x3 spin grid (layers 0..2), bond weights squared for n = 2.
  const double p = 0.2, q = 0.1;
  const double ws = (1 - 2 * p) * (1 - 2 * p), wt = (1 - 2 * q) * (1 - 2 * q);
  double z = 0, zs = 0;
  for (int u = 0; u < 512; ++u) {
    auto bit = [u](int t, int i) { return (u >> (3 * t + i)) & 1; };
    double w = 1;
    for (int t = 0; t < 2; ++t)
      for (int i = 0; i < 3; ++i) {
        if (bit(t, i) != bit(t, (i + 1) % 3)) w *= ws;
        if (bit(t, i) != bit(t + 1, i)) w *= wt;
      }
    z += w;
    zs += w * ((bit(0, 0) ^ bit(0, 1)) ? -1 : 1);
  }
  const auto code = build_repetition(1, 3);
  const double d = relative_entropy(code, rates(p, 0, 0, q), 2, 2, BitVector::from_string("110"));
  EXPECT_NEAR(d, -std::log(zs / z), 1e-12);
}

TEST(KlDivergence, BoundedByRelativeEntropy) {
  const auto code = build_repetition(1, 3);
  const auto s = BitVector::from_string("110");
  const auto np = rates(0.2, 0, 0, 0.3);
  EXPECT_LE(kl_divergence(code, np, 1, 2, s), relative_entropy(code, np, 1, 2, s) + 1e-12);
}

TEST(Oracle, ZeroRoundsGiveMaximallyMixedCodeState) {
  for (const auto& code : {build_repetition(1, 3), build_toric(2)}) {
    oracle::Protocol pr;
    pr.T = 0;
    const auto st = oracle::simulate(code, rates(0.1, 0, 0.1, 0.1), pr);
    for (int n : {2, 3}) {
      EXPECT_NEAR(oracle::log_trace_power(st, n), -static_cast<double>(code.num_logical()) * (n - 1) * kLog2, 1e-12);
    }
  }
}

TEST(Oracle, StatesAreNormalized) {
  oracle::Protocol pr;
  pr.T = 2;
  pr.with_reference = true;
  const auto st = oracle::simulate(build_repetition(1, 3), rates(0.1, 0.05, 0.02, 0.1), pr);
  double identity = 0;
  for (const auto& t : st.terms) {
    if (t.x == 0 && t.z == 0) identity += t.c;
  }
  EXPECT_NEAR(identity, 1.0, 1e-14);
}

TEST(Oracle, RepetitionMatchesPartitionFunction) {
  const auto code = build_repetition(1, 3);
  const auto np = rates(0.1, 0, 0, 0.1);
  oracle::Protocol pr;
  pr.T = 1;
  const double lz = partition_function(build_single_flavor(code, np, 1), 2);
  const double norm = (2 - 1) * (3.0 + 1.0 + 3.0) * kLog2;
  EXPECT_NEAR(oracle::log_trace_power(oracle::simulate(code, np, pr), 2), lz - norm, 1e-10);
}

TEST(Oracle, ThreeFlavorsMatchBothEngines) {
  const auto np = rates(0.03, 0.02, 0.08, 0.06);
  oracle::Protocol pr;
  pr.T = 1;
  const auto toric = build_toric(2);
  EXPECT_NEAR(oracle::log_trace_power(oracle::simulate(toric, np, pr), 3), log_trace_rho_qm(toric, np, 1, 3), 1e-10);
  const auto xzzx = build_xzzx(2);
  const EngineOptions e = engine(ExactEngine::Enumerate);
  EXPECT_NEAR(oracle::log_trace_power(oracle::simulate(xzzx, np, pr), 3), log_trace_rho_qm(xzzx, np, 1, 3, {}, e), 1e-10);
}
