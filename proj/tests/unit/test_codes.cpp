#include <gtest/gtest.h>

#include "syndromestat/codes.hpp"
#include "syndromestat/errors.hpp"

using namespace syndromestat;

namespace {

// Pairing invariant: <<Xbar_j, Zbar_k>> = delta_jk, logicals of one type commute, all commute with checks.
void expect_symplectic_logicals(const CodeSpec& code) {
  const std::size_t K = code.num_logical();
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      EXPECT_EQ(symplectic_form(code.logical_x(j), code.logical_z(k)), j == k);
      EXPECT_FALSE(symplectic_form(code.logical_x(j), code.logical_x(k)));
      EXPECT_FALSE(symplectic_form(code.logical_z(j), code.logical_z(k)));
    }
    for (const auto& g : code.checks()) {
      EXPECT_FALSE(symplectic_form(g, code.logical_x(j)));
      EXPECT_FALSE(symplectic_form(g, code.logical_z(j)));
    }
  }
}

// Every redundancy vector multiplies the checks to +identity.
void expect_redundancies_multiply_to_identity(const CodeSpec& code) {
  for (const auto& u : code.redundancies().rows()) {
    PauliWord prod(code.num_qubits());
    for (int i : u.ones()) prod = multiply(prod, code.check(static_cast<std::size_t>(i)));
    EXPECT_TRUE(prod.is_identity());
    EXPECT_EQ(prod.phase(), 0);
  }
}

}  // namespace

TEST(Toric, L3Counts) {
  const auto c = build_toric(3);
  EXPECT_EQ(c.num_qubits(), 18u);
  EXPECT_EQ(c.num_checks(), 18u);
  EXPECT_EQ(c.num_logical(), 2u);
  EXPECT_EQ(c.num_redundancies(), 2u);
  EXPECT_EQ(symmetry_classification(c), "global");
  expect_symplectic_logicals(c);
  expect_redundancies_multiply_to_identity(c);
}

TEST(Toric, L4HasTwoLogicalQubits) {
  const auto c = build_toric(4);
  EXPECT_EQ(c.num_logical(), 2u);
  EXPECT_EQ(c.num_qubits() - c.check_rank(), c.num_logical());
  expect_symplectic_logicals(c);
}

TEST(Toric, RedundanciesAreAllStarsAndAllPlaquettes) {
  const auto c = build_toric(3);
  BinaryMatrix expected(2, 18);
  for (std::size_t i = 0; i < 9; ++i) expected.row(0).set(i);
  for (std::size_t i = 9; i < 18; ++i) expected.row(1).set(i);
  BinaryMatrix both(18);
  for (const auto& r : c.redundancies().rows()) both.append_row(r);
  for (const auto& r : expected.rows()) both.append_row(r);
  EXPECT_EQ(rank(both), 2u);
}

TEST(Repetition, OneDimensional) {
  const auto c = build_repetition(1, 5);
  EXPECT_EQ(c.num_checks(), 5u);
  EXPECT_EQ(c.num_redundancies(), 1u);
  EXPECT_EQ(c.num_logical(), 1u);
  expect_symplectic_logicals(c);
}

TEST(Repetition, TwoDimensionalHasLocalRedundancies) {
  const auto c = build_repetition(2, 3);
  EXPECT_EQ(c.num_checks(), 18u);
  EXPECT_EQ(c.num_redundancies(), 10u);
  EXPECT_EQ(symmetry_classification(c), "local");
  expect_redundancies_multiply_to_identity(c);
  // The four edges around each elementary plaquette lie in the redundancy span.
  const int L = 3;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      BitVector u(18);
      u.flip(static_cast<std::size_t>(y * L + x));
      u.flip(static_cast<std::size_t>(((y + 1) % L) * L + x));
      u.flip(static_cast<std::size_t>(L * L + y * L + x));
      u.flip(static_cast<std::size_t>(L * L + y * L + (x + 1) % L));
      BinaryMatrix m(18);
      for (const auto& r : c.redundancies().rows()) m.append_row(r);
      m.append_row(u);
      EXPECT_EQ(rank(m), 10u) << "plaquette at " << x << "," << y;
    }
  }
}

TEST(Repetition, RejectsShortRings) { EXPECT_THROW(build_repetition(1, 2), ValidationError); }

TEST(Xzzx, EvenTorusHasTwoRedundancies) {
  const auto c = build_xzzx(4);
  EXPECT_EQ(c.num_redundancies(), 2u);
  EXPECT_EQ(c.num_logical(), 2u);
  expect_symplectic_logicals(c);
  expect_redundancies_multiply_to_identity(c);
}

TEST(Xzzx, OddTorusHasOneRedundancy) {
  // On an odd periodic torus the plaquette checks have a single relation and one logical qubit.
  const auto c = build_xzzx(3);
  EXPECT_EQ(c.num_redundancies(), 1u);
  EXPECT_EQ(c.num_logical(), 1u);
  expect_symplectic_logicals(c);
  expect_redundancies_multiply_to_identity(c);
}

TEST(Xzzx, LogicalCountMatchesRank) {
  for (int L : {2, 3, 4, 5}) {
    const auto c = build_xzzx(L);
    EXPECT_EQ(c.num_logical(), c.num_qubits() - c.check_rank()) << "L=" << L;
    expect_symplectic_logicals(c);
  }
}

TEST(LoadCode, RoundTripsBuiltins) {
  for (const auto& c : {build_repetition(1, 3), build_toric(2), build_xzzx(3)}) {
    const auto back = load_code(code_to_json(c));
    EXPECT_EQ(back.fingerprint(), c.fingerprint());
    EXPECT_EQ(back.checks(), c.checks());
    EXPECT_EQ(back.logicals(), c.logicals());
  }
}

TEST(LoadCode, RejectsAnticommutingChecks) {
  EXPECT_THROW(load_code(R"({"n": 2, "checks": [{"x": [0, 1]}, {"z": [0]}]})"), ValidationError);
}

TEST(LoadCode, RejectsProductWithMinusSign) {
  // Z0Z1, Z1Z2 and -Z0Z2 multiply to -identity.
  EXPECT_THROW(load_code(R"({"n": 3, "checks": [{"z": [0, 1]}, {"z": [1, 2]}, {"z": [0, 2], "sign": -1}]})"),
               ValidationError);
}

TEST(LoadCode, ComputesLogicalsWhenAbsent) {
  const auto c = load_code(R"({"n": 3, "checks": [{"z": [0, 1]}, {"z": [1, 2]}]})");
  EXPECT_EQ(c.num_logical(), 1u);
  expect_symplectic_logicals(c);
}

TEST(LoadCode, MalformedDocumentsAreValidationErrors) {
  EXPECT_THROW(load_code("{"), ValidationError);
  EXPECT_THROW(load_code(R"({"checks": []})"), ValidationError);
  EXPECT_THROW(load_code(R"({"n": 2, "checks": [{"x": [5]}]})"), ValidationError);
}

TEST(Syndromes, ErrorWithSyndromeInvertsSyndromeMap) {
  const auto c = build_toric(3);
  for (std::size_t q = 0; q < c.num_qubits(); ++q) {
    PauliWord e(c.num_qubits());
    e.x().set(q);
    e.z().set((q * 7) % c.num_qubits());
    const auto s = syndrome_of_error(c, e);
    const auto w = error_with_syndrome(c, s);
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(syndrome_of_error(c, *w), s);
  }
  BitVector odd(c.num_checks());
  odd.set(0);  // one violated star is not reachable
  EXPECT_FALSE(error_with_syndrome(c, odd).has_value());
}

TEST(Syndromes, LogicalClassDetectsLogicals) {
  const auto c = build_toric(3);
  for (std::size_t k = 0; k < 2 * c.num_logical(); ++k) {
    BitVector kappa(2 * c.num_logical());
    kappa.set(k);
    const auto L = logical_operator(c, kappa);
    EXPECT_TRUE(syndrome_of_error(c, L).none());
    EXPECT_EQ(logical_class(c, L), kappa);
  }
}
