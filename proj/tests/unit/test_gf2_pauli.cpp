#include <gtest/gtest.h>

#include <array>
#include <complex>
#include <random>
#include <vector>

#include "syndromestat/errors.hpp"
#include "syndromestat/gf2.hpp"
#include "syndromestat/pauli.hpp"

using namespace syndromestat;

namespace {

using Mat = std::vector<std::complex<double>>;

Mat kron(const Mat& a, std::size_t da, const Mat& b, std::size_t db) {
  Mat out(da * db * da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) out[(i * db + k) * da * db + j * db + l] = a[i * da + j] * b[k * db + l];
  return out;
}

Mat matmul(const Mat& a, const Mat& b, std::size_t d) {
  Mat out(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += a[i * d + k] * b[k * d + j];
  return out;
}

// Dense i^phase * prod_q P_q with P = I, X, Y, Z read letter by letter (qubit 0 is the leftmost factor).
Mat dense(const PauliWord& w) {
  const std::complex<double> I1(0, 1);
  const std::array<Mat, 4> single = {Mat{1, 0, 0, 1}, Mat{0, 1, 1, 0}, Mat{0, -I1, I1, 0}, Mat{1, 0, 0, -1}};
  Mat out{1};
  std::size_t d = 1;
  for (std::size_t q = 0; q < w.num_qubits(); ++q) {
    const char c = w.at(q);
    const int idx = c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3;
    out = kron(out, d, single[static_cast<std::size_t>(idx)], 2);
    d *= 2;
  }
  std::complex<double> ph = 1;
  for (int k = 0; k < w.phase(); ++k) ph *= I1;
  for (auto& x : out) x *= ph;
  return out;
}

PauliWord random_word(std::mt19937_64& rng, std::size_t n) {
  PauliWord w(n);
  for (std::size_t q = 0; q < n; ++q) {
    w.x().set(q, rng() & 1);
    w.z().set(q, rng() & 1);
  }
  w.set_phase(static_cast<int>(rng() % 4));
  return w;
}

double max_diff(const Mat& a, const Mat& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(SymplecticForm, XAndZAnticommute) {
  EXPECT_TRUE(symplectic_form(PauliWord::from_string("X"), PauliWord::from_string("Z")));
}

TEST(SymplecticForm, SelfCommutes) {
  EXPECT_FALSE(symplectic_form(PauliWord::from_string("X"), PauliWord::from_string("X")));
}

TEST(SymplecticForm, DisjointSupportCommutes) {
  EXPECT_FALSE(symplectic_form(PauliWord::from_string("YI"), PauliWord::from_string("IZ")));
}

TEST(SymplecticForm, LengthMismatchIsDimensionError) {
  EXPECT_THROW(symplectic_form(PauliWord(2), PauliWord(3)), DimensionError);
}

TEST(Multiply, IdentityIsNeutral) {
  const auto b = PauliWord::from_string("XYZ");
  EXPECT_EQ(multiply(PauliWord(3), b), b);
}

TEST(Multiply, SquaresToIdentity) {
  for (const char* s : {"X", "Y", "Z", "XYZI"}) {
    const auto a = PauliWord::from_string(s);
    const auto sq = multiply(a, a);
    EXPECT_TRUE(sq.is_identity());
    EXPECT_EQ(sq.phase(), 0);
  }
}

TEST(Multiply, XTimesZIsMinusIY) {
  const auto p = multiply(PauliWord::from_string("X"), PauliWord::from_string("Z"));
  EXPECT_EQ(p.at(0), 'Y');
  EXPECT_EQ(p.phase(), 3);
}

TEST(Multiply, MatchesDenseMatrices) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const auto a = random_word(rng, n);
    const auto b = random_word(rng, n);
    const std::size_t d = std::size_t{1} << n;
    EXPECT_LT(max_diff(dense(multiply(a, b)), matmul(dense(a), dense(b), d)), 1e-12);
    const Mat ab = matmul(dense(a), dense(b), d);
    const Mat ba = matmul(dense(b), dense(a), d);
    Mat neg = ba;
    for (auto& x : neg) x = -x;
    EXPECT_LT(max_diff(ab, symplectic_form(a, b) ? neg : ba), 1e-12);
  }
}

TEST(Multiply, IsAssociative) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_word(rng, 70);
    const auto b = random_word(rng, 70);
    const auto c = random_word(rng, 70);
    EXPECT_EQ(multiply(multiply(a, b), c), multiply(a, multiply(b, c)));
  }
}

TEST(Pauli, ParsesPhasePrefixes) {
  EXPECT_EQ(PauliWord::from_string("-iXZ").phase(), 3);
  EXPECT_EQ(PauliWord::from_string("-XZ").phase(), 2);
  EXPECT_THROW(PauliWord::from_string("XQ"), ValidationError);
}

TEST(Nullspace, IdentityHasEmptyKernel) {
  BinaryMatrix m(4, 4);
  for (std::size_t i = 0; i < 4; ++i) m.row(i).set(i);
  EXPECT_EQ(nullspace(m).nrows(), 0u);
  EXPECT_EQ(rank(m), 4u);
}

TEST(Nullspace, DuplicateRowsGiveTheirSum) {
  BinaryMatrix m(3, 5);
  m.row(0) = BitVector::from_string("10110");
  m.row(1) = BitVector::from_string("10110");
  m.row(2) = BitVector::from_string("01000");
  const auto k = nullspace(m);
  ASSERT_EQ(k.nrows(), 1u);
  EXPECT_EQ(k.row(0), BitVector::from_string("110"));
}

TEST(Nullspace, RankNullityOnRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = 1 + rng() % 90;
    const std::size_t c = 1 + rng() % 90;
    BinaryMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m.row(i).set(j, (rng() % 3) == 0);
    const auto k = nullspace(m);
    EXPECT_EQ(rank(m) + k.nrows(), r);
    EXPECT_EQ(rank(k), k.nrows());
    const auto mt = m.transpose();
    for (const auto& v : k.rows()) EXPECT_TRUE(mt.multiply(v).none());
  }
}

TEST(Solve, FindsSolutionOrReportsNone) {
  BinaryMatrix m(2, 3);
  m.row(0) = BitVector::from_string("110");
  m.row(1) = BitVector::from_string("011");
  const auto x = solve(m, BitVector::from_string("10"));
  ASSERT_TRUE(x.has_value());
  EXPECT_EQ(m.multiply(*x), BitVector::from_string("10"));
  BinaryMatrix dup(2, 2);
  dup.row(0) = BitVector::from_string("11");
  dup.row(1) = BitVector::from_string("11");
  EXPECT_FALSE(solve(dup, BitVector::from_string("10")).has_value());
}
